//! Least-squares recovery of line strengths and motion widths from a
//! reflection spectrum.
//!
//! The model is the Monte Carlo averaged spectrum evaluated with one fixed
//! seed for the whole fit, so it is a smooth deterministic function of the
//! parameters and can be differenced numerically. The optimizer is a
//! bounded Levenberg–Marquardt iteration with Nielsen's damping update.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{usage, Error, Result};
use crate::mode::{averaged_spectrum, AtomScenario, CooperativityStats, ModeGeometry, MonteCarlo};
use crate::qed::{CavityParams, Coupling, Transition};
use crate::spectrum::check_grid;

/// Measured reflectivity. Unlike [`crate::spectrum::Spectrum`] the values
/// may leave `[0, 1]` through noise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitData {
    pub probe: Vec<f64>,
    pub values: Vec<f64>,
    pub stderr: Option<Vec<f64>>,
}

impl FitData {
    pub fn new(probe: Vec<f64>, values: Vec<f64>, stderr: Option<Vec<f64>>) -> Result<Self> {
        check_grid(&probe)?;
        if values.len() != probe.len() {
            return Err(usage("value count does not match the probe grid"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(usage("data values must be finite"));
        }
        if let Some(e) = &stderr {
            if e.len() != probe.len() {
                return Err(usage("stderr count does not match the probe grid"));
            }
            if e.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
                return Err(usage("stderr values must be positive for weighting"));
            }
        }
        Ok(Self { probe, values, stderr })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ParamKind {
    /// Center cooperativity of one line.
    LineC0 {
        atom: usize,
        line: usize,
    },
    /// Center Rabi frequency of one line (MHz), an alternative to `LineC0`.
    LineG0 {
        atom: usize,
        line: usize,
    },
    Wx {
        atom: usize,
    },
    Wz {
        atom: usize,
    },
    /// Added to the cavity detuning (MHz).
    CavityOffset,
    /// Multiplies the model reflectivity.
    Amplitude,
    /// Added to the model reflectivity.
    Offset,
    /// Scales the contribution of one line, `model + (h − 1)(model − model without the line)`.
    LineHeight {
        atom: usize,
        line: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitParam {
    pub kind: ParamKind,
    pub initial: f64,
    pub lower: f64,
    pub upper: f64,
}

impl FitParam {
    pub fn new(kind: ParamKind, initial: f64, lower: f64, upper: f64) -> Self {
        Self {
            kind,
            initial,
            lower,
            upper,
        }
    }

    pub fn name(&self) -> String {
        match self.kind {
            ParamKind::LineC0 { atom, line } => format!("c0[{atom}.{line}]"),
            ParamKind::LineG0 { atom, line } => format!("g0[{atom}.{line}]"),
            ParamKind::Wx { atom } => format!("wx[{atom}]"),
            ParamKind::Wz { atom } => format!("wz[{atom}]"),
            ParamKind::CavityOffset => "cavity_offset".into(),
            ParamKind::Amplitude => "amplitude".into(),
            ParamKind::Offset => "offset".into(),
            ParamKind::LineHeight { atom, line } => format!("height[{atom}.{line}]"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Weighting {
    #[default]
    Uniform,
    /// Residuals divided by the per-point standard error of the data.
    Stderr,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    pub max_iterations: usize,
    /// Stop when an accepted step lowers the objective by less than this
    /// fraction.
    pub objective_tolerance: f64,
    /// Stop when the step is below this fraction of the parameter norm.
    pub step_tolerance: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            max_iterations: 500,
            objective_tolerance: 1e-8,
            step_tolerance: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitProblem {
    pub data: FitData,
    pub cavity: CavityParams,
    /// Starting scenario; floating parameters overwrite its entries.
    pub atoms: Vec<AtomScenario>,
    pub geometry: ModeGeometry,
    pub monte_carlo: MonteCarlo,
    pub params: Vec<FitParam>,
    pub weighting: Weighting,
    pub options: FitOptions,
}

impl FitProblem {
    pub fn validate(&self) -> Result<()> {
        if self.params.is_empty() {
            return Err(usage("at least one parameter must float"));
        }
        if self.weighting == Weighting::Stderr && self.data.stderr.is_none() {
            return Err(usage("stderr weighting needs per-point errors in the data"));
        }
        for p in &self.params {
            let name = p.name();
            if !(p.lower.is_finite() && p.upper.is_finite() && p.lower < p.upper) {
                return Err(usage(format!("{name}: bounds must be finite with lower < upper")));
            }
            if !(p.lower..=p.upper).contains(&p.initial) {
                return Err(usage(format!("{name}: initial value {} outside bounds", p.initial)));
            }
            let line_ok = |atom: usize, line: usize| self.atoms.get(atom).is_some_and(|a| line < a.lines.len());
            let ok = match p.kind {
                ParamKind::LineC0 { atom, line }
                | ParamKind::LineG0 { atom, line }
                | ParamKind::LineHeight { atom, line } => line_ok(atom, line),
                ParamKind::Wx { atom } | ParamKind::Wz { atom } => atom < self.atoms.len(),
                _ => true,
            };
            if !ok {
                return Err(usage(format!("{name} refers to a missing atom or line")));
            }
            let lower_ok = match p.kind {
                ParamKind::LineC0 { .. }
                | ParamKind::LineG0 { .. }
                | ParamKind::Wx { .. }
                | ParamKind::Wz { .. }
                | ParamKind::LineHeight { .. } => p.lower >= 0.0,
                _ => true,
            };
            if !lower_ok {
                return Err(usage(format!("{name}: lower bound must be >= 0")));
            }
        }
        for (i, a) in self.params.iter().enumerate() {
            if self.params[..i].iter().any(|b| b.kind == a.kind) {
                return Err(usage(format!("{} floats twice", a.name())));
            }
        }
        Ok(())
    }

    pub fn initial(&self) -> Vec<f64> {
        self.params.iter().map(|p| p.initial).collect()
    }

    /// Scenario with the parameter values written in.
    fn scenario(&self, theta: &[f64]) -> Result<(CavityParams, Vec<AtomScenario>)> {
        let mut cavity = self.cavity;
        let mut atoms = self.atoms.clone();
        let kappa = cavity.kappa();
        for (p, &v) in self.params.iter().zip(theta) {
            match p.kind {
                ParamKind::LineC0 { atom, line } => {
                    let t = atoms[atom].lines[line];
                    atoms[atom].lines[line] = Transition::new(t.delta(), t.gamma(), Coupling::Cooperativity(v))?;
                }
                ParamKind::LineG0 { atom, line } => {
                    let t = atoms[atom].lines[line];
                    let c = 4.0 * v * v / (kappa * t.gamma());
                    atoms[atom].lines[line] = Transition::new(t.delta(), t.gamma(), Coupling::Cooperativity(c))?;
                }
                ParamKind::Wx { atom } => atoms[atom].wx_nm = v,
                ParamKind::Wz { atom } => atoms[atom].wz_nm = v,
                ParamKind::CavityOffset => cavity = cavity.with_delta_c(self.cavity.delta_c() + v),
                _ => {}
            }
        }
        Ok((cavity, atoms))
    }

    /// Model reflectivity on the data grid.
    pub fn model(&self, theta: &[f64]) -> Result<Vec<f64>> {
        let (cavity, atoms) = self.scenario(theta)?;
        let grid = &self.data.probe;
        let eval = |atoms: &[AtomScenario]| {
            averaged_spectrum(grid, &cavity, atoms, &self.geometry, &self.monte_carlo).map(|(s, _)| s.values().to_vec())
        };
        let mut values = eval(&atoms)?;
        let full = values.clone();
        let (mut amplitude, mut offset) = (1.0, 0.0);
        for (p, &v) in self.params.iter().zip(theta) {
            match p.kind {
                ParamKind::Amplitude => amplitude = v,
                ParamKind::Offset => offset = v,
                ParamKind::LineHeight { atom, line } => {
                    let mut without = atoms.clone();
                    without[atom].lines[line] = without[atom].lines[line].scaled(0.0);
                    let reduced = eval(&without)?;
                    for ((m, f), r) in values.iter_mut().zip(&full).zip(&reduced) {
                        *m += (v - 1.0) * (f - r);
                    }
                }
                _ => {}
            }
        }
        Ok(values.into_iter().map(|m| amplitude * m + offset).collect())
    }

    fn weights(&self) -> Vec<f64> {
        match (self.weighting, &self.data.stderr) {
            (Weighting::Stderr, Some(e)) => e.iter().map(|s| 1.0 / s).collect(),
            _ => vec![1.0; self.data.values.len()],
        }
    }

    /// Cooperativity statistics of each atom at the given parameters.
    pub fn cooperativity_stats(&self, theta: &[f64]) -> Result<Vec<CooperativityStats>> {
        let (cavity, atoms) = self.scenario(theta)?;
        let grid = [0.0];
        averaged_spectrum(&grid, &cavity, &atoms, &self.geometry, &self.monte_carlo).map(|(_, s)| s)
    }

    fn with_values(&self, values: Vec<f64>) -> Self {
        Self {
            data: FitData {
                values,
                ..self.data.clone()
            },
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub names: Vec<String>,
    pub values: Vec<f64>,
    /// Weighted residual sum of squares.
    pub rss: f64,
    /// Bootstrap standard errors, filled in by [`bootstrap_uncertainty`].
    pub stderr: Option<Vec<f64>>,
    pub iterations: usize,
    pub evaluations: usize,
    pub step_norm: f64,
    pub converged: bool,
    /// Sampled cooperativity of each atom's strongest line at the best fit.
    pub cooperativity: Vec<CooperativityStats>,
}

struct Objective<'a> {
    problem: &'a FitProblem,
    weights: Vec<f64>,
    evaluations: usize,
}

impl Objective<'_> {
    fn residuals(&mut self, theta: &[f64]) -> Result<DVector<f64>> {
        self.evaluations += 1;
        let model = self.problem.model(theta)?;
        Ok(DVector::from_iterator(
            model.len(),
            model
                .iter()
                .zip(&self.problem.data.values)
                .zip(&self.weights)
                .map(|((m, d), w)| w * (m - d)),
        ))
    }

    /// Forward differences, backward where the forward point leaves the bounds.
    fn jacobian(&mut self, theta: &[f64], r: &DVector<f64>) -> Result<DMatrix<f64>> {
        let params = &self.problem.params;
        let mut jac = DMatrix::zeros(r.len(), theta.len());
        for (j, p) in params.iter().enumerate() {
            let scale = theta[j].abs().max(1e-3 * (p.upper - p.lower));
            let mut h = 1e-6 * scale;
            if theta[j] + h > p.upper {
                h = -h;
            }
            let mut shifted = theta.to_vec();
            shifted[j] += h;
            let rj = self.residuals(&shifted)?;
            jac.set_column(j, &((rj - r) / h));
        }
        Ok(jac)
    }
}

fn clamp_to_bounds(params: &[FitParam], theta: &mut [f64]) {
    for (t, p) in theta.iter_mut().zip(params) {
        *t = t.clamp(p.lower, p.upper);
    }
}

/// Minimises the weighted squared residuals from `initial`.
///
/// Running out of iterations is not an error: the best point is returned
/// with `converged = false`.
pub fn fit_spectrum(problem: &FitProblem, initial: &[f64]) -> Result<FitResult> {
    problem.validate()?;
    if initial.len() != problem.params.len() {
        return Err(usage("initial guess length does not match the parameter list"));
    }
    for (p, v) in problem.params.iter().zip(initial) {
        if !(p.lower..=p.upper).contains(v) {
            return Err(usage(format!("{}: initial value {v} outside bounds", p.name())));
        }
    }
    let opts = problem.options;
    let mut obj = Objective {
        problem,
        weights: problem.weights(),
        evaluations: 0,
    };
    let n = initial.len();
    let mut theta = initial.to_vec();
    let mut r = obj.residuals(&theta)?;
    let mut cost = 0.5 * r.norm_squared();
    let mut jac = obj.jacobian(&theta, &r)?;
    let mut mu = {
        let jtj = jac.transpose() * &jac;
        1e-3 * (0..n).map(|i| jtj[(i, i)]).fold(0.0, f64::max).max(1e-12)
    };
    let mut nu = 2.0;
    let mut iterations = 0;
    let mut step_norm = f64::INFINITY;
    let mut converged = cost == 0.0;
    while !converged && iterations < opts.max_iterations {
        iterations += 1;
        let jt = jac.transpose();
        let jtj = &jt * &jac;
        let grad = &jt * &r;
        let mut lhs = jtj.clone();
        for i in 0..n {
            lhs[(i, i)] += mu * jtj[(i, i)].max(1e-12 * (1.0 + jtj.diagonal().amax()));
        }
        let step = match lhs.clone().cholesky() {
            Some(ch) => ch.solve(&(-&grad)),
            None => lhs
                .lu()
                .solve(&(-&grad))
                .ok_or_else(|| Error::Singular("damped normal equations".into()))?,
        };
        let mut trial: Vec<f64> = theta.iter().zip(step.iter()).map(|(t, s)| t + s).collect();
        clamp_to_bounds(&problem.params, &mut trial);
        let taken = DVector::from_iterator(n, trial.iter().zip(&theta).map(|(a, b)| a - b));
        step_norm = taken.norm();
        let theta_norm = theta.iter().map(|t| t * t).sum::<f64>().sqrt();
        if step_norm <= opts.step_tolerance * (theta_norm + opts.step_tolerance) {
            converged = true;
            break;
        }
        let predicted = -(grad.dot(&taken)) - 0.5 * taken.dot(&(&jtj * &taken));
        let r_trial = obj.residuals(&trial)?;
        let cost_trial = 0.5 * r_trial.norm_squared();
        let rho = if predicted > 0.0 {
            (cost - cost_trial) / predicted
        } else {
            -1.0
        };
        if cost_trial < cost && rho > 0.0 {
            let decrease = (cost - cost_trial) / cost;
            theta = trial;
            r = r_trial;
            cost = cost_trial;
            mu *= (1.0 / 3.0f64).max(1.0 - (2.0 * rho - 1.0).powi(3));
            nu = 2.0;
            if decrease < opts.objective_tolerance || cost == 0.0 {
                converged = true;
                break;
            }
            jac = obj.jacobian(&theta, &r)?;
        } else {
            mu *= nu;
            nu *= 2.0;
            if !mu.is_finite() || mu > 1e300 {
                break;
            }
        }
    }
    Ok(FitResult {
        names: problem.params.iter().map(FitParam::name).collect(),
        cooperativity: problem.cooperativity_stats(&theta)?,
        values: theta,
        rss: 2.0 * cost,
        stderr: None,
        iterations,
        evaluations: obj.evaluations,
        step_norm,
        converged,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapSummary {
    /// Standard deviation of each parameter over the accepted replicates;
    /// empty when no replicates were requested.
    pub stderr: Vec<f64>,
    pub replicates: usize,
    /// Replicates dropped because their refit did not converge.
    pub excluded: usize,
}

/// Residual-resampling bootstrap around `best`.
///
/// Each replicate adds residuals drawn with replacement to the best-fit
/// model and refits from the best-fit values. Replicate `i` draws from
/// random stream `i` of `seed`.
pub fn bootstrap_uncertainty(
    problem: &FitProblem,
    best: &FitResult,
    n_boot: usize,
    seed: u64,
) -> Result<BootstrapSummary> {
    if n_boot == 0 {
        return Ok(BootstrapSummary {
            stderr: Vec::new(),
            replicates: 0,
            excluded: 0,
        });
    }
    let model = problem.model(&best.values)?;
    let residuals: Vec<f64> = problem.data.values.iter().zip(&model).map(|(d, m)| d - m).collect();
    let n = residuals.len();
    let fits: Vec<Option<Vec<f64>>> = (0..n_boot)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b as u64);
            let values = model.iter().map(|m| m + residuals[rng.random_range(0..n)]).collect();
            let replicate = problem.with_values(values);
            match fit_spectrum(&replicate, &best.values) {
                Ok(f) if f.converged => Ok(Some(f.values)),
                Ok(_) | Err(Error::NonConvergence(_)) => Ok(None),
                Err(e) => Err(e),
            }
        })
        .collect::<Result<_>>()?;
    let accepted: Vec<&Vec<f64>> = fits.iter().flatten().collect();
    let excluded = n_boot - accepted.len();
    if excluded * 5 > n_boot {
        return Err(Error::NonConvergence(format!(
            "{excluded} of {n_boot} bootstrap refits did not converge"
        )));
    }
    let m = accepted.len() as f64;
    let stderr = (0..best.values.len())
        .map(|j| {
            let mean = accepted.iter().map(|v| v[j]).sum::<f64>() / m;
            let var = accepted.iter().map(|v| (v[j] - mean).powi(2)).sum::<f64>() / (m - 1.0).max(1.0);
            var.sqrt()
        })
        .collect();
    Ok(BootstrapSummary {
        stderr,
        replicates: n_boot,
        excluded,
    })
}

/// Adds independent Gaussian noise of standard deviation `sigma` to `values`.
pub fn add_gaussian_noise(values: &[f64], sigma: f64, seed: u64) -> Vec<f64> {
    use rand_distr::{Distribution, StandardNormal};
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    values
        .iter()
        .map(|v| {
            let z: f64 = StandardNormal.sample(&mut rng);
            v + sigma * z
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qed::{GAMMA_D2_MHZ, HYPERFINE_LINES_MHZ};
    use crate::spectrum::linspace;

    fn single_line_problem(values: Vec<f64>, grid: Vec<f64>, params: Vec<FitParam>, c0: f64) -> FitProblem {
        let atom = AtomScenario::new(
            vec![Transition::with_cooperativity(0.0, GAMMA_D2_MHZ, c0).unwrap()],
            0.0,
            0.0,
            0.0,
        )
        .unwrap();
        FitProblem {
            data: FitData::new(grid, values, None).unwrap(),
            cavity: CavityParams::default(),
            atoms: vec![atom],
            geometry: ModeGeometry::default(),
            monte_carlo: MonteCarlo::new(1, 0).unwrap(),
            params,
            weighting: Weighting::Uniform,
            options: FitOptions::default(),
        }
    }

    #[test]
    fn empty_cavity_drives_c0_to_zero() {
        let grid = linspace(-1500.0, 1500.0, 121);
        let cav = CavityParams::default();
        let data = crate::qed::spectrum(&grid, &cav, &crate::qed::EmitterSet::empty()).unwrap();
        let c0 = ParamKind::LineC0 { atom: 0, line: 0 };
        let p = single_line_problem(
            data.values().to_vec(),
            grid,
            vec![FitParam::new(c0, 10.0, 0.0, 500.0)],
            10.0,
        );
        let f = fit_spectrum(&p, &p.initial()).unwrap();
        assert!(f.converged);
        assert!(f.values[0] < 1e-3, "{:?}", f.values);
        assert!(f.rss < 1e-10);
    }

    #[test]
    fn recovers_motionless_line() {
        let grid = linspace(-1000.0, 1000.0, 201);
        let c0 = ParamKind::LineC0 { atom: 0, line: 0 };
        let truth = single_line_problem(
            vec![0.0; 201],
            grid.clone(),
            vec![FitParam::new(c0, 40.0, 0.0, 500.0)],
            40.0,
        );
        let data = truth.model(&[40.0]).unwrap();
        let p = FitProblem {
            data: FitData::new(grid, data, None).unwrap(),
            params: vec![
                FitParam::new(c0, 25.0, 0.0, 500.0),
                FitParam::new(ParamKind::CavityOffset, 200.0, -2000.0, 2000.0),
            ],
            ..truth
        };
        let f = fit_spectrum(&p, &p.initial()).unwrap();
        assert!(f.converged);
        assert!((f.values[0] - 40.0).abs() < 1e-4, "{:?}", f.values);
        assert!(f.values[1].abs() < 1e-3, "{:?}", f.values);
    }

    #[test]
    fn rabi_parametrization_agrees() {
        let grid = linspace(-1000.0, 1000.0, 101);
        let noisy = {
            let p = single_line_problem(vec![0.0; 101], grid.clone(), vec![], 60.0);
            let clean = p.model(&[]).unwrap();
            add_gaussian_noise(&clean, 0.01, 9)
        };
        let c0 = ParamKind::LineC0 { atom: 0, line: 0 };
        let g0 = ParamKind::LineG0 { atom: 0, line: 0 };
        let pc = single_line_problem(
            noisy.clone(),
            grid.clone(),
            vec![FitParam::new(c0, 30.0, 0.0, 500.0)],
            30.0,
        );
        let g_init = (30.0 * 3630.0 * GAMMA_D2_MHZ).sqrt() / 2.0;
        let pg = single_line_problem(noisy, grid, vec![FitParam::new(g0, g_init, 0.0, 5000.0)], 30.0);
        let fc = fit_spectrum(&pc, &pc.initial()).unwrap();
        let fg = fit_spectrum(&pg, &pg.initial()).unwrap();
        assert!(fc.converged && fg.converged);
        assert!((fc.rss - fg.rss).abs() / fc.rss < 1e-6, "{} {}", fc.rss, fg.rss);
        let c_from_g = 4.0 * fg.values[0].powi(2) / (3630.0 * GAMMA_D2_MHZ);
        assert!((c_from_g - fc.values[0]).abs() / fc.values[0] < 1e-3);
    }

    #[test]
    fn heights_default_to_identity() {
        let grid = linspace(-800.0, 400.0, 61);
        let lines = HYPERFINE_LINES_MHZ
            .iter()
            .zip([9.0, 46.0, 128.0])
            .map(|(&d, c)| Transition::with_cooperativity(d, GAMMA_D2_MHZ, c).unwrap())
            .collect();
        let mut p = single_line_problem(vec![0.0; 61], grid, vec![], 1.0);
        p.atoms[0].lines = lines;
        let base = p.model(&[]).unwrap();
        p.params = vec![FitParam::new(ParamKind::LineHeight { atom: 0, line: 1 }, 1.0, 0.0, 3.0)];
        let same = p.model(&[1.0]).unwrap();
        assert_eq!(base, same);
        let raised = p.model(&[2.0]).unwrap();
        assert!(raised.iter().zip(&base).any(|(a, b)| (a - b).abs() > 1e-3));
    }

    #[test]
    fn validation_catches_bad_problems() {
        let grid = linspace(-10.0, 10.0, 5);
        let c0 = ParamKind::LineC0 { atom: 0, line: 0 };
        let none = single_line_problem(vec![0.5; 5], grid.clone(), vec![], 1.0);
        assert!(none.validate().is_err());
        let outside = single_line_problem(vec![0.5; 5], grid.clone(), vec![FitParam::new(c0, 9.0, 0.0, 5.0)], 1.0);
        assert!(outside.validate().is_err());
        let missing = single_line_problem(
            vec![0.5; 5],
            grid.clone(),
            vec![FitParam::new(ParamKind::LineC0 { atom: 0, line: 3 }, 1.0, 0.0, 5.0)],
            1.0,
        );
        assert!(missing.validate().is_err());
        let twice = single_line_problem(
            vec![0.5; 5],
            grid,
            vec![FitParam::new(c0, 1.0, 0.0, 5.0), FitParam::new(c0, 1.0, 0.0, 5.0)],
            1.0,
        );
        assert!(twice.validate().is_err());
        assert!(FitData::new(vec![0.0, 1.0], vec![0.1], None).is_err());
    }

    #[test]
    fn noiseless_bootstrap_is_flat() {
        let grid = linspace(-1000.0, 1000.0, 81);
        let c0 = ParamKind::LineC0 { atom: 0, line: 0 };
        let truth = single_line_problem(vec![0.0; 81], grid.clone(), vec![], 50.0);
        let data = truth.model(&[]).unwrap();
        let p = single_line_problem(data, grid, vec![FitParam::new(c0, 35.0, 0.0, 500.0)], 35.0);
        let f = fit_spectrum(&p, &p.initial()).unwrap();
        let b = bootstrap_uncertainty(&p, &f, 8, 3).unwrap();
        assert_eq!(b.stderr.len(), 1);
        assert!(b.stderr[0] < 1e-3 * 50.0, "{:?}", b.stderr);
        let empty = bootstrap_uncertainty(&p, &f, 0, 3).unwrap();
        assert!(empty.stderr.is_empty());
    }
}

//! Master-equation steady state of the driven cavity with multilevel atoms.
//!
//! Basis: cavity Fock states `0..=fock_cutoff` times, for every atom, the
//! ground state followed by one excited state per line. The cavity index is
//! the most significant digit. The Hamiltonian is written in the frame
//! rotating at the probe frequency,
//!
//! ```text
//! H = −δ_c a†a − Σ δ_i |e_i⟩⟨e_i| + Σ g_i (a†σ_i + aσ_i†) + i√κ_wg (α a† − α* a)
//! ```
//!
//! with jump operators `√κ a` and either `√γ σ_i` per line or `Σ √γ_i σ_i`
//! per atom.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::gmres::gmres;
use crate::error::{usage, Error, Result};
use crate::qed::{CavityParams, EmitterSet};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DecayModel {
    /// One jump operator per excited state.
    #[default]
    Individual,
    /// One jump operator per atom summing all its lines.
    Cumulative,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SystemSpec {
    pub cavity: CavityParams,
    pub emitters: EmitterSet,
    pub fock_cutoff: usize,
    /// Input field amplitude `a_in`; `a_in²` is the input photon flux.
    pub drive_amplitude: f64,
    pub decay: DecayModel,
}

impl SystemSpec {
    pub fn new(cavity: CavityParams, emitters: EmitterSet, fock_cutoff: usize, drive_amplitude: f64) -> Self {
        Self {
            cavity,
            emitters,
            fock_cutoff,
            drive_amplitude,
            decay: DecayModel::Individual,
        }
    }

    pub fn hilbert_dimension(&self) -> usize {
        self.emitters
            .atoms
            .iter()
            .fold(self.fock_cutoff + 1, |d, a| d.saturating_mul(1 + a.lines.len()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Largest Hilbert-space dimension accepted.
    pub dimension_cap: usize,
    /// Largest Liouville-space dimension solved densely.
    pub dense_limit: usize,
    pub force_iterative: bool,
    /// Accepted relative residual of the steady-state equation.
    pub tolerance: f64,
    pub max_iterations: usize,
    pub restart: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            dimension_cap: 4096,
            dense_limit: 1024,
            force_iterative: false,
            tolerance: 1e-10,
            max_iterations: 20_000,
            restart: 200,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveMethod {
    Dense,
    Gmres,
}

#[derive(Debug, Clone)]
pub struct SteadyState {
    pub rho: DMatrix<Complex64>,
    /// `⟨a⟩`
    pub field: Complex64,
    pub photon_number: f64,
    /// Excited-state populations, `[atom][line]`.
    pub populations: Vec<Vec<f64>>,
    /// `‖L(ρ)‖ / (‖H_eff‖ + Σ‖J‖²)` in Frobenius norms.
    pub residual: f64,
    pub method: SolveMethod,
}

impl SteadyState {
    pub fn excited_population(&self) -> f64 {
        self.populations.iter().flatten().sum()
    }
}

/// Sparse operator as `(row, col, value)` triplets.
#[derive(Debug, Clone, Default)]
struct SparseOp {
    entries: Vec<(usize, usize, Complex64)>,
}

impl SparseOp {
    fn push(&mut self, r: usize, c: usize, v: Complex64) {
        if v != ZERO {
            self.entries.push((r, c, v));
        }
    }

    fn adjoint(&self) -> SparseOp {
        SparseOp {
            entries: self.entries.iter().map(|&(r, c, v)| (c, r, v.conj())).collect(),
        }
    }

    fn scaled(&self, s: Complex64) -> SparseOp {
        SparseOp {
            entries: self.entries.iter().map(|&(r, c, v)| (r, c, v * s)).collect(),
        }
    }

    fn extend(&mut self, other: &SparseOp) {
        self.entries.extend_from_slice(&other.entries);
    }

    fn to_dense(&self, d: usize) -> DMatrix<Complex64> {
        let mut m = DMatrix::zeros(d, d);
        for &(r, c, v) in &self.entries {
            m[(r, c)] += v;
        }
        m
    }

    fn from_dense(m: &DMatrix<Complex64>) -> SparseOp {
        let mut op = SparseOp::default();
        for c in 0..m.ncols() {
            for r in 0..m.nrows() {
                op.push(r, c, m[(r, c)]);
            }
        }
        op
    }

    fn frobenius(&self, d: usize) -> f64 {
        self.to_dense(d).norm()
    }
}

/// Mixed-radix basis with the cavity as the leading digit.
struct Basis {
    dims: Vec<usize>,
    dim: usize,
}

impl Basis {
    fn digits(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.dims.len()];
        for (slot, &d) in out.iter_mut().zip(&self.dims).rev() {
            *slot = index % d;
            index /= d;
        }
        out
    }

    fn index(&self, digits: &[usize]) -> usize {
        digits.iter().zip(&self.dims).fold(0, |acc, (&x, &d)| acc * d + x)
    }
}

struct Model {
    basis: Basis,
    h_eff: SparseOp,
    jumps: Vec<SparseOp>,
    annihilation: SparseOp,
    scale: f64,
}

fn build_model(spec: &SystemSpec, probe: f64) -> Model {
    let cav = &spec.cavity;
    let kappa = cav.kappa();
    let mut dims = vec![spec.fock_cutoff + 1];
    dims.extend(spec.emitters.atoms.iter().map(|a| 1 + a.lines.len()));
    let basis = Basis {
        dim: dims.iter().product(),
        dims,
    };
    let d = basis.dim;

    let mut annihilation = SparseOp::default();
    let mut hamiltonian = SparseOp::default();
    // lowering operators |g⟩⟨e_i| per atom and line, with their g and γ
    let mut lowering: Vec<Vec<(SparseOp, f64, f64)>> = Vec::new();
    for (k, atom) in spec.emitters.atoms.iter().enumerate() {
        let mut per_line = Vec::new();
        for (i, line) in atom.lines.iter().enumerate() {
            let mut op = SparseOp::default();
            for s in 0..d {
                let mut digits = basis.digits(s);
                if digits[k + 1] == i + 1 {
                    digits[k + 1] = 0;
                    op.push(basis.index(&digits), s, ONE);
                }
            }
            per_line.push((op, line.g_squared(kappa).sqrt(), line.gamma()));
        }
        lowering.push(per_line);
    }
    for s in 0..d {
        let digits = basis.digits(s);
        let n = digits[0];
        if n > 0 {
            let mut lower = digits.clone();
            lower[0] = n - 1;
            annihilation.push(basis.index(&lower), s, Complex64::new((n as f64).sqrt(), 0.0));
        }
        let mut energy = -(probe - cav.delta_c()) * n as f64;
        for (k, atom) in spec.emitters.atoms.iter().enumerate() {
            let level = digits[k + 1];
            if level > 0 {
                let line = &atom.lines[level - 1];
                energy -= probe - (line.delta() + atom.light_shift);
            }
        }
        hamiltonian.push(s, s, Complex64::new(energy, 0.0));
    }
    let a = annihilation.to_dense(d);
    let a_dag = a.adjoint();
    for per_line in &lowering {
        for (sigma, g, _) in per_line {
            let s = sigma.to_dense(d);
            let coupling = (&a_dag * &s + &a * s.adjoint()) * Complex64::new(*g, 0.0);
            hamiltonian.extend(&SparseOp::from_dense(&coupling));
        }
    }
    let alpha = spec.drive_amplitude;
    let drive_strength = cav.kappa_wg().sqrt() * alpha;
    hamiltonian.extend(&annihilation.adjoint().scaled(I * drive_strength));
    hamiltonian.extend(&annihilation.scaled(-I * drive_strength));

    let mut jumps = vec![annihilation.scaled(Complex64::new(kappa.sqrt(), 0.0))];
    for per_line in &lowering {
        match spec.decay {
            DecayModel::Individual => {
                for (sigma, _, gamma) in per_line {
                    jumps.push(sigma.scaled(Complex64::new(gamma.sqrt(), 0.0)));
                }
            }
            DecayModel::Cumulative => {
                let mut sum = SparseOp::default();
                for (sigma, _, gamma) in per_line {
                    sum.extend(&sigma.scaled(Complex64::new(gamma.sqrt(), 0.0)));
                }
                if !sum.entries.is_empty() {
                    jumps.push(SparseOp::from_dense(&sum.to_dense(d)));
                }
            }
        }
    }

    // H_eff = H − (i/2) Σ J†J
    let mut decay = DMatrix::<Complex64>::zeros(d, d);
    for j in &jumps {
        let jd = j.to_dense(d);
        decay += jd.adjoint() * &jd;
    }
    let h_eff_dense = hamiltonian.to_dense(d) - decay * Complex64::new(0.0, 0.5);
    let h_eff = SparseOp::from_dense(&h_eff_dense);
    let scale = h_eff.frobenius(d) + jumps.iter().map(|j| j.frobenius(d).powi(2)).sum::<f64>();
    Model {
        basis,
        h_eff,
        jumps,
        annihilation,
        scale: scale.max(f64::MIN_POSITIVE),
    }
}

impl Model {
    /// `L(ρ) = −i(H_eff ρ − ρ H_eff†) + Σ J ρ J†` on a column-major `d×d` buffer.
    fn apply(&self, rho: &[Complex64]) -> Vec<Complex64> {
        let d = self.basis.dim;
        let mut out = vec![ZERO; d * d];
        // −i H_eff ρ
        for &(r, c, v) in &self.h_eff.entries {
            let w = -I * v;
            for col in 0..d {
                out[r + col * d] += w * rho[c + col * d];
            }
        }
        // +i ρ H_eff†: (ρ H†)_{ij} = Σ_k ρ_ik conj(H_jk)
        for &(r, c, v) in &self.h_eff.entries {
            let w = I * v.conj();
            for row in 0..d {
                out[row + r * d] += w * rho[row + c * d];
            }
        }
        let mut tmp = vec![ZERO; d * d];
        for j in &self.jumps {
            tmp.iter_mut().for_each(|t| *t = ZERO);
            for &(r, c, v) in &j.entries {
                for col in 0..d {
                    tmp[r + col * d] += v * rho[c + col * d];
                }
            }
            for &(r, c, v) in &j.entries {
                let w = v.conj();
                for row in 0..d {
                    out[row + r * d] += w * tmp[row + c * d];
                }
            }
        }
        out
    }

    /// Steady-state operator with the `ρ₀₀` equation replaced by `Tr ρ = 1`.
    fn constrained(&self, rho: &[Complex64]) -> Vec<Complex64> {
        let d = self.basis.dim;
        let mut out = self.apply(rho);
        out[0] = (0..d).map(|m| rho[m + m * d]).sum();
        out
    }

    fn diagonal(&self) -> Vec<Complex64> {
        let d = self.basis.dim;
        let mut h_diag = vec![ZERO; d];
        for &(r, c, v) in &self.h_eff.entries {
            if r == c {
                h_diag[r] += v;
            }
        }
        let mut diag = vec![ZERO; d * d];
        for n in 0..d {
            for m in 0..d {
                diag[m + n * d] = -I * (h_diag[m] - h_diag[n].conj());
            }
        }
        for j in &self.jumps {
            for &(r, c, v) in &j.entries {
                if r == c {
                    for &(r2, c2, v2) in &j.entries {
                        if r2 == c2 {
                            diag[r + r2 * d] += v * v2.conj();
                        }
                    }
                }
            }
        }
        diag[0] = ONE;
        diag
    }

    fn solve_dense(&self) -> Result<Vec<Complex64>> {
        let d = self.basis.dim;
        let n = d * d;
        let mut m = DMatrix::<Complex64>::zeros(n, n);
        let mut unit = vec![ZERO; n];
        for col in 0..n {
            unit[col] = ONE;
            let column = self.constrained(&unit);
            unit[col] = ZERO;
            for (row, v) in column.into_iter().enumerate() {
                m[(row, col)] = v;
            }
        }
        let mut rhs = nalgebra::DVector::<Complex64>::zeros(n);
        rhs[0] = ONE;
        let sol = m
            .lu()
            .solve(&rhs)
            .ok_or_else(|| Error::Singular("Liouvillian with trace constraint".into()))?;
        Ok(sol.iter().copied().collect())
    }

    fn solve_iterative(&self, opts: &SolverOptions) -> Result<Vec<Complex64>> {
        let d = self.basis.dim;
        let mut rhs = vec![ZERO; d * d];
        rhs[0] = ONE;
        let precond: Vec<Complex64> = self
            .diagonal()
            .into_iter()
            .map(|v| if v.norm() > 1e-300 { ONE / v } else { ONE })
            .collect();
        let out = gmres(
            |x| self.constrained(x),
            &rhs,
            &precond,
            opts.restart,
            opts.max_iterations,
            opts.tolerance * 1e-2,
        );
        if !out.converged {
            return Err(Error::NonConvergence(format!(
                "GMRES stopped at relative residual {:.3e}",
                out.relative_residual
            )));
        }
        Ok(out.x)
    }
}

pub fn lindblad_steady_state(spec: &SystemSpec, probe: f64) -> Result<SteadyState> {
    lindblad_steady_state_with(spec, probe, &SolverOptions::default())
}

/// Stationary density operator of the driven, damped system.
///
/// Solved densely when the Liouville dimension is at most
/// `opts.dense_limit`, otherwise by Jacobi-preconditioned restarted GMRES.
pub fn lindblad_steady_state_with(spec: &SystemSpec, probe: f64, opts: &SolverOptions) -> Result<SteadyState> {
    if spec.fock_cutoff < 1 {
        return Err(usage("Fock cutoff must be at least 1"));
    }
    if !(spec.drive_amplitude.is_finite() && spec.drive_amplitude >= 0.0) {
        return Err(usage("drive amplitude must be finite and >= 0"));
    }
    if !probe.is_finite() {
        return Err(usage("probe detuning must be finite"));
    }
    let dim = spec.hilbert_dimension();
    if dim > opts.dimension_cap {
        return Err(Error::DimensionCap {
            dim,
            cap: opts.dimension_cap,
        });
    }
    let model = build_model(spec, probe);
    let (raw, method) = if !opts.force_iterative && dim * dim <= opts.dense_limit {
        (model.solve_dense()?, SolveMethod::Dense)
    } else {
        (model.solve_iterative(opts)?, SolveMethod::Gmres)
    };
    let residual = {
        let lr = model.apply(&raw);
        lr.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt() / model.scale
    };
    if residual > opts.tolerance {
        return Err(Error::NonConvergence(format!(
            "steady-state residual {residual:.3e} above {:.1e}",
            opts.tolerance
        )));
    }
    let rho = DMatrix::from_column_slice(dim, dim, &raw);
    let field = model
        .annihilation
        .entries
        .iter()
        .map(|&(r, c, v)| v * rho[(c, r)])
        .sum();
    let mut photon_number = 0.0;
    let mut populations: Vec<Vec<f64>> = spec.emitters.atoms.iter().map(|a| vec![0.0; a.lines.len()]).collect();
    for s in 0..dim {
        let p = rho[(s, s)].re;
        let digits = model.basis.digits(s);
        photon_number += digits[0] as f64 * p;
        for (k, pops) in populations.iter_mut().enumerate() {
            if digits[k + 1] > 0 {
                pops[digits[k + 1] - 1] += p;
            }
        }
    }
    Ok(SteadyState {
        rho,
        field,
        photon_number,
        populations,
        residual,
        method,
    })
}

/// `|√κ_wg·⟨a⟩/a_in − 1|²` from the master-equation steady state.
pub fn oracle_reflectivity(spec: &SystemSpec, probe: f64) -> Result<f64> {
    if spec.drive_amplitude <= 0.0 {
        return Err(usage("reflectivity needs a non-zero drive amplitude"));
    }
    let ss = lindblad_steady_state(spec, probe)?;
    Ok((spec.cavity.kappa_wg().sqrt() * ss.field / spec.drive_amplitude - 1.0).norm_sqr())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qed::{reflectivity_amplitude, Atom, Transition, GAMMA_D2_MHZ, HYPERFINE_LINES_MHZ};
    use crate::spectrum::linspace;

    fn one_line(c: f64) -> EmitterSet {
        EmitterSet::single(Atom::new(
            0.0,
            vec![Transition::with_cooperativity(0.0, GAMMA_D2_MHZ, c).unwrap()],
        ))
    }

    fn analytic(spec: &SystemSpec, p: f64) -> f64 {
        reflectivity_amplitude(p, &spec.cavity, &spec.emitters).norm_sqr()
    }

    #[test]
    fn undriven_system_is_in_vacuum() {
        let spec = SystemSpec::new(CavityParams::default(), one_line(71.0), 3, 0.0);
        let ss = lindblad_steady_state(&spec, 0.0).unwrap();
        assert!(ss.field.norm() < 1e-14);
        assert!((ss.rho[(0, 0)].re - 1.0).abs() < 1e-12);
        assert!(ss.excited_population() < 1e-14);
        assert!(oracle_reflectivity(&spec, 0.0).is_err());
    }

    #[test]
    fn empty_cavity_is_linear_at_any_drive() {
        let cav = CavityParams::default().with_delta_c(50.0);
        for drive in [0.01, 1.0, 10.0] {
            let spec = SystemSpec::new(cav, EmitterSet::empty(), 8, drive);
            for p in [-2000.0, 0.0, 50.0, 900.0] {
                let ss = lindblad_steady_state(&spec, p).unwrap();
                let r = cav.kappa_wg().sqrt() * ss.field / drive - 1.0;
                let exact = reflectivity_amplitude(p, &cav, &EmitterSet::empty());
                // truncation error only enters through the Fock tail
                assert!((r - exact).norm() < 1e-8, "{drive} {p} {r} {exact}");
            }
        }
    }

    #[test]
    fn weak_drive_matches_analytic_line() {
        let spec = SystemSpec::new(CavityParams::default(), one_line(71.0), 3, 0.02);
        for p in [-800.0, -216.0, -40.0, 0.0, 12.0, 300.0, 800.0] {
            let ss = lindblad_steady_state(&spec, p).unwrap();
            assert!(ss.excited_population() < 1e-3);
            let o = oracle_reflectivity(&spec, p).unwrap();
            let a = analytic(&spec, p);
            assert!((o - a).abs() / a < 0.01, "{p}: {o} vs {a}");
        }
    }

    #[test]
    fn density_operator_is_physical() {
        let spec = SystemSpec::new(CavityParams::default(), one_line(40.0), 2, 3.0);
        let ss = lindblad_steady_state(&spec, 10.0).unwrap();
        let rho = &ss.rho;
        assert!((rho.trace().re - 1.0).abs() < 1e-12);
        assert!((rho - rho.adjoint()).norm() < 1e-10);
        let eig = rho.clone().symmetric_eigenvalues();
        assert!(eig.iter().all(|&e| e > -1e-10), "{eig}");
    }

    #[test]
    fn iterative_solver_matches_dense() {
        let cav = CavityParams::default().with_delta_c(-200.0);
        let em = EmitterSet::new(vec![
            Atom::new(10.0, vec![Transition::with_cooperativity(0.0, 6.0, 30.0).unwrap()]),
            Atom::new(
                -10.0,
                vec![
                    Transition::with_cooperativity(-267.0, 6.0, 10.0).unwrap(),
                    Transition::with_cooperativity(0.0, 6.0, 25.0).unwrap(),
                ],
            ),
        ]);
        let spec = SystemSpec::new(cav, em, 2, 1.5);
        let dense = lindblad_steady_state(&spec, 5.0).unwrap();
        assert_eq!(dense.method, SolveMethod::Dense);
        let opts = SolverOptions {
            force_iterative: true,
            ..SolverOptions::default()
        };
        let iter = lindblad_steady_state_with(&spec, 5.0, &opts).unwrap();
        assert_eq!(iter.method, SolveMethod::Gmres);
        assert!((&dense.rho - &iter.rho).norm() < 1e-9);
        assert!((dense.field - iter.field).norm() < 1e-10);
    }

    #[test]
    fn dimension_cap_is_enforced() {
        let lines: Vec<_> = HYPERFINE_LINES_MHZ
            .iter()
            .map(|&d| Transition::with_cooperativity(d, 6.0, 10.0).unwrap())
            .collect();
        let em = EmitterSet::new(vec![Atom::new(0.0, lines.clone()); 4]);
        let spec = SystemSpec::new(CavityParams::default(), em, 20, 0.1);
        assert!(matches!(
            lindblad_steady_state(&spec, 0.0),
            Err(Error::DimensionCap { .. })
        ));
    }

    #[test]
    fn fock_cutoff_converged_at_weak_drive() {
        let grid = linspace(-400.0, 400.0, 9);
        for &p in &grid {
            let r3 =
                oracle_reflectivity(&SystemSpec::new(CavityParams::default(), one_line(71.0), 3, 0.02), p).unwrap();
            let r4 =
                oracle_reflectivity(&SystemSpec::new(CavityParams::default(), one_line(71.0), 4, 0.02), p).unwrap();
            assert!((r3 - r4).abs() < 1e-6, "{p}: {r3} {r4}");
        }
    }
}

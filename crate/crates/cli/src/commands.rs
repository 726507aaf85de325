use std::path::{Path, PathBuf};

use cavqed_core::detection::detection_report;
use cavqed_core::features::{extract_line_features_with, FeatureOptions, LineFeature, Polarity};
use cavqed_core::fit::{
    add_gaussian_noise, bootstrap_uncertainty, fit_spectrum, FitData, FitOptions, FitParam, FitProblem, ParamKind,
    Weighting,
};
use cavqed_core::mode::{averaged_spectrum, mode_scan, AtomScenario, CooperativityStats, MonteCarlo};
use cavqed_core::oracle::{linear_response_solve, oracle_reflectivity, SystemSpec};
use cavqed_core::qed::{reflectivity_amplitude, Atom, EmitterSet};
use cavqed_core::spectrum::{linspace, Spectrum};
use cavqed_core::two_atom::{analyze_gaps, anticrossing_map, crossing_control_map, GapAnalysis, ReflectivityMap};
use serde::Serialize;

use crate::config::{FloatParam, Scenario};
use crate::error::CliError;
use crate::output::{self, sink, write_json, write_map, write_spectrum, write_table, Format};

pub struct Settings {
    pub out: Option<PathBuf>,
    pub format: Format,
}

fn summary(msg: impl AsRef<str>) {
    eprintln!("{}", msg.as_ref());
}

fn emitters(atoms: &[AtomScenario]) -> EmitterSet {
    EmitterSet::new(
        atoms
            .iter()
            .map(|a| Atom::new(a.light_shift, a.lines.clone()))
            .collect(),
    )
}

pub fn averaged(s: &Scenario, atoms: &[AtomScenario]) -> Result<(Spectrum, Vec<CooperativityStats>), CliError> {
    Ok(averaged_spectrum(
        &s.grid,
        &s.cavity,
        atoms,
        &s.geometry,
        &s.monte_carlo,
    )?)
}

#[derive(Serialize)]
struct StatsJson {
    mean: f64,
    std: f64,
}

fn stats_json(stats: &[CooperativityStats]) -> Vec<StatsJson> {
    stats
        .iter()
        .map(|c| StatsJson {
            mean: c.mean,
            std: c.std,
        })
        .collect()
}

pub fn spectrum(s: &Scenario, set: &Settings) -> Result<(), CliError> {
    let (spec, stats) = averaged(s, &s.atoms)?;
    write_spectrum(sink(set.out.as_deref())?, &spec, set.format)?;
    for (i, c) in stats.iter().enumerate() {
        summary(format!("atom {i}: mean cooperativity {:.2}, std {:.2}", c.mean, c.std));
    }
    Ok(())
}

fn pair(s: &Scenario) -> Result<[&AtomScenario; 2], CliError> {
    match s.atoms.as_slice() {
        [a, b] => Ok([a, b]),
        other => Err(CliError::Config(format!(
            "map needs exactly two atoms, got {}",
            other.len()
        ))),
    }
}

fn maps(s: &Scenario) -> Result<(ReflectivityMap, ReflectivityMap), CliError> {
    let m = s
        .config
        .map
        .as_ref()
        .ok_or_else(|| CliError::Config("scenario has no map section".into()))?;
    let atoms = pair(s)?;
    let deltas = if m.delta_ab_points == 1 {
        vec![m.delta_ab_start_mhz]
    } else {
        linspace(m.delta_ab_start_mhz, m.delta_ab_stop_mhz, m.delta_ab_points)
    };
    let coupled = anticrossing_map(
        &s.grid,
        &deltas,
        &s.cavity,
        atoms,
        &s.geometry,
        &s.monte_carlo,
        m.common_offset_mhz,
    )?;
    let control = crossing_control_map(
        &s.grid,
        &deltas,
        &s.cavity,
        atoms,
        &s.geometry,
        &s.monte_carlo,
        m.common_offset_mhz,
    )?;
    Ok((coupled, control))
}

#[derive(Serialize)]
struct GapsJson {
    coupled: Option<GapAnalysis>,
    control: Option<GapAnalysis>,
}

fn gaps(coupled: &ReflectivityMap, control: &ReflectivityMap) -> GapsJson {
    GapsJson {
        coupled: analyze_gaps(coupled, 1e-3).ok(),
        control: analyze_gaps(control, 1e-3).ok(),
    }
}

pub fn map(s: &Scenario, set: &Settings, control: bool) -> Result<(), CliError> {
    let (coupled, ctrl) = maps(s)?;
    let chosen = if control { &ctrl } else { &coupled };
    write_map(sink(set.out.as_deref())?, chosen, set.format)?;
    if let Ok(g) = analyze_gaps(chosen, 1e-3) {
        summary(format!(
            "minimum gap {:.2} MHz (fit R² {:.4}), smallest resolved gap {:.2} MHz",
            g.fitted_two_j, g.r_squared, g.min_measured_gap
        ));
    }
    Ok(())
}

fn modescan_rows(s: &Scenario) -> Result<(Vec<f64>, Vec<f64>), CliError> {
    let m = s
        .config
        .modescan
        .as_ref()
        .ok_or_else(|| CliError::Config("scenario has no modescan section".into()))?;
    if s.geometry.envelope_um.is_none() {
        return Err(CliError::Config("modescan needs geometry.envelope_um".into()));
    }
    let offsets = if m.points == 1 {
        vec![m.start_um]
    } else {
        linspace(m.start_um, m.stop_um, m.points)
    };
    let (wx, wz) = s.atoms.first().map_or((0.0, 0.0), |a| (a.wx_nm, a.wz_nm));
    let values = mode_scan(&offsets, m.c_peak, &s.geometry, wx, wz, &s.monte_carlo)?;
    Ok((offsets, values))
}

fn write_modescan(path: Option<&Path>, offsets: &[f64], values: &[f64], format: Format) -> Result<(), CliError> {
    match format {
        Format::Csv => write_table(
            sink(path)?,
            &["offset_um", "mean_cooperativity"],
            offsets
                .iter()
                .zip(values)
                .map(|(o, v)| vec![o.to_string(), v.to_string()]),
        ),
        Format::Json => {
            #[derive(Serialize)]
            struct Scan<'a> {
                offset_um: &'a [f64],
                mean_cooperativity: &'a [f64],
            }
            write_json(
                sink(path)?,
                &Scan {
                    offset_um: offsets,
                    mean_cooperativity: values,
                },
            )
        }
    }
}

pub fn modescan(s: &Scenario, set: &Settings) -> Result<(), CliError> {
    let (offsets, values) = modescan_rows(s)?;
    write_modescan(set.out.as_deref(), &offsets, &values, set.format)
}

/// Fit problem for the scenario, plus the true parameter values the
/// scenario encodes (used to synthesize data when none is given).
fn fit_problem(s: &Scenario, data: FitData) -> Result<(FitProblem, Vec<f64>), CliError> {
    let f = s
        .config
        .fit
        .as_ref()
        .ok_or_else(|| CliError::Config("scenario has no fit section".into()))?;
    let kappa = s.cavity.kappa();
    let mut params = Vec::new();
    let mut truth = Vec::new();
    let mut add = |kind: ParamKind, value: f64, start: f64, lower: f64, upper: f64| {
        params.push(FitParam::new(kind, start.clamp(lower, upper), lower, upper));
        truth.push(value);
    };
    let k = f.start_factor;
    for which in &f.float {
        for (i, atom) in s.atoms.iter().enumerate() {
            let strongest = atom
                .lines
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.cooperativity(kappa).total_cmp(&b.1.cooperativity(kappa)))
                .map(|(j, _)| j);
            for (j, line) in atom.lines.iter().enumerate() {
                let (atom, line_idx) = (i, j);
                match which {
                    FloatParam::C0 => {
                        let c = line.cooperativity(kappa);
                        add(
                            ParamKind::LineC0 { atom, line: line_idx },
                            c,
                            k * c,
                            0.0,
                            10.0 * c.max(10.0),
                        );
                    }
                    FloatParam::G0 => {
                        let g = line.rabi(kappa);
                        add(
                            ParamKind::LineG0 { atom, line: line_idx },
                            g,
                            k * g,
                            0.0,
                            4.0 * g.max(100.0),
                        );
                    }
                    FloatParam::LineHeights if Some(j) != strongest => {
                        add(ParamKind::LineHeight { atom, line: line_idx }, 1.0, 1.0, 0.0, 5.0);
                    }
                    _ => {}
                }
            }
            match which {
                FloatParam::Wx => add(ParamKind::Wx { atom: i }, atom.wx_nm, k * atom.wx_nm, 0.0, 1000.0),
                FloatParam::Wz => add(ParamKind::Wz { atom: i }, atom.wz_nm, k * atom.wz_nm, 0.0, 300.0),
                _ => {}
            }
        }
        match which {
            FloatParam::CavityOffset => add(ParamKind::CavityOffset, 0.0, 0.0, -kappa, kappa),
            FloatParam::Amplitude => add(ParamKind::Amplitude, 1.0, 1.0, 0.5, 1.5),
            FloatParam::Offset => add(ParamKind::Offset, 0.0, 0.0, -0.5, 0.5),
            _ => {}
        }
    }
    let problem = FitProblem {
        data,
        cavity: s.cavity,
        atoms: s.atoms.clone(),
        geometry: s.geometry,
        monte_carlo: s.monte_carlo,
        params,
        weighting: if f.weight_by_stderr {
            Weighting::Stderr
        } else {
            Weighting::Uniform
        },
        options: FitOptions::default(),
    };
    problem.validate().map_err(|e| CliError::Config(format!("fit: {e}")))?;
    Ok((problem, truth))
}

/// Scenario spectrum on its grid plus Gaussian noise; the noise stream is
/// derived from the scenario seed.
pub fn synthetic_data(s: &Scenario) -> Result<FitData, CliError> {
    let sigma = s.config.fit.as_ref().map_or(0.0, |f| f.synthetic_noise);
    let (clean, _) = averaged(s, &s.atoms)?;
    let values = add_gaussian_noise(clean.values(), sigma, s.seed().wrapping_add(1));
    let stderr = (sigma > 0.0).then(|| vec![sigma; values.len()]);
    Ok(FitData::new(s.grid.clone(), values, stderr)?)
}

#[derive(Serialize)]
struct ParamJson {
    name: String,
    value: f64,
    stderr: Option<f64>,
    start: f64,
    scenario_value: f64,
}

#[derive(Serialize)]
struct FitReport {
    parameters: Vec<ParamJson>,
    rss: f64,
    iterations: usize,
    evaluations: usize,
    converged: bool,
    step_norm: f64,
    bootstrap_replicates: usize,
    bootstrap_excluded: usize,
    cooperativity: Vec<StatsJson>,
}

fn run_fit(s: &Scenario, data: FitData) -> Result<FitReport, CliError> {
    let (problem, truth) = fit_problem(s, data)?;
    let start = problem.initial();
    let result = fit_spectrum(&problem, &start)?;
    let replicates = s.config.fit.as_ref().map_or(0, |f| f.bootstrap_replicates);
    let boot = bootstrap_uncertainty(&problem, &result, replicates, s.seed().wrapping_add(2))?;
    Ok(FitReport {
        parameters: result
            .names
            .iter()
            .enumerate()
            .map(|(j, name)| ParamJson {
                name: name.clone(),
                value: result.values[j],
                stderr: boot.stderr.get(j).copied(),
                start: start[j],
                scenario_value: truth[j],
            })
            .collect(),
        rss: result.rss,
        iterations: result.iterations,
        evaluations: result.evaluations,
        converged: result.converged,
        step_norm: result.step_norm,
        bootstrap_replicates: boot.replicates,
        bootstrap_excluded: boot.excluded,
        cooperativity: stats_json(&result.cooperativity),
    })
}

fn write_fit_report(path: Option<&Path>, report: &FitReport, format: Format) -> Result<(), CliError> {
    match format {
        Format::Json => write_json(sink(path)?, report),
        Format::Csv => {
            let mut rows: Vec<Vec<String>> = report
                .parameters
                .iter()
                .map(|p| {
                    vec![
                        p.name.clone(),
                        p.value.to_string(),
                        p.stderr.map(|e| e.to_string()).unwrap_or_default(),
                    ]
                })
                .collect();
            for (i, c) in report.cooperativity.iter().enumerate() {
                rows.push(vec![
                    format!("mean_cooperativity[{i}]"),
                    c.mean.to_string(),
                    String::new(),
                ]);
                rows.push(vec![
                    format!("std_cooperativity[{i}]"),
                    c.std.to_string(),
                    String::new(),
                ]);
            }
            rows.push(vec!["rss".into(), report.rss.to_string(), String::new()]);
            write_table(sink(path)?, &["parameter", "value", "stderr"], rows)
        }
    }
}

fn fit_summary(report: &FitReport) {
    let params = report
        .parameters
        .iter()
        .map(|p| match p.stderr {
            Some(e) => format!("{} = {:.3} ± {:.3}", p.name, p.value, e),
            None => format!("{} = {:.3}", p.name, p.value),
        })
        .collect::<Vec<_>>()
        .join(", ");
    summary(format!(
        "{params}; converged {} after {} iterations",
        report.converged, report.iterations
    ));
    for (i, c) in report.cooperativity.iter().enumerate() {
        summary(format!("atom {i}: mean cooperativity {:.2}, std {:.2}", c.mean, c.std));
    }
}

pub fn fit(s: &Scenario, set: &Settings, data: Option<&Path>) -> Result<(), CliError> {
    let data = match data {
        Some(p) => output::read_spectrum_csv(p)?,
        None => synthetic_data(s)?,
    };
    let report = run_fit(s, data)?;
    write_fit_report(set.out.as_deref(), &report, set.format)?;
    fit_summary(&report);
    Ok(())
}

#[derive(Serialize)]
struct OracleRow {
    probe_mhz: f64,
    analytic: f64,
    linear_response: f64,
    master_equation: f64,
    relative_deviation: f64,
}

#[derive(Serialize)]
struct OracleReport {
    fock_cutoff: usize,
    drive: f64,
    max_relative_deviation: f64,
    max_linear_response_deviation: f64,
    rows: Vec<OracleRow>,
}

fn oracle_report(s: &Scenario) -> Result<OracleReport, CliError> {
    let o = s.config.oracle.clone().unwrap_or_default();
    let em = emitters(&s.atoms);
    let spec = SystemSpec::new(s.cavity, em.clone(), o.fock_cutoff, o.drive);
    let rows = s
        .grid
        .iter()
        .map(|&p| {
            let analytic = reflectivity_amplitude(p, &s.cavity, &em).norm_sqr();
            let linear_response = linear_response_solve(p, &s.cavity, &em)?.norm_sqr();
            let master_equation = oracle_reflectivity(&spec, p)?;
            Ok(OracleRow {
                probe_mhz: p,
                analytic,
                linear_response,
                master_equation,
                relative_deviation: (master_equation - analytic).abs() / analytic.max(1e-12),
            })
        })
        .collect::<Result<Vec<_>, cavqed_core::Error>>()?;
    let max_relative_deviation = rows.iter().map(|r| r.relative_deviation).fold(0.0, f64::max);
    let max_linear_response_deviation = rows
        .iter()
        .map(|r| (r.linear_response - r.analytic).abs() / r.analytic.max(1e-12))
        .fold(0.0, f64::max);
    Ok(OracleReport {
        fock_cutoff: o.fock_cutoff,
        drive: o.drive,
        max_relative_deviation,
        max_linear_response_deviation,
        rows,
    })
}

fn write_oracle(path: Option<&Path>, report: &OracleReport, format: Format) -> Result<(), CliError> {
    match format {
        Format::Json => write_json(sink(path)?, report),
        Format::Csv => write_table(
            sink(path)?,
            &[
                "probe_mhz",
                "analytic",
                "linear_response",
                "master_equation",
                "relative_deviation",
            ],
            report.rows.iter().map(|r| {
                vec![
                    r.probe_mhz.to_string(),
                    r.analytic.to_string(),
                    r.linear_response.to_string(),
                    r.master_equation.to_string(),
                    r.relative_deviation.to_string(),
                ]
            }),
        ),
    }
}

pub fn oracle(s: &Scenario, set: &Settings) -> Result<(), CliError> {
    let report = oracle_report(s)?;
    write_oracle(set.out.as_deref(), &report, set.format)?;
    summary(format!(
        "max relative deviation, master equation vs closed form: {:.3e}; linear response vs closed form: {:.3e}",
        report.max_relative_deviation, report.max_linear_response_deviation
    ));
    Ok(())
}

pub fn detect(s: &Scenario, set: &Settings) -> Result<(), CliError> {
    let (report, hist) = detection_report(&s.count_model())?;
    match set.format {
        Format::Csv => output::write_histograms(sink(set.out.as_deref())?, &hist, Format::Csv)?,
        Format::Json => {
            #[derive(Serialize)]
            struct Detect<'a> {
                report: &'a cavqed_core::DetectionReport,
                frequency_h0: Vec<f64>,
                frequency_h1: Vec<f64>,
            }
            let (frequency_h0, frequency_h1) = hist.frequencies();
            write_json(
                sink(set.out.as_deref())?,
                &Detect {
                    report: &report,
                    frequency_h0,
                    frequency_h1,
                },
            )?;
        }
    }
    summary(format!(
        "threshold {} counts; overlap {:.3}% (normal), {:.3}% (Poisson), {:.3}% (histograms); misclassified {:.3}%",
        report.threshold,
        100.0 * report.overlap_normal,
        100.0 * report.overlap_poisson,
        100.0 * report.overlap_histogram,
        100.0 * report.empirical_error
    ));
    Ok(())
}

fn strongest_only(atom: &AtomScenario, kappa: f64) -> AtomScenario {
    let mut out = atom.clone();
    if let Some(best) = atom
        .lines
        .iter()
        .max_by(|a, b| a.cooperativity(kappa).total_cmp(&b.cooperativity(kappa)))
    {
        out.lines = vec![*best];
    }
    out
}

fn one_feature(spec: &Spectrum, base: Option<&Spectrum>) -> Option<LineFeature> {
    feature(spec, base, Polarity::Auto)
}

fn feature(spec: &Spectrum, base: Option<&Spectrum>, polarity: Polarity) -> Option<LineFeature> {
    let opts = FeatureOptions {
        polarity,
        min_prominence: 1e-3,
        baseline: base.map(Spectrum::values),
    };
    extract_line_features_with(spec, 1, &opts).ok().map(|f| f[0])
}

fn empty_spectrum(s: &Scenario) -> Result<Spectrum, CliError> {
    Ok(cavqed_core::qed::spectrum(&s.grid, &s.cavity, &EmitterSet::empty())?)
}

pub const FIGURES: [&str; 6] = ["fig1b", "fig1e", "fig2c", "fig3a", "fig3c", "fig4"];

/// Writes every output of one bundled figure scenario into `dir`.
pub fn reproduce(name: &str, s: &Scenario, dir: &Path, format: Format) -> Result<(), CliError> {
    std::fs::create_dir_all(dir)?;
    let file = |stem: &str| dir.join(format!("{stem}.{}", format.extension()));
    let json = |stem: &str| dir.join(format!("{stem}.json"));
    match name {
        "fig1b" => {
            let (offsets, values) = modescan_rows(s)?;
            write_modescan(Some(&file("modescan")), &offsets, &values, format)?;
            let at = |x: f64| offsets.iter().position(|o| (o - x).abs() < 1e-9).map(|i| values[i]);
            summary(format!(
                "fig1b: mean cooperativity {:?} at 0 µm, {:?} at 1 µm",
                at(0.0),
                at(1.0)
            ));
        }
        "fig1e" => {
            let (spec, stats) = averaged(s, &s.atoms)?;
            write_spectrum(sink(Some(&file("spectrum")))?, &spec, format)?;
            write_spectrum(sink(Some(&file("empty_cavity")))?, &empty_spectrum(s)?, format)?;
            let data = synthetic_data(s)?;
            write_table(
                sink(Some(&dir.join("synthetic_data.csv")))?,
                &["probe_mhz", "reflectivity", "stderr"],
                data.probe.iter().zip(&data.values).enumerate().map(|(i, (p, v))| {
                    let e = data.stderr.as_ref().map(|e| e[i].to_string()).unwrap_or_default();
                    vec![p.to_string(), v.to_string(), e]
                }),
            )?;
            let report = run_fit(s, data)?;
            write_fit_report(Some(&json("fit")), &report, Format::Json)?;
            let (det, hist) = detection_report(&s.count_model())?;
            output::write_histograms(sink(Some(&file("count_histograms")))?, &hist, format)?;
            write_json(sink(Some(&json("detection")))?, &det)?;
            summary(format!(
                "fig1e: scenario mean cooperativity {:.2} (std {:.2}); fitted {:.2} (std {:.2}); detection overlap {:.3}%",
                stats[0].mean,
                stats[0].std,
                report.cooperativity[0].mean,
                report.cooperativity[0].std,
                100.0 * det.overlap_normal
            ));
        }
        "fig2c" => {
            let (single, stats) = averaged(s, &s.atoms[..1])?;
            let (both, _) = averaged(s, &s.atoms)?;
            write_spectrum(sink(Some(&file("single_atom")))?, &single, format)?;
            write_spectrum(sink(Some(&file("two_atoms")))?, &both, format)?;
            // widths of the strongest line alone on a grid wide enough to hold
            // the collectively broadened peak
            let strongest: Vec<AtomScenario> = s.atoms.iter().map(|a| strongest_only(a, s.cavity.kappa())).collect();
            let wide = Scenario {
                grid: linspace(-1500.0, 1500.0, 1201),
                ..s.clone()
            };
            let wide_empty = empty_spectrum(&wide)?;
            let width = |n: usize| -> Result<Option<LineFeature>, CliError> {
                let (sp, _) = averaged(&wide, &strongest[..n])?;
                Ok(feature(&sp, Some(&wide_empty), Polarity::Peak))
            };
            let (f1, f2) = (width(1)?, width(2)?);
            #[derive(Serialize)]
            struct Fig2c {
                mean_cooperativity: f64,
                single_atom_fwhm_mhz: Option<f64>,
                two_atom_fwhm_mhz: Option<f64>,
                fwhm_ratio: Option<f64>,
            }
            let out = Fig2c {
                mean_cooperativity: stats[0].mean,
                single_atom_fwhm_mhz: f1.map(|f| f.fwhm),
                two_atom_fwhm_mhz: f2.map(|f| f.fwhm),
                fwhm_ratio: f1.zip(f2).map(|(a, b)| b.fwhm / a.fwhm),
            };
            write_json(sink(Some(&json("summary")))?, &out)?;
            summary(format!(
                "fig2c: two-atom / single-atom width ratio {:?}",
                out.fwhm_ratio
            ));
        }
        "fig3a" => {
            let (avg, stats) = averaged(s, &s.atoms[..1])?;
            // same lines with every coupling scaled to the mean cooperativity
            let atom = &s.atoms[0];
            let kappa = s.cavity.kappa();
            let c0 = atom.lines.iter().map(|l| l.cooperativity(kappa)).fold(0.0, f64::max);
            let mut still = atom.clone();
            still.wx_nm = 0.0;
            still.wz_nm = 0.0;
            let factor = if c0 > 0.0 { stats[0].mean / c0 } else { 0.0 };
            still.lines = still.lines.iter().map(|l| l.scaled(factor)).collect();
            let single_valued = averaged_spectrum(
                &s.grid,
                &s.cavity,
                &[still],
                &s.geometry,
                &MonteCarlo::new(1, s.seed())?,
            )?
            .0;
            write_spectrum(sink(Some(&file("averaged")))?, &avg, format)?;
            write_spectrum(sink(Some(&file("single_valued")))?, &single_valued, format)?;
            let empty = empty_spectrum(s)?;
            #[derive(Serialize)]
            struct Fig3a {
                mean_cooperativity: f64,
                averaged_shift_mhz: Option<f64>,
                single_valued_shift_mhz: Option<f64>,
            }
            let out = Fig3a {
                mean_cooperativity: stats[0].mean,
                averaged_shift_mhz: one_feature(&avg, Some(&empty)).map(|f| f.center - atom.light_shift),
                single_valued_shift_mhz: one_feature(&single_valued, Some(&empty)).map(|f| f.center - atom.light_shift),
            };
            write_json(sink(Some(&json("summary")))?, &out)?;
            summary(format!(
                "fig3a: line shift {:?} MHz (averaged), {:?} MHz (single-valued)",
                out.averaged_shift_mhz, out.single_valued_shift_mhz
            ));
        }
        "fig3c" => {
            let (single, _) = averaged(s, &s.atoms[..1])?;
            let (both, _) = averaged(s, &s.atoms)?;
            write_spectrum(sink(Some(&file("single_atom")))?, &single, format)?;
            write_spectrum(sink(Some(&file("two_atoms")))?, &both, format)?;
            let empty = empty_spectrum(s)?;
            let reference = s.atoms[0].light_shift;
            let shift = |sp: &Spectrum| one_feature(sp, Some(&empty)).map(|f| f.center - reference);
            #[derive(Serialize)]
            struct Fig3c {
                single_atom_shift_mhz: Option<f64>,
                two_atom_shift_mhz: Option<f64>,
                shift_ratio: Option<f64>,
            }
            let (a, b) = (shift(&single), shift(&both));
            let out = Fig3c {
                single_atom_shift_mhz: a,
                two_atom_shift_mhz: b,
                shift_ratio: a.zip(b).map(|(a, b)| b / a),
            };
            write_json(sink(Some(&json("summary")))?, &out)?;
            summary(format!("fig3c: shifts {a:?} / {b:?} MHz, ratio {:?}", out.shift_ratio));
        }
        "fig4" => {
            let (coupled, control) = maps(s)?;
            write_map(sink(Some(&file("map")))?, &coupled, format)?;
            write_map(sink(Some(&file("control_map")))?, &control, format)?;
            let g = gaps(&coupled, &control);
            write_json(sink(Some(&json("gaps")))?, &g)?;
            summary(format!(
                "fig4: minimum gap {:?} MHz (coupled), {:?} MHz (control)",
                g.coupled.as_ref().map(|g| g.fitted_two_j),
                g.control.as_ref().map(|g| g.fitted_two_j)
            ));
        }
        other => {
            return Err(CliError::Input(format!(
                "unknown figure {other:?}; known: {}",
                FIGURES.join(", ")
            )))
        }
    }
    Ok(())
}

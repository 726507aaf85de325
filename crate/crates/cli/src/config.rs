//! Scenario files: JSON with unit-suffixed keys, unknown keys rejected.

use std::path::Path;

use cavqed_core::detection::CountModel;
use cavqed_core::mode::{AtomScenario, ModeGeometry, MonteCarlo};
use cavqed_core::qed::{CavityParams, Transition};
use cavqed_core::spectrum::linspace;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub cavity: CavitySection,
    pub atoms: Vec<AtomSection>,
    #[serde(default)]
    pub geometry: GeometrySection,
    pub probe: ProbeSection,
    pub monte_carlo: MonteCarloSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub map: Option<MapSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modescan: Option<ModeScanSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detection: Option<DetectionSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit: Option<FitSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleSection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CavitySection {
    pub kappa_wg_mhz: f64,
    pub kappa_sc_mhz: f64,
    #[serde(default)]
    pub delta_c_mhz: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomSection {
    pub lines: Vec<LineSection>,
    #[serde(default)]
    pub light_shift_mhz: f64,
    #[serde(default)]
    pub motion: MotionSection,
    #[serde(default)]
    pub x_offset_nm: f64,
    #[serde(default)]
    pub light_shift_jitter_mhz: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LineSection {
    pub delta_mhz: f64,
    pub gamma_mhz: f64,
    pub c0: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MotionSection {
    pub wx_nm: f64,
    pub wz_nm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometrySection {
    pub a_nm: f64,
    pub z0_nm: f64,
    #[serde(default)]
    pub envelope_um: Option<f64>,
}

impl Default for GeometrySection {
    fn default() -> Self {
        let g = ModeGeometry::default();
        Self {
            a_nm: g.a_nm,
            z0_nm: g.z0_nm,
            envelope_um: g.envelope_um,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeSection {
    pub start_mhz: f64,
    pub stop_mhz: f64,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonteCarloSection {
    pub samples: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapSection {
    pub delta_ab_start_mhz: f64,
    pub delta_ab_stop_mhz: f64,
    pub delta_ab_points: usize,
    #[serde(default)]
    pub common_offset_mhz: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeScanSection {
    pub start_um: f64,
    pub stop_um: f64,
    pub points: usize,
    pub c_peak: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectionSection {
    pub rate_with_atom_per_us: f64,
    pub rate_without_atom_per_us: f64,
    pub window_us: f64,
    pub trials: usize,
}

impl Default for DetectionSection {
    fn default() -> Self {
        let m = CountModel::default();
        Self {
            rate_with_atom_per_us: m.rate_with_atom,
            rate_without_atom_per_us: m.rate_without_atom,
            window_us: m.window_us,
            trials: m.trials,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FloatParam {
    C0,
    G0,
    Wx,
    Wz,
    CavityOffset,
    Amplitude,
    Offset,
    LineHeights,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitSection {
    pub float: Vec<FloatParam>,
    #[serde(default)]
    pub bootstrap_replicates: usize,
    /// Standard deviation of the noise added when no data file is given.
    #[serde(default = "default_noise")]
    pub synthetic_noise: f64,
    /// Starting values are the scenario values times this factor.
    #[serde(default = "one")]
    pub start_factor: f64,
    #[serde(default)]
    pub weight_by_stderr: bool,
}

fn default_noise() -> f64 {
    0.01
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleSection {
    pub fock_cutoff: usize,
    pub drive: f64,
}

impl Default for OracleSection {
    fn default() -> Self {
        Self {
            fock_cutoff: 3,
            drive: 0.02,
        }
    }
}

/// Domain objects built from a validated config.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub config: ScenarioConfig,
    pub cavity: CavityParams,
    pub atoms: Vec<AtomScenario>,
    pub geometry: ModeGeometry,
    pub grid: Vec<f64>,
    pub monte_carlo: MonteCarlo,
}

pub const BUNDLED: [(&str, &str); 7] = [
    ("fig1b", include_str!("../scenarios/fig1b.json")),
    ("fig1e", include_str!("../scenarios/fig1e.json")),
    ("fig2c", include_str!("../scenarios/fig2c.json")),
    ("fig3a", include_str!("../scenarios/fig3a.json")),
    ("fig3c", include_str!("../scenarios/fig3c.json")),
    ("fig4", include_str!("../scenarios/fig4.json")),
    ("single_line", include_str!("../scenarios/single_line.json")),
];

pub fn bundled(name: &str) -> Option<&'static str> {
    BUNDLED.iter().find(|(n, _)| *n == name).map(|(_, s)| *s)
}

pub fn parse(text: &str, origin: &str) -> Result<ScenarioConfig, CliError> {
    serde_json::from_str(text).map_err(|e| CliError::Config(format!("{origin}:{}:{}: {e}", e.line(), e.column())))
}

pub fn load(path: &Path) -> Result<ScenarioConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    parse(&text, &path.display().to_string())
}

fn invalid(what: &str, err: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{what}: {err}"))
}

impl ScenarioConfig {
    pub fn build(self) -> Result<Scenario, CliError> {
        let c = &self.cavity;
        let cavity =
            CavityParams::new(c.kappa_wg_mhz, c.kappa_sc_mhz, c.delta_c_mhz).map_err(|e| invalid("cavity", e))?;
        let geometry = ModeGeometry::new(self.geometry.a_nm, self.geometry.z0_nm, self.geometry.envelope_um)
            .map_err(|e| invalid("geometry", e))?;
        let atoms = self
            .atoms
            .iter()
            .enumerate()
            .map(|(i, a)| {
                let lines = a
                    .lines
                    .iter()
                    .enumerate()
                    .map(|(j, l)| {
                        Transition::with_cooperativity(l.delta_mhz, l.gamma_mhz, l.c0)
                            .map_err(|e| invalid(&format!("atoms[{i}].lines[{j}]"), e))
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                let mut atom = AtomScenario::new(lines, a.light_shift_mhz, a.motion.wx_nm, a.motion.wz_nm)
                    .map_err(|e| invalid(&format!("atoms[{i}]"), e))?;
                if !(a.light_shift_jitter_mhz.is_finite() && a.light_shift_jitter_mhz >= 0.0) {
                    return Err(invalid(&format!("atoms[{i}]"), "light_shift_jitter_mhz must be >= 0"));
                }
                atom.x_offset_nm = a.x_offset_nm;
                atom.light_shift_jitter = a.light_shift_jitter_mhz;
                Ok(atom)
            })
            .collect::<Result<Vec<_>, _>>()?;
        let p = &self.probe;
        if p.points < 2 || !(p.start_mhz.is_finite() && p.stop_mhz.is_finite() && p.start_mhz < p.stop_mhz) {
            return Err(invalid("probe", "need start_mhz < stop_mhz and at least 2 points"));
        }
        let grid = linspace(p.start_mhz, p.stop_mhz, p.points);
        let monte_carlo =
            MonteCarlo::new(self.monte_carlo.samples, self.monte_carlo.seed).map_err(|e| invalid("monte_carlo", e))?;
        if let Some(m) = &self.map {
            if m.delta_ab_points == 0
                || !(m.delta_ab_start_mhz.is_finite() && m.delta_ab_start_mhz <= m.delta_ab_stop_mhz)
            {
                return Err(invalid(
                    "map",
                    "need delta_ab_start_mhz <= delta_ab_stop_mhz and at least 1 point",
                ));
            }
        }
        if let Some(m) = &self.modescan {
            if m.points == 0
                || !(m.start_um.is_finite() && m.start_um <= m.stop_um && m.c_peak.is_finite() && m.c_peak >= 0.0)
            {
                return Err(invalid(
                    "modescan",
                    "need start_um <= stop_um, points >= 1, c_peak >= 0",
                ));
            }
        }
        if let Some(f) = &self.fit {
            if f.float.is_empty() {
                return Err(invalid("fit", "float must list at least one parameter"));
            }
            if !(f.synthetic_noise >= 0.0 && f.start_factor > 0.0) {
                return Err(invalid("fit", "synthetic_noise must be >= 0 and start_factor > 0"));
            }
        }
        Ok(Scenario {
            config: self,
            cavity,
            atoms,
            geometry,
            grid,
            monte_carlo,
        })
    }
}

impl Scenario {
    pub fn seed(&self) -> u64 {
        self.monte_carlo.seed
    }

    pub fn count_model(&self) -> CountModel {
        let d = self.config.detection.clone().unwrap_or_default();
        CountModel {
            rate_with_atom: d.rate_with_atom_per_us,
            rate_without_atom: d.rate_without_atom_per_us,
            window_us: d.window_us,
            trials: d.trials,
            seed: self.seed(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_scenarios_validate() {
        for (name, text) in BUNDLED {
            parse(text, name)
                .unwrap()
                .build()
                .unwrap_or_else(|e| panic!("{name}: {e}"));
        }
    }

    #[test]
    fn unknown_keys_rejected_with_position() {
        let text = bundled("single_line").unwrap().replacen("\"probe\"", "\"probes\"", 1);
        match parse(&text, "x.json") {
            Err(CliError::Config(msg)) => {
                assert!(msg.starts_with("x.json:"), "{msg}");
                assert!(msg.contains("probes"), "{msg}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn invalid_values_are_config_errors() {
        let text = bundled("single_line")
            .unwrap()
            .replace("\"gamma_mhz\": 6.0", "\"gamma_mhz\": -1.0");
        assert!(matches!(parse(&text, "x").unwrap().build(), Err(CliError::Config(_))));
    }
}

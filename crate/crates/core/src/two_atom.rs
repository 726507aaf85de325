//! Two atoms exchanging virtual cavity photons in the dispersive regime.
//!
//! The closed-form picture is the 2×2 effective Hamiltonian on
//! `{|eg,0⟩, |ge,0⟩}`,
//!
//! ```text
//! [[δ_A + J, J], [J, δ_B + J]]
//! ```
//!
//! whose symmetric (bright) state shifts by `2J` and whose antisymmetric
//! (dark) state does not shift at `δ_A = δ_B`. The full anti-crossing maps
//! are computed from the reflection model instead.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, usage, Result};
use crate::features::{extract_line_features_with, FeatureOptions, Polarity};
use crate::mode::{averaged_spectrum, AtomScenario, ModeGeometry, MonteCarlo};
use crate::qed::CavityParams;
use crate::spectrum::{check_grid, Spectrum};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DressedPair {
    /// Ascending eigenfrequencies (MHz).
    pub frequencies: [f64; 2],
    /// Normalised eigenvectors over `{|eg,0⟩, |ge,0⟩}`, matching `frequencies`.
    pub vectors: [[f64; 2]; 2],
    /// Cavity-coupling weight `|v_A + v_B|²/2` of each eigenvector.
    pub weights: [f64; 2],
}

impl DressedPair {
    pub fn splitting(&self) -> f64 {
        self.frequencies[1] - self.frequencies[0]
    }
}

/// Eigen-decomposition of the effective two-atom Hamiltonian with exchange
/// coupling `J` (each atom also carries its own shift `J`).
pub fn dressed_frequencies(delta_a: f64, delta_b: f64, j: f64) -> Result<DressedPair> {
    if !(j.is_finite() && j >= 0.0) {
        return Err(domain(format!("exchange coupling must be >= 0, got {j}")));
    }
    let mean = 0.5 * (delta_a + delta_b) + j;
    let half = 0.5 * (delta_a - delta_b);
    let root = (j * j + half * half).sqrt();
    let frequencies = [mean - root, mean + root];
    // mixing angle: tan 2θ = J / half
    let theta = 0.5 * j.atan2(half);
    let (s, c) = theta.sin_cos();
    // upper eigenvector (c, s), lower (−s, c)
    let vectors = [[-s, c], [c, s]];
    let weights = vectors.map(|v| 0.5 * (v[0] + v[1]).powi(2));
    Ok(DressedPair {
        frequencies,
        vectors,
        weights,
    })
}

/// `√((2J)² + δ_AB²)`
pub fn anticrossing_gap(two_j: f64, delta_ab: f64) -> f64 {
    two_j.hypot(delta_ab)
}

/// Reflectivity over probe detuning (columns) and relative atom detuning
/// (rows).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReflectivityMap {
    pub probe: Vec<f64>,
    pub delta_ab: Vec<f64>,
    pub rows: Vec<Vec<f64>>,
}

impl ReflectivityMap {
    pub fn row_spectrum(&self, i: usize) -> Result<Spectrum> {
        Spectrum::new(self.probe.clone(), self.rows[i].clone(), None)
    }
}

/// Atoms A and B with light shifts `offset ± δ_AB/2` added to their own.
fn detuned_pair(a: &AtomScenario, b: &AtomScenario, delta_ab: f64, offset: f64) -> [AtomScenario; 2] {
    let mut a = a.clone();
    let mut b = b.clone();
    a.light_shift += offset + 0.5 * delta_ab;
    b.light_shift += offset - 0.5 * delta_ab;
    [a, b]
}

fn check_map_inputs(probe: &[f64], delta_ab: &[f64]) -> Result<()> {
    check_grid(probe)?;
    if delta_ab.is_empty() || delta_ab.iter().any(|d| !d.is_finite()) {
        return Err(usage("relative detuning grid must be non-empty and finite"));
    }
    Ok(())
}

/// Both atoms coupled at once. Each row is a Monte Carlo averaged spectrum.
pub fn anticrossing_map(
    probe: &[f64],
    delta_ab: &[f64],
    cavity: &CavityParams,
    atoms: [&AtomScenario; 2],
    geom: &ModeGeometry,
    mc: &MonteCarlo,
    common_offset: f64,
) -> Result<ReflectivityMap> {
    check_map_inputs(probe, delta_ab)?;
    let rows = delta_ab
        .par_iter()
        .map(|&d| {
            let pair = detuned_pair(atoms[0], atoms[1], d, common_offset);
            averaged_spectrum(probe, cavity, &pair, geom, mc).map(|(s, _)| s.values().to_vec())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ReflectivityMap {
        probe: probe.to_vec(),
        delta_ab: delta_ab.to_vec(),
        rows,
    })
}

/// Control map without atom-atom interaction: the average of the two
/// single-atom spectra at the same light shifts.
pub fn crossing_control_map(
    probe: &[f64],
    delta_ab: &[f64],
    cavity: &CavityParams,
    atoms: [&AtomScenario; 2],
    geom: &ModeGeometry,
    mc: &MonteCarlo,
    common_offset: f64,
) -> Result<ReflectivityMap> {
    check_map_inputs(probe, delta_ab)?;
    let rows = delta_ab
        .par_iter()
        .map(|&d| {
            let [a, b] = detuned_pair(atoms[0], atoms[1], d, common_offset);
            let (sa, _) = averaged_spectrum(probe, cavity, std::slice::from_ref(&a), geom, mc)?;
            let (sb, _) = averaged_spectrum(probe, cavity, std::slice::from_ref(&b), geom, mc)?;
            Ok(sa
                .values()
                .iter()
                .zip(sb.values())
                .map(|(x, y)| 0.5 * (x + y))
                .collect())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ReflectivityMap {
        probe: probe.to_vec(),
        delta_ab: delta_ab.to_vec(),
        rows,
    })
}

/// Line splitting read off a map, row by row, and the best fit of
/// `√((2J)² + δ_AB²)` to it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapAnalysis {
    /// `(δ_AB, measured gap)` for rows with two resolved lines.
    pub gaps: Vec<(f64, f64)>,
    /// Rows where fewer than two separate lines were found.
    pub unresolved: Vec<f64>,
    /// Fitted `2J`, the minimum of the fitted splitting curve.
    pub fitted_two_j: f64,
    pub r_squared: f64,
    /// Smallest directly measured gap.
    pub min_measured_gap: f64,
}

/// Extracts two dips per row and fits `gap² = (2J)² + δ_AB²` by linear least
/// squares in `(2J)²`, clamped at zero.
pub fn analyze_gaps(map: &ReflectivityMap, min_prominence: f64) -> Result<GapAnalysis> {
    let opts = FeatureOptions {
        polarity: Polarity::Dip,
        min_prominence,
        baseline: None,
    };
    let mut gaps = Vec::new();
    let mut unresolved = Vec::new();
    for (i, &d) in map.delta_ab.iter().enumerate() {
        let spec = map.row_spectrum(i)?;
        match extract_line_features_with(&spec, 2, &opts) {
            Ok(f) if f.len() == 2 => gaps.push((d, f[1].center - f[0].center)),
            _ => unresolved.push(d),
        }
    }
    if gaps.is_empty() {
        return Err(usage("no row of the map shows two resolved lines"));
    }
    let n = gaps.len() as f64;
    let two_j_sq = (gaps.iter().map(|(d, g)| g * g - d * d).sum::<f64>() / n).max(0.0);
    let fitted_two_j = two_j_sq.sqrt();
    let mean_gap = gaps.iter().map(|(_, g)| g).sum::<f64>() / n;
    let ss_tot: f64 = gaps.iter().map(|(_, g)| (g - mean_gap).powi(2)).sum();
    let ss_res: f64 = gaps
        .iter()
        .map(|&(d, g)| (g - anticrossing_gap(fitted_two_j, d)).powi(2))
        .sum();
    let r_squared = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 0.0 };
    let min_measured_gap = gaps.iter().map(|(_, g)| *g).fold(f64::INFINITY, f64::min);
    Ok(GapAnalysis {
        gaps,
        unresolved,
        fitted_two_j,
        r_squared,
        min_measured_gap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qed::{Transition, GAMMA_D2_MHZ};
    use crate::spectrum::linspace;
    use proptest::prelude::*;

    #[test]
    fn resonant_pair_is_bright_and_dark() {
        let p = dressed_frequencies(0.0, 0.0, 23.0).unwrap();
        assert!((p.frequencies[0] - 0.0).abs() < 1e-12);
        assert!((p.frequencies[1] - 46.0).abs() < 1e-12);
        assert!(p.weights[0].abs() < 1e-15, "dark weight {}", p.weights[0]);
        assert!((p.weights[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn uncoupled_pair_crosses() {
        let p = dressed_frequencies(30.0, -20.0, 0.0).unwrap();
        assert_eq!(p.frequencies, [-20.0, 30.0]);
        assert!((p.weights[0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn splitting_value() {
        let p = dressed_frequencies(50.0, -50.0, 25.0).unwrap();
        assert!((p.splitting() - 111.803).abs() < 1e-3);
        assert!((anticrossing_gap(50.0, 100.0) - 111.803).abs() < 1e-3);
        assert!(dressed_frequencies(0.0, 0.0, -1.0).is_err());
    }

    proptest! {
        #[test]
        fn eigenvectors_orthonormal(da in -200.0..200.0f64, db in -200.0..200.0f64, j in 0.0..100.0f64) {
            let p = dressed_frequencies(da, db, j).unwrap();
            let [u, v] = p.vectors;
            prop_assert!((u[0] * u[0] + u[1] * u[1] - 1.0).abs() < 1e-12);
            prop_assert!((v[0] * v[0] + v[1] * v[1] - 1.0).abs() < 1e-12);
            prop_assert!((u[0] * v[0] + u[1] * v[1]).abs() < 1e-12);
            // eigen-equation
            for (k, w) in [u, v].iter().enumerate() {
                let hw0 = (da + j) * w[0] + j * w[1];
                let hw1 = j * w[0] + (db + j) * w[1];
                prop_assert!((hw0 - p.frequencies[k] * w[0]).abs() < 1e-9);
                prop_assert!((hw1 - p.frequencies[k] * w[1]).abs() < 1e-9);
            }
            prop_assert!(p.splitting() >= 2.0 * j - 1e-9);
            prop_assert!(p.splitting() >= (da - db).abs() - 1e-9);
        }
    }

    fn still_atom(c: f64) -> AtomScenario {
        AtomScenario::new(
            vec![Transition::with_cooperativity(0.0, GAMMA_D2_MHZ, c).unwrap()],
            0.0,
            0.0,
            0.0,
        )
        .unwrap()
    }

    #[test]
    fn map_is_mirror_symmetric() {
        let cav = CavityParams::default().with_delta_c(-2.0 * 3630.0);
        let a = still_atom(31.0);
        let probe = linspace(-100.0, 146.5, 494);
        let mc = MonteCarlo::new(1, 0).unwrap();
        let geom = ModeGeometry::default();
        let m = anticrossing_map(&probe, &[-60.0, 60.0], &cav, [&a, &a], &geom, &mc, 0.0).unwrap();
        // exchanging the sign of δ_AB swaps identical atoms: rows coincide
        for (x, y) in m.rows[0].iter().zip(&m.rows[1]) {
            assert!((x - y).abs() < 1e-14);
        }
    }
}

//! Independent routes to the reflection amplitude, used to check the closed
//! form: an exact frequency-domain solve of the linearised equations of
//! motion, and the steady state of the full master equation.

mod gmres;
mod lindblad;

pub use lindblad::{
    lindblad_steady_state, lindblad_steady_state_with, oracle_reflectivity, DecayModel, SolveMethod, SolverOptions,
    SteadyState, SystemSpec,
};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::qed::{CavityParams, EmitterSet};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Solves the linearised steady-state equations for `⟨a⟩` and every `⟨σ⟩`
/// in the frame rotating at the probe frequency, with unit input field:
///
/// ```text
/// (κ/2 − iδ_c)·a + i Σ g_j σ_j = √κ_wg
/// i g_j·a + (γ_j/2 − iδ_j)·σ_j = 0
/// ```
///
/// and returns `r = √κ_wg·a − 1`.
pub fn linear_response_solve(probe: f64, cavity: &CavityParams, emitters: &EmitterSet) -> Result<Complex64> {
    let kappa = cavity.kappa();
    let lines: Vec<_> = emitters.lines().collect();
    let n = 1 + lines.len();
    let mut m = DMatrix::<Complex64>::zeros(n, n);
    let mut rhs = DVector::<Complex64>::zeros(n);
    m[(0, 0)] = Complex64::new(0.5 * kappa, -(probe - cavity.delta_c()));
    rhs[0] = Complex64::new(cavity.kappa_wg().sqrt(), 0.0);
    for (j, (_, line, freq)) in lines.iter().enumerate() {
        let g = line.g_squared(kappa).sqrt();
        m[(0, j + 1)] = I * g;
        m[(j + 1, 0)] = I * g;
        m[(j + 1, j + 1)] = Complex64::new(0.5 * line.gamma(), -(probe - freq));
    }
    let sol = m
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Singular("linear response system".into()))?;
    Ok(cavity.kappa_wg().sqrt() * sol[0] - 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qed::{reflectivity_amplitude, Atom, Coupling, Transition};
    use proptest::prelude::*;

    #[test]
    fn empty_cavity_matches_closed_form() {
        let cav = CavityParams::default();
        let r = linear_response_solve(0.0, &cav, &EmitterSet::empty()).unwrap();
        assert!((r.re - (2.0 * 860.0 / 3630.0 - 1.0)).abs() < 1e-14);
        assert!(r.im.abs() < 1e-14);
    }

    #[test]
    fn two_atoms_equal_one_with_summed_coupling() {
        let cav = CavityParams::default().with_delta_c(-300.0);
        let line = |g: f64| Transition::new(40.0, 6.0, Coupling::Rabi(g)).unwrap();
        let two = EmitterSet::new(vec![
            Atom::new(0.0, vec![line(300.0)]),
            Atom::new(0.0, vec![line(400.0)]),
        ]);
        let one = EmitterSet::single(Atom::new(0.0, vec![line(500.0)]));
        for p in [-500.0, 0.0, 35.0, 40.0, 200.0] {
            let a = linear_response_solve(p, &cav, &two).unwrap();
            let b = linear_response_solve(p, &cav, &one).unwrap();
            assert!((a - b).norm() < 1e-12);
        }
    }

    proptest! {
        #[test]
        fn matches_closed_form(
            kwg in 0.0..5000.0f64, ksc in 1.0..5000.0f64, dc in -8000.0..8000.0f64,
            atoms in prop::collection::vec(
                (-200.0..200.0f64, prop::collection::vec((-1000.0..1000.0f64, 0.5..30.0f64, 0.0..500.0f64), 0..4)),
                0..3),
            probe in -3000.0..3000.0f64,
        ) {
            let cav = CavityParams::new(kwg, ksc, dc).unwrap();
            let em = EmitterSet::new(atoms.into_iter().map(|(ls, lines)| {
                Atom::new(ls, lines.into_iter()
                    .map(|(d, g, c)| Transition::with_cooperativity(d, g, c).unwrap())
                    .collect())
            }).collect());
            let a = linear_response_solve(probe, &cav, &em).unwrap();
            let b = reflectivity_amplitude(probe, &cav, &em);
            prop_assert!((a - b).norm() <= 1e-12 * b.norm().max(1e-3), "{} vs {}", a, b);
        }
    }
}

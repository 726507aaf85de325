//! Closed-form cavity QED relations and the weak-drive reflection amplitude.
//!
//! Every rate and detuning is an ordinary frequency in MHz with the `2π`
//! factored out. The relations used here are homogeneous in the rates, so
//! the convention never leaks into a result.
//!
//! Probe detuning zero is the bare `F=2 → F'=3` line.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, usage, Result};
use crate::spectrum::{check_grid, Spectrum};

/// Cavity decay rate into the collection waveguide (MHz).
pub const KAPPA_WG_MHZ: f64 = 860.0;
/// Cavity decay rate into free space and scattering (MHz).
pub const KAPPA_SC_MHZ: f64 = 2770.0;
/// Free-space linewidth of the Rb D2 excited states (MHz).
pub const GAMMA_D2_MHZ: f64 = 6.0;
/// Excited-state line offsets of `F'=1, 2, 3` from the `F'=3` line (MHz).
pub const HYPERFINE_LINES_MHZ: [f64; 3] = [-424.0, -267.0, 0.0];

/// One-sided cavity: decay into the waveguide, decay elsewhere, and the
/// cavity detuning from the probe reference line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CavityParams {
    kappa_wg: f64,
    kappa_sc: f64,
    delta_c: f64,
}

impl CavityParams {
    pub fn new(kappa_wg: f64, kappa_sc: f64, delta_c: f64) -> Result<Self> {
        if !(kappa_wg.is_finite() && kappa_sc.is_finite() && delta_c.is_finite()) {
            return Err(domain("cavity parameters must be finite"));
        }
        if kappa_wg < 0.0 || kappa_sc < 0.0 {
            return Err(domain("cavity decay rates must be non-negative"));
        }
        if kappa_wg + kappa_sc <= 0.0 {
            return Err(domain("total cavity decay rate must be positive"));
        }
        Ok(Self {
            kappa_wg,
            kappa_sc,
            delta_c,
        })
    }

    pub fn kappa_wg(&self) -> f64 {
        self.kappa_wg
    }

    pub fn kappa_sc(&self) -> f64 {
        self.kappa_sc
    }

    pub fn delta_c(&self) -> f64 {
        self.delta_c
    }

    /// Total decay `κ = κ_wg + κ_sc`.
    pub fn kappa(&self) -> f64 {
        self.kappa_wg + self.kappa_sc
    }

    pub fn with_delta_c(self, delta_c: f64) -> Self {
        Self { delta_c, ..self }
    }
}

impl Default for CavityParams {
    fn default() -> Self {
        Self {
            kappa_wg: KAPPA_WG_MHZ,
            kappa_sc: KAPPA_SC_MHZ,
            delta_c: 0.0,
        }
    }
}

/// Coupling of one line to the cavity, given either way round.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Coupling {
    /// Single-photon Rabi frequency `g` (MHz).
    Rabi(f64),
    /// Cooperativity `C = 4g²/(κγ)`.
    Cooperativity(f64),
}

/// A ground → excited line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    delta: f64,
    gamma: f64,
    coupling: Coupling,
}

impl Transition {
    pub fn new(delta: f64, gamma: f64, coupling: Coupling) -> Result<Self> {
        if !delta.is_finite() {
            return Err(domain("line detuning must be finite"));
        }
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(domain(format!("linewidth must be positive, got {gamma}")));
        }
        match coupling {
            Coupling::Rabi(g) if !(g.is_finite() && g >= 0.0) => {
                return Err(domain(format!("Rabi frequency must be >= 0, got {g}")))
            }
            Coupling::Cooperativity(c) if !(c.is_finite() && c >= 0.0) => {
                return Err(domain(format!("cooperativity must be >= 0, got {c}")))
            }
            _ => {}
        }
        Ok(Self { delta, gamma, coupling })
    }

    pub fn with_cooperativity(delta: f64, gamma: f64, c: f64) -> Result<Self> {
        Self::new(delta, gamma, Coupling::Cooperativity(c))
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn coupling(&self) -> Coupling {
        self.coupling
    }

    /// `g²` in MHz² against a cavity of total decay `kappa`.
    pub fn g_squared(&self, kappa: f64) -> f64 {
        match self.coupling {
            Coupling::Rabi(g) => g * g,
            Coupling::Cooperativity(c) => c * kappa * self.gamma / 4.0,
        }
    }

    pub fn cooperativity(&self, kappa: f64) -> f64 {
        match self.coupling {
            Coupling::Rabi(g) => 4.0 * g * g / (kappa * self.gamma),
            Coupling::Cooperativity(c) => c,
        }
    }

    pub fn rabi(&self, kappa: f64) -> f64 {
        match self.coupling {
            Coupling::Rabi(g) => g,
            Coupling::Cooperativity(c) => (c * kappa * self.gamma).sqrt() / 2.0,
        }
    }

    pub fn with_delta(self, delta: f64) -> Self {
        Self { delta, ..self }
    }

    /// Same line with its coupling scaled in cooperativity (`g²`) by `factor`.
    pub fn scaled(self, factor: f64) -> Self {
        let coupling = match self.coupling {
            Coupling::Rabi(g) => Coupling::Rabi(g * factor.sqrt()),
            Coupling::Cooperativity(c) => Coupling::Cooperativity(c * factor),
        };
        Self { coupling, ..self }
    }
}

/// One atom: its lines plus a light shift added to every line detuning.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Atom {
    pub light_shift: f64,
    pub lines: Vec<Transition>,
}

impl Atom {
    pub fn new(light_shift: f64, lines: Vec<Transition>) -> Self {
        Self { light_shift, lines }
    }
}

/// All emitters coupled to the cavity. Empty means an empty cavity.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct EmitterSet {
    pub atoms: Vec<Atom>,
}

impl EmitterSet {
    pub fn new(atoms: Vec<Atom>) -> Self {
        Self { atoms }
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn single(atom: Atom) -> Self {
        Self { atoms: vec![atom] }
    }

    /// `(atom index, line, line frequency including the light shift)`.
    pub fn lines(&self) -> impl Iterator<Item = (usize, &Transition, f64)> {
        self.atoms
            .iter()
            .enumerate()
            .flat_map(|(k, atom)| atom.lines.iter().map(move |t| (k, t, t.delta + atom.light_shift)))
    }

    pub fn line_count(&self) -> usize {
        self.atoms.iter().map(|a| a.lines.len()).sum()
    }
}

/// `C = 4g²/(κγ)`.
pub fn cooperativity(g: f64, kappa: f64, gamma: f64) -> Result<f64> {
    check_rates(kappa, gamma)?;
    if !(g.is_finite() && g >= 0.0) {
        return Err(domain(format!("Rabi frequency must be >= 0, got {g}")));
    }
    Ok(4.0 * g * g / (kappa * gamma))
}

/// Inverse of [`cooperativity`]: `g = sqrt(Cκγ)/2`.
pub fn rabi_from_cooperativity(c: f64, kappa: f64, gamma: f64) -> Result<f64> {
    check_rates(kappa, gamma)?;
    if !(c.is_finite() && c >= 0.0) {
        return Err(domain(format!("cooperativity must be >= 0, got {c}")));
    }
    Ok((c * kappa * gamma).sqrt() / 2.0)
}

fn check_rates(kappa: f64, gamma: f64) -> Result<()> {
    if !(kappa.is_finite() && kappa > 0.0) {
        return Err(domain(format!("kappa must be positive, got {kappa}")));
    }
    if !(gamma.is_finite() && gamma > 0.0) {
        return Err(domain(format!("gamma must be positive, got {gamma}")));
    }
    Ok(())
}

/// Reflection amplitude from precomputed `(g², line frequency, γ)` terms.
///
/// `r = κ_wg / (κ/2 − iδ_c + Σ g²/(γ/2 − iδ)) − 1`
#[inline]
pub(crate) fn reflectivity_from_terms<I>(probe: f64, cavity: &CavityParams, terms: I) -> Complex64
where
    I: IntoIterator<Item = (f64, f64, f64)>,
{
    let mut denom = Complex64::new(0.5 * cavity.kappa(), -(probe - cavity.delta_c));
    for (g2, line, gamma) in terms {
        denom += g2 / Complex64::new(0.5 * gamma, -(probe - line));
    }
    cavity.kappa_wg / denom - 1.0
}

/// Weak-drive reflection amplitude `r(ω)` for any number of multilevel
/// emitters sharing the cavity mode.
pub fn reflectivity_amplitude(probe: f64, cavity: &CavityParams, emitters: &EmitterSet) -> Complex64 {
    let kappa = cavity.kappa();
    reflectivity_from_terms(
        probe,
        cavity,
        emitters.lines().map(|(_, t, freq)| (t.g_squared(kappa), freq, t.gamma)),
    )
}

/// `|r|²` on a grid.
pub fn spectrum(grid: &[f64], cavity: &CavityParams, emitters: &EmitterSet) -> Result<Spectrum> {
    check_grid(grid)?;
    let values = grid
        .par_iter()
        .map(|&p| reflectivity_amplitude(p, cavity, emitters).norm_sqr())
        .collect();
    Spectrum::new(grid.to_vec(), values, None)
}

/// Purcell-broadened linewidth `γ(1 + C/(1 + 4Δ²/κ²))`.
pub fn purcell_linewidth(c: f64, gamma: f64, delta: f64, kappa: f64) -> Result<f64> {
    check_rates(kappa, gamma)?;
    if !(c.is_finite() && c >= 0.0) {
        return Err(domain(format!("cooperativity must be >= 0, got {c}")));
    }
    let suppression = 1.0 + 4.0 * delta * delta / (kappa * kappa);
    Ok(gamma * (1.0 + c / suppression))
}

/// Dispersive frequency shift `J = g²/Δ = Cκγ/(4Δ)`.
pub fn dispersive_shift(c: f64, kappa: f64, gamma: f64, delta: f64) -> Result<f64> {
    check_rates(kappa, gamma)?;
    if delta == 0.0 || !delta.is_finite() {
        return Err(domain("dispersive shift is undefined on cavity resonance"));
    }
    if !(c.is_finite() && c >= 0.0) {
        return Err(usage(format!("cooperativity must be >= 0, got {c}")));
    }
    Ok(c * kappa * gamma / (4.0 * delta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::linspace;
    use proptest::prelude::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
    }

    fn one_line(c: f64) -> EmitterSet {
        EmitterSet::single(Atom::new(
            0.0,
            vec![Transition::with_cooperativity(0.0, GAMMA_D2_MHZ, c).unwrap()],
        ))
    }

    #[test]
    fn cooperativity_values() {
        let c = cooperativity(620.0, 3630.0, 6.0).unwrap();
        assert!((c - 70.6).abs() < 0.05, "{c}");
        assert_eq!(cooperativity(0.0, 3630.0, 6.0).unwrap(), 0.0);
        let g = rabi_from_cooperativity(128.0, 3630.0, 6.0).unwrap();
        assert!((g - 834.9).abs() < 0.1, "{g}");
        assert!((2.0 * g - 1670.0).abs() < 1.0);
    }

    #[test]
    fn cooperativity_domain_errors() {
        assert!(cooperativity(1.0, 0.0, 6.0).is_err());
        assert!(cooperativity(1.0, 3630.0, -6.0).is_err());
        assert!(rabi_from_cooperativity(1.0, -1.0, 6.0).is_err());
        assert!(dispersive_shift(31.0, 3630.0, 6.0, 0.0).is_err());
    }

    #[test]
    fn cavity_validation() {
        assert!(CavityParams::new(0.0, 0.0, 0.0).is_err());
        assert!(CavityParams::new(-1.0, 10.0, 0.0).is_err());
        assert!(CavityParams::new(0.0, 10.0, 0.0).is_ok());
        assert_eq!(CavityParams::default().kappa(), 3630.0);
    }

    #[test]
    fn transition_validation() {
        assert!(Transition::with_cooperativity(0.0, 0.0, 1.0).is_err());
        assert!(Transition::with_cooperativity(0.0, 6.0, -1.0).is_err());
        assert!(Transition::new(0.0, 6.0, Coupling::Rabi(-1.0)).is_err());
    }

    #[test]
    fn empty_cavity_on_resonance() {
        let cav = CavityParams::default();
        let r = reflectivity_amplitude(0.0, &cav, &EmitterSet::empty());
        assert!((r.re - (2.0 * 860.0 / 3630.0 - 1.0)).abs() < 1e-14);
        assert!((r.re + 0.526).abs() < 1e-3);
        assert!((r.norm_sqr() - 0.277).abs() < 1e-3);
        assert!(r.im.abs() < 1e-15);
    }

    #[test]
    fn resonant_line_peak() {
        // r = 2κ_wg/(κ(1+C)) - 1 at line center
        let cav = CavityParams::default();
        let r = reflectivity_amplitude(0.0, &cav, &one_line(71.0));
        let expected = 2.0 * 860.0 / (3630.0 * 72.0) - 1.0;
        assert!((r.re - expected).abs() < 1e-14);
        assert!((r.norm_sqr() - 0.987).abs() < 1e-3);
    }

    #[test]
    fn far_detuned_probe_reflects_fully() {
        let cav = CavityParams::default();
        for p in [-1e10, 1e10] {
            let r = reflectivity_amplitude(p, &cav, &one_line(71.0));
            assert!((r.norm_sqr() - 1.0).abs() < 1e-6);
            assert!((r.re + 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn three_line_spectrum_has_three_peaks() {
        let cav = CavityParams::default();
        let lines = HYPERFINE_LINES_MHZ
            .iter()
            .zip([20.0, 40.0, 71.0])
            .map(|(&d, c)| Transition::with_cooperativity(d, GAMMA_D2_MHZ, c).unwrap())
            .collect();
        let atoms = EmitterSet::single(Atom::new(0.0, lines));
        let grid = linspace(-1500.0, 1500.0, 3001);
        let s = spectrum(&grid, &cav, &atoms).unwrap();
        let v = s.values();
        let maxima: Vec<f64> = (1..v.len() - 1)
            .filter(|&i| v[i] > v[i - 1] && v[i] >= v[i + 1])
            .map(|i| grid[i])
            .collect();
        assert_eq!(maxima.len(), 3, "{maxima:?}");
        for (m, d) in maxima.iter().zip(HYPERFINE_LINES_MHZ) {
            assert!((m - d).abs() < 10.0, "{m} vs {d}");
        }
    }

    #[test]
    fn empty_grid_is_usage_error() {
        let cav = CavityParams::default();
        assert!(spectrum(&[], &cav, &EmitterSet::empty()).is_err());
    }

    #[test]
    fn empty_cavity_spectrum_is_symmetric() {
        let cav = CavityParams::default().with_delta_c(120.0);
        let grid: Vec<f64> = (-50..=50).map(|i| 120.0 + 40.0 * i as f64).collect();
        let s = spectrum(&grid, &cav, &EmitterSet::empty()).unwrap();
        let v = s.values();
        for i in 0..v.len() {
            assert!((v[i] - v[v.len() - 1 - i]).abs() < 1e-14);
        }
    }

    #[test]
    fn purcell_values() {
        let k = 3630.0;
        assert!((purcell_linewidth(71.0, 6.0, 0.0, k).unwrap() - 432.0).abs() < 1e-9);
        assert_eq!(purcell_linewidth(0.0, 6.0, 100.0, k).unwrap(), 6.0);
        let off = purcell_linewidth(31.0, 6.0, 2.0 * k, k).unwrap();
        assert!((off - 6.0 * (1.0 + 31.0 / 17.0)).abs() < 1e-12);
        assert!((off - 16.9).abs() < 0.05);
    }

    #[test]
    fn dispersive_values() {
        let j = dispersive_shift(31.0, 3630.0, 6.0, 7260.0).unwrap();
        assert!((j - 23.25).abs() < 1e-9);
        assert!((j - 25.0).abs() <= 4.0);
        assert!((2.0 * j - 46.5).abs() < 1e-9);
        assert_eq!(dispersive_shift(0.0, 3630.0, 6.0, 7260.0).unwrap(), 0.0);
    }

    fn arb_emitters() -> impl Strategy<Value = EmitterSet> {
        let line = (-2000.0..2000.0f64, 0.5..20.0f64, 0.0..300.0f64)
            .prop_map(|(d, g, c)| Transition::with_cooperativity(d, g, c).unwrap());
        let atom = (-150.0..150.0f64, prop::collection::vec(line, 0..4)).prop_map(|(ls, lines)| Atom::new(ls, lines));
        prop::collection::vec(atom, 0..3).prop_map(EmitterSet::new)
    }

    fn arb_cavity() -> impl Strategy<Value = CavityParams> {
        (0.0..5000.0f64, 1.0..5000.0f64, -8000.0..8000.0f64).prop_map(|(w, s, d)| CavityParams::new(w, s, d).unwrap())
    }

    proptest! {
        #[test]
        fn passive(cav in arb_cavity(), em in arb_emitters(), p in -1e5..1e5f64) {
            let r2 = reflectivity_amplitude(p, &cav, &em).norm_sqr();
            prop_assert!((0.0..=1.0 + 1e-12).contains(&r2), "{}", r2);
        }

        #[test]
        fn zero_coupling_is_neutral(cav in arb_cavity(), em in arb_emitters(),
                                    p in -5000.0..5000.0f64, d in -500.0..500.0f64) {
            let mut more = em.clone();
            more.atoms.push(Atom::new(0.0, vec![Transition::new(d, 6.0, Coupling::Rabi(0.0)).unwrap()]));
            let a = reflectivity_amplitude(p, &cav, &em);
            let b = reflectivity_amplitude(p, &cav, &more);
            prop_assert_eq!(a, b);
        }

        #[test]
        fn coupling_round_trip(g in 0.0..5000.0f64, k in 1.0..1e4f64, gam in 0.1..50.0f64) {
            let c = cooperativity(g, k, gam).unwrap();
            let back = rabi_from_cooperativity(c, k, gam).unwrap();
            if g > 0.0 {
                prop_assert!(rel(back, g) < 1e-12);
            } else {
                prop_assert_eq!(back, 0.0);
            }
            let t = Transition::new(0.0, gam, Coupling::Rabi(g)).unwrap();
            prop_assert!((t.cooperativity(k) - c).abs() <= 1e-12 * c.max(1e-300));
        }
    }
}

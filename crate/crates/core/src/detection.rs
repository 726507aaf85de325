//! Single-shot atom detection from reflected photon counts.
//!
//! Counts in a fixed window are Poisson distributed with a mean set by the
//! reflectivity with or without an atom. The classifier thresholds on the
//! count; its error rate is the overlap of the two count distributions.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Discrete, Normal, Poisson as PoissonPmf};

use crate::error::{domain, usage, Result};

const CHUNK: usize = 4096;

/// Count rates per µs with and without a coupled atom.
///
/// The defaults are synthetic: their ratio follows the on-resonance
/// reflectivities with (0.987) and without (0.277) an atom, and their scale
/// puts the overlap of the normal approximations at 0.7%.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CountModel {
    pub rate_with_atom: f64,
    pub rate_without_atom: f64,
    pub window_us: f64,
    pub trials: usize,
    pub seed: u64,
}

impl Default for CountModel {
    fn default() -> Self {
        Self {
            rate_with_atom: 0.27,
            rate_without_atom: 0.076,
            window_us: 100.0,
            trials: 100_000,
            seed: 1,
        }
    }
}

impl CountModel {
    pub fn validate(&self) -> Result<()> {
        for (name, r) in [
            ("rate_with_atom", self.rate_with_atom),
            ("rate_without_atom", self.rate_without_atom),
        ] {
            if !(r.is_finite() && r >= 0.0) {
                return Err(domain(format!("{name} must be >= 0, got {r}")));
            }
        }
        if !(self.window_us.is_finite() && self.window_us > 0.0) {
            return Err(domain(format!("window must be positive, got {}", self.window_us)));
        }
        if self.trials == 0 {
            return Err(usage("at least one trial is required"));
        }
        Ok(())
    }

    /// Mean counts per window without and with an atom.
    pub fn means(&self) -> (f64, f64) {
        (
            self.rate_without_atom * self.window_us,
            self.rate_with_atom * self.window_us,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Hypothesis {
    NoAtom,
    Atom,
}

/// Raw counts per trial for both hypotheses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountSamples {
    pub without_atom: Vec<u64>,
    pub with_atom: Vec<u64>,
}

/// Count histograms on a shared support `0..len`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountHistograms {
    pub without_atom: Vec<u64>,
    pub with_atom: Vec<u64>,
}

impl CountHistograms {
    pub fn from_samples(samples: &CountSamples) -> Self {
        let top = samples
            .without_atom
            .iter()
            .chain(&samples.with_atom)
            .copied()
            .max()
            .unwrap_or(0) as usize;
        let fill = |counts: &[u64]| {
            let mut h = vec![0u64; top + 1];
            counts.iter().for_each(|&c| h[c as usize] += 1);
            h
        };
        Self {
            without_atom: fill(&samples.without_atom),
            with_atom: fill(&samples.with_atom),
        }
    }

    pub fn frequencies(&self) -> (Vec<f64>, Vec<f64>) {
        let norm = |h: &[u64]| {
            let n = h.iter().sum::<u64>().max(1) as f64;
            h.iter().map(|&c| c as f64 / n).collect::<Vec<_>>()
        };
        (norm(&self.without_atom), norm(&self.with_atom))
    }
}

fn poisson_counts(mean: f64, trials: usize, seed: u64, stream_base: u64) -> Result<Vec<u64>> {
    if mean == 0.0 {
        return Ok(vec![0; trials]);
    }
    let dist = Poisson::new(mean).map_err(|e| domain(format!("poisson mean {mean}: {e}")))?;
    let chunks: Vec<Vec<u64>> = (0..trials.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(stream_base + 2 * c as u64);
            let n = CHUNK.min(trials - c * CHUNK);
            (0..n).map(|_| dist.sample(&mut rng) as u64).collect()
        })
        .collect();
    Ok(chunks.concat())
}

/// Poisson counts for `trials` windows under each hypothesis. Trials are
/// drawn in fixed chunks with one random stream per chunk and hypothesis,
/// so the result does not depend on the thread count.
pub fn simulate_counts(model: &CountModel) -> Result<CountSamples> {
    model.validate()?;
    let (m0, m1) = model.means();
    Ok(CountSamples {
        without_atom: poisson_counts(m0, model.trials, model.seed, 0)?,
        with_atom: poisson_counts(m1, model.trials, model.seed, 1)?,
    })
}

pub fn simulate_count_histograms(model: &CountModel) -> Result<CountHistograms> {
    Ok(CountHistograms::from_samples(&simulate_counts(model)?))
}

/// `½ Σ_k min(p₀(k), p₁(k))` over normalised histograms.
pub fn histogram_overlap(h0: &[u64], h1: &[u64]) -> Result<f64> {
    let n0 = h0.iter().sum::<u64>();
    let n1 = h1.iter().sum::<u64>();
    if n0 == 0 || n1 == 0 {
        return Err(usage("histograms must not be empty"));
    }
    let len = h0.len().max(h1.len());
    let at = |h: &[u64], k: usize| h.get(k).copied().unwrap_or(0) as f64;
    Ok(0.5
        * (0..len)
            .map(|k| (at(h0, k) / n0 as f64).min(at(h1, k) / n1 as f64))
            .sum::<f64>())
}

/// Same as [`histogram_overlap`] for the exact Poisson distributions.
pub fn poisson_overlap(mean0: f64, mean1: f64) -> Result<f64> {
    let pmf = |m: f64| -> Result<Box<dyn Fn(u64) -> f64>> {
        if !(m.is_finite() && m >= 0.0) {
            return Err(domain(format!("poisson mean must be >= 0, got {m}")));
        }
        if m == 0.0 {
            return Ok(Box::new(|k| if k == 0 { 1.0 } else { 0.0 }));
        }
        let d = PoissonPmf::new(m).map_err(|e| domain(e.to_string()))?;
        Ok(Box::new(move |k| d.pmf(k)))
    };
    let (p0, p1) = (pmf(mean0)?, pmf(mean1)?);
    let top = (mean0.max(mean1) + 12.0 * mean0.max(mean1).sqrt() + 20.0).ceil() as u64;
    Ok(0.5 * (0..=top).map(|k| p0(k).min(p1(k))).sum::<f64>())
}

/// `½ ∫ min(f₀, f₁)` for two normal densities, from the crossing points.
pub fn normal_overlap(mu0: f64, sigma0: f64, mu1: f64, sigma1: f64) -> Result<f64> {
    let n0 = Normal::new(mu0, sigma0).map_err(|e| domain(format!("first normal: {e}")))?;
    let n1 = Normal::new(mu1, sigma1).map_err(|e| domain(format!("second normal: {e}")))?;
    if !(sigma0 > 0.0 && sigma1 > 0.0) {
        return Err(domain("normal widths must be positive"));
    }
    // log f0 − log f1 = a x² + b x + c
    let (v0, v1) = (sigma0 * sigma0, sigma1 * sigma1);
    let a = 0.5 / v1 - 0.5 / v0;
    let b = mu0 / v0 - mu1 / v1;
    let c = mu1 * mu1 / (2.0 * v1) - mu0 * mu0 / (2.0 * v0) + (sigma1 / sigma0).ln();
    let mut cuts = Vec::new();
    if a == 0.0 {
        if b != 0.0 {
            cuts.push(-c / b);
        } else {
            return Ok(0.5);
        }
    } else {
        let disc = b * b - 4.0 * a * c;
        if disc > 0.0 {
            // numerically stable roots
            let q = -0.5 * (b + b.signum() * disc.sqrt());
            let (r1, r2) = (q / a, c / q);
            cuts.extend([r1.min(r2), r1.max(r2)]);
        }
    }
    let logdiff = |x: f64| a * x * x + b * x + c;
    let mut edges = vec![f64::NEG_INFINITY];
    edges.extend(&cuts);
    edges.push(f64::INFINITY);
    let mut total = 0.0;
    for w in edges.windows(2) {
        let probe = match (w[0].is_finite(), w[1].is_finite()) {
            (true, true) => 0.5 * (w[0] + w[1]),
            (true, false) => w[0] + 1.0 + w[0].abs(),
            (false, true) => w[1] - 1.0 - w[1].abs(),
            (false, false) => mu0,
        };
        // the smaller density on this interval
        let lower = if logdiff(probe) < 0.0 { &n0 } else { &n1 };
        total += lower.cdf(w[1]) - lower.cdf(w[0]);
    }
    Ok(0.5 * total)
}

/// Smallest count assigned to the higher-rate hypothesis.
///
/// The boundary sits where the two Poisson likelihoods are equal,
/// `k* = (m₁ − m₀)/ln(m₁/m₀)`. A count exactly at `k*` goes to the higher
/// rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Threshold {
    pub count: u64,
    /// Whether the atom is the higher-rate hypothesis.
    pub atom_is_bright: bool,
}

pub fn optimal_threshold(model: &CountModel) -> Result<Threshold> {
    model.validate()?;
    let (m0, m1) = model.means();
    if m0 == m1 {
        return Err(domain("equal count rates cannot be discriminated"));
    }
    let (lo, hi) = (m0.min(m1), m0.max(m1));
    let count = if lo == 0.0 {
        1
    } else {
        ((hi - lo) / (hi / lo).ln()).ceil() as u64
    };
    Ok(Threshold {
        count,
        atom_is_bright: m1 > m0,
    })
}

pub fn classify(count: u64, threshold: &Threshold) -> Hypothesis {
    let bright = count >= threshold.count;
    if bright == threshold.atom_is_bright {
        Hypothesis::Atom
    } else {
        Hypothesis::NoAtom
    }
}

/// Summary of a simulated detection run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionReport {
    pub mean_without_atom: f64,
    pub mean_with_atom: f64,
    pub threshold: u64,
    /// Normal approximation with `σ² = mean`.
    pub overlap_normal: f64,
    pub overlap_poisson: f64,
    pub overlap_histogram: f64,
    /// Fraction of simulated trials misclassified, averaged over hypotheses.
    pub empirical_error: f64,
    /// Binomial standard error of `empirical_error`.
    pub empirical_stderr: f64,
}

pub fn detection_report(model: &CountModel) -> Result<(DetectionReport, CountHistograms)> {
    let samples = simulate_counts(model)?;
    let hist = CountHistograms::from_samples(&samples);
    let threshold = optimal_threshold(model)?;
    let (m0, m1) = model.means();
    let wrong = |counts: &[u64], truth: Hypothesis| {
        counts.iter().filter(|&&c| classify(c, &threshold) != truth).count() as f64 / counts.len() as f64
    };
    let e0 = wrong(&samples.without_atom, Hypothesis::NoAtom);
    let e1 = wrong(&samples.with_atom, Hypothesis::Atom);
    let n = model.trials as f64;
    let overlap_normal = if m0 > 0.0 && m1 > 0.0 {
        normal_overlap(m0, m0.sqrt(), m1, m1.sqrt())?
    } else {
        f64::NAN
    };
    let report = DetectionReport {
        mean_without_atom: m0,
        mean_with_atom: m1,
        threshold: threshold.count,
        overlap_normal,
        overlap_poisson: poisson_overlap(m0, m1)?,
        overlap_histogram: histogram_overlap(&hist.without_atom, &hist.with_atom)?,
        empirical_error: 0.5 * (e0 + e1),
        empirical_stderr: 0.5 * ((e0 * (1.0 - e0) + e1 * (1.0 - e1)) / n).sqrt(),
    };
    Ok((report, hist))
}

use serde::{Deserialize, Serialize};

use crate::error::{usage, Result};

/// Slack allowed on the `[0, 1]` bound before a value is rejected; values
/// inside the slack are clamped.
const RANGE_SLACK: f64 = 1e-9;

/// Reflected power `|r|^2` sampled on a strictly increasing probe grid (MHz).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    probe: Vec<f64>,
    values: Vec<f64>,
    stderr: Option<Vec<f64>>,
}

impl Spectrum {
    pub fn new(probe: Vec<f64>, values: Vec<f64>, stderr: Option<Vec<f64>>) -> Result<Self> {
        check_grid(&probe)?;
        if values.len() != probe.len() {
            return Err(usage(format!(
                "{} values for {} probe points",
                values.len(),
                probe.len()
            )));
        }
        if let Some(err) = &stderr {
            if err.len() != probe.len() {
                return Err(usage("stderr length does not match the probe grid"));
            }
            if err.iter().any(|e| !e.is_finite() || *e < 0.0) {
                return Err(usage("stderr must be finite and non-negative"));
            }
        }
        let mut values = values;
        for (i, v) in values.iter_mut().enumerate() {
            if !v.is_finite() || *v < -RANGE_SLACK || *v > 1.0 + RANGE_SLACK {
                return Err(usage(format!("reflectivity {v} at probe {} outside [0, 1]", probe[i])));
            }
            *v = v.clamp(0.0, 1.0);
        }
        Ok(Self { probe, values, stderr })
    }

    pub fn probe(&self) -> &[f64] {
        &self.probe
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn stderr(&self) -> Option<&[f64]> {
        self.stderr.as_deref()
    }

    pub fn len(&self) -> usize {
        self.probe.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probe.is_empty()
    }

    /// Pointwise average of spectra sharing one grid.
    pub fn average(parts: &[&Spectrum]) -> Result<Spectrum> {
        let first = parts.first().ok_or_else(|| usage("cannot average zero spectra"))?;
        if parts.iter().any(|s| s.probe != first.probe) {
            return Err(usage("spectra to average must share a probe grid"));
        }
        let n = parts.len() as f64;
        let values = (0..first.len())
            .map(|i| parts.iter().map(|s| s.values[i]).sum::<f64>() / n)
            .collect();
        Spectrum::new(first.probe.clone(), values, None)
    }
}

/// Rejects empty, non-finite or non-increasing grids.
pub fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(usage("probe grid is empty"));
    }
    if grid.iter().any(|p| !p.is_finite()) {
        return Err(usage("probe grid contains a non-finite value"));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(usage("probe grid must be strictly increasing"));
    }
    Ok(())
}

/// `points` evenly spaced values from `start` to `stop` inclusive.
pub fn linspace(start: f64, stop: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![start],
        n => {
            let step = (stop - start) / (n - 1) as f64;
            (0..n)
                .map(|i| if i == n - 1 { stop } else { start + step * i as f64 })
                .collect()
        }
    }
}

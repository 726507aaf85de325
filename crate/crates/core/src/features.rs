//! Numeric line finding in sampled spectra: local extrema ranked by
//! topographic prominence, full width at half prominence by linear
//! interpolation of the half-level crossings.

use serde::{Deserialize, Serialize};

use crate::error::{usage, Error, Result};
use crate::spectrum::Spectrum;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Polarity {
    Peak,
    Dip,
    /// Whichever polarity gives the larger total prominence over the
    /// requested number of lines.
    #[default]
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineFeature {
    pub center: f64,
    pub fwhm: f64,
    /// Prominence of the line, always positive.
    pub depth: f64,
    pub polarity: Polarity,
    /// Set when two lines closer than their mean width were reported as one.
    pub merged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureOptions<'a> {
    pub polarity: Polarity,
    pub min_prominence: f64,
    /// Reference values subtracted before the search, e.g. the empty-cavity
    /// spectrum on the same grid.
    pub baseline: Option<&'a [f64]>,
}

impl Default for FeatureOptions<'_> {
    fn default() -> Self {
        Self {
            polarity: Polarity::Auto,
            min_prominence: 1e-3,
            baseline: None,
        }
    }
}

pub fn extract_line_features(spectrum: &Spectrum, expected: usize) -> Result<Vec<LineFeature>> {
    extract_line_features_with(spectrum, expected, &FeatureOptions::default())
}

pub fn extract_line_features_with(
    spectrum: &Spectrum,
    expected: usize,
    opts: &FeatureOptions,
) -> Result<Vec<LineFeature>> {
    if expected == 0 {
        return Err(usage("expected line count must be positive"));
    }
    let x = spectrum.probe();
    let mut y: Vec<f64> = spectrum.values().to_vec();
    if let Some(base) = opts.baseline {
        if base.len() != y.len() {
            return Err(usage("baseline length does not match the spectrum"));
        }
        y.iter_mut().zip(base).for_each(|(v, b)| *v -= b);
    }
    let found = match opts.polarity {
        Polarity::Peak => find(x, &y, Polarity::Peak, opts.min_prominence),
        Polarity::Dip => find(x, &y, Polarity::Dip, opts.min_prominence),
        Polarity::Auto => {
            let peaks = find(x, &y, Polarity::Peak, opts.min_prominence);
            let dips = find(x, &y, Polarity::Dip, opts.min_prominence);
            let score = |f: &[Candidate]| f.iter().take(expected).map(|c| c.prominence).sum::<f64>();
            if score(&dips) > score(&peaks) {
                dips
            } else {
                peaks
            }
        }
    };
    if found.len() < expected {
        let listing = found
            .iter()
            .map(|c| format!("{:?} at {:.3} (prominence {:.3e})", c.polarity, c.center, c.prominence))
            .collect::<Vec<_>>()
            .join("; ");
        return Err(Error::Features {
            expected,
            found: found.len(),
            listing: if listing.is_empty() { "none".into() } else { listing },
        });
    }
    let mut chosen: Vec<Candidate> = found.into_iter().take(expected).collect();
    chosen.sort_by(|a, b| a.center.total_cmp(&b.center));
    Ok(merge_close(chosen))
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    center: f64,
    prominence: f64,
    left: f64,
    right: f64,
    polarity: Polarity,
}

fn merge_close(sorted: Vec<Candidate>) -> Vec<LineFeature> {
    let mut out: Vec<(Candidate, bool)> = Vec::with_capacity(sorted.len());
    for c in sorted {
        if let Some((prev, merged)) = out.last_mut() {
            let mean_width = 0.5 * ((prev.right - prev.left) + (c.right - c.left));
            if (c.center - prev.center).abs() < mean_width {
                let w = prev.prominence + c.prominence;
                prev.center = (prev.center * prev.prominence + c.center * c.prominence) / w;
                prev.left = prev.left.min(c.left);
                prev.right = prev.right.max(c.right);
                prev.prominence = prev.prominence.max(c.prominence);
                *merged = true;
                continue;
            }
        }
        out.push((c, false));
    }
    out.into_iter()
        .map(|(c, merged)| LineFeature {
            center: c.center,
            fwhm: c.right - c.left,
            depth: c.prominence,
            polarity: c.polarity,
            merged,
        })
        .collect()
}

/// Candidates sorted by decreasing prominence.
fn find(x: &[f64], y: &[f64], polarity: Polarity, min_prominence: f64) -> Vec<Candidate> {
    let sign = if polarity == Polarity::Dip { -1.0 } else { 1.0 };
    let s: Vec<f64> = y.iter().map(|v| sign * v).collect();
    let n = s.len();
    let mut out = Vec::new();
    let mut i = 1;
    while i + 1 < n {
        if s[i] > s[i - 1] {
            // walk across a flat top
            let mut j = i;
            while j + 1 < n && s[j + 1] == s[i] {
                j += 1;
            }
            if j + 1 < n && s[j + 1] < s[i] {
                let peak = (i + j) / 2;
                if let Some(c) = measure(x, &s, peak, i, j, polarity) {
                    if c.prominence >= min_prominence {
                        out.push(c);
                    }
                }
            }
            i = j + 1;
        } else {
            i += 1;
        }
    }
    out.sort_by(|a, b| b.prominence.total_cmp(&a.prominence));
    out
}

fn measure(
    x: &[f64],
    s: &[f64],
    peak: usize,
    plateau_lo: usize,
    plateau_hi: usize,
    polarity: Polarity,
) -> Option<Candidate> {
    let height = s[peak];
    let n = s.len();
    // bases: lowest point before reaching higher ground or the edge
    let mut left_min = height;
    let mut left_base = peak;
    let mut k = plateau_lo;
    while k > 0 {
        k -= 1;
        if s[k] > height {
            break;
        }
        if s[k] < left_min {
            left_min = s[k];
            left_base = k;
        }
    }
    let mut right_min = height;
    let mut right_base = peak;
    let mut k = plateau_hi;
    while k + 1 < n {
        k += 1;
        if s[k] > height {
            break;
        }
        if s[k] < right_min {
            right_min = s[k];
            right_base = k;
        }
    }
    let prominence = height - left_min.max(right_min);
    if prominence <= 0.0 {
        return None;
    }
    let level = height - 0.5 * prominence;
    let mut l = peak;
    while l > left_base && s[l] > level {
        l -= 1;
    }
    let left = if s[l] < level && l < peak {
        x[l] + (level - s[l]) * (x[l + 1] - x[l]) / (s[l + 1] - s[l])
    } else {
        x[l]
    };
    let mut r = peak;
    while r < right_base && s[r] > level {
        r += 1;
    }
    let right = if s[r] < level && r > peak {
        x[r] - (level - s[r]) * (x[r] - x[r - 1]) / (s[r - 1] - s[r])
    } else {
        x[r]
    };
    let center = if plateau_lo == plateau_hi {
        refine_vertex(x, s, peak)
    } else {
        0.5 * (x[plateau_lo] + x[plateau_hi])
    };
    Some(Candidate {
        center,
        prominence,
        left,
        right,
        polarity,
    })
}

/// Vertex of the parabola through the three samples around `i`, kept within
/// half a grid step of `x[i]`.
fn refine_vertex(x: &[f64], s: &[f64], i: usize) -> f64 {
    let (x0, x1, x2) = (x[i - 1], x[i], x[i + 1]);
    let (y0, y1, y2) = (s[i - 1], s[i], s[i + 1]);
    let d0 = (y1 - y0) / (x1 - x0);
    let d1 = (y2 - y1) / (x2 - x1);
    let curvature = (d1 - d0) / (0.5 * (x2 - x0));
    if curvature >= 0.0 {
        return x1;
    }
    // derivative of the parabola at x1 is the slope-weighted mean
    let slope = (d0 * (x2 - x1) + d1 * (x1 - x0)) / (x2 - x0);
    let shift = -slope / curvature;
    let half = 0.5 * (x2 - x1).min(x1 - x0);
    x1 + shift.clamp(-half, half)
}

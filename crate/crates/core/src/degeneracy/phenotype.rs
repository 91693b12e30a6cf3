//! Rule-based labelling of coefficient scatter shapes.
//!
//! The thresholds are heuristics; every one is a field of
//! [`PhenotypeRules`].

use std::fmt;

use serde::{Deserialize, Serialize};

use super::DegeneracyError;
use crate::matrix::FILTER_LEN;
use crate::scalar::Scalar;
use crate::shift::bin_index;
use crate::spectra::CoefficientSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Phenotype {
    /// Gaussian-like in every examined dimension.
    Sun,
    /// Local hotspots away from the origin.
    Spikes,
    /// Multi-modal or heavy-tailed marginals.
    Symbols,
    /// Mass concentrated at the origin.
    Point,
}

impl fmt::Display for Phenotype {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Phenotype::Sun => "sun",
            Phenotype::Spikes => "spikes",
            Phenotype::Symbols => "symbols",
            Phenotype::Point => "point",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhenotypeRules {
    pub min_coefficients: usize,
    /// Point: at least this fraction of rows within `point_radius · range`
    /// of the origin.
    pub point_fraction: f64,
    pub point_radius: f64,
    pub bins: usize,
    /// Spikes: a 2-D bin not containing the origin holds this much mass.
    pub spike_mass: f64,
    /// Symbols: secondary peaks must reach this fraction of the highest bin.
    pub peak_fraction: f64,
    /// Symbols: the valley between two peaks is at most this fraction of the
    /// smaller peak.
    pub valley_fraction: f64,
    pub max_excess_kurtosis: f64,
}

impl Default for PhenotypeRules {
    fn default() -> Self {
        Self {
            min_coefficients: 100,
            point_fraction: 0.6,
            point_radius: 0.05,
            bins: 70,
            spike_mass: 0.05,
            peak_fraction: 0.2,
            valley_fraction: 0.5,
            max_excess_kurtosis: 10.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ComponentSelection {
    Pair(usize, usize),
    All,
}

impl ComponentSelection {
    fn components(self) -> Vec<usize> {
        match self {
            ComponentSelection::Pair(i, j) => vec![i, j],
            ComponentSelection::All => (0..FILTER_LEN).collect(),
        }
    }

    fn pairs(self) -> Vec<(usize, usize)> {
        match self {
            ComponentSelection::Pair(i, j) => vec![(i, j)],
            ComponentSelection::All => (0..FILTER_LEN)
                .flat_map(|i| (i + 1..FILTER_LEN).map(move |j| (i, j)))
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhenotypeEvidence {
    pub center_fraction: f64,
    pub max_offcenter_bin_mass: f64,
    pub spike_pair: Option<(usize, usize)>,
    pub multimodal_components: Vec<usize>,
    pub max_excess_kurtosis: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhenotypeLabel {
    pub label: Phenotype,
    pub evidence: PhenotypeEvidence,
}

fn axis_range(values: &[f64]) -> (f64, f64) {
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    if lo == hi {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

/// Largest mass in a 2-D histogram bin that does not contain the origin.
fn max_offcenter_mass(x: &[f64], y: &[f64], bins: usize) -> f64 {
    let (xl, xh) = axis_range(x);
    let (yl, yh) = axis_range(y);
    let mut counts = vec![0u64; bins * bins];
    for (&a, &b) in x.iter().zip(y) {
        counts[bin_index(a, xl, xh, bins) * bins + bin_index(b, yl, yh, bins)] += 1;
    }
    let origin = (xl <= 0.0 && 0.0 <= xh && yl <= 0.0 && 0.0 <= yh)
        .then(|| bin_index(0.0, xl, xh, bins) * bins + bin_index(0.0, yl, yh, bins));
    let n = x.len() as f64;
    counts
        .iter()
        .enumerate()
        .filter(|&(k, _)| Some(k) != origin)
        .map(|(_, &c)| c as f64 / n)
        .fold(0.0, f64::max)
}

/// Two qualifying local maxima separated by a deep enough valley.
pub(crate) fn is_multimodal(counts: &[u64], peak_fraction: f64, valley_fraction: f64) -> bool {
    let top = counts.iter().copied().max().unwrap_or(0) as f64;
    if top == 0.0 {
        return false;
    }
    let peaks: Vec<usize> = (0..counts.len())
        .filter(|&i| {
            let left_ok = i == 0 || counts[i] > counts[i - 1];
            let right_ok = i + 1 == counts.len() || counts[i] >= counts[i + 1];
            left_ok && right_ok && counts[i] as f64 >= peak_fraction * top
        })
        .collect();
    for (a, &pa) in peaks.iter().enumerate() {
        for &pb in &peaks[a + 1..] {
            let valley = counts[pa..=pb].iter().copied().min().unwrap_or(0) as f64;
            let smaller = counts[pa].min(counts[pb]) as f64;
            if valley <= valley_fraction * smaller {
                return true;
            }
        }
    }
    false
}

pub(crate) fn excess_kurtosis(v: &[f64]) -> f64 {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let (m2, m4) = v.iter().fold((0.0, 0.0), |(m2, m4), &x| {
        let d2 = (x - mean).powi(2);
        (m2 + d2, m4 + d2 * d2)
    });
    let (m2, m4) = (m2 / n, m4 / n);
    if m2 == 0.0 {
        0.0
    } else {
        m4 / (m2 * m2) - 3.0
    }
}

/// Point, then Spikes, then Symbols, otherwise Sun.
pub fn classify_phenotype<T: Scalar>(
    coeffs: &CoefficientSet<T>,
    selection: ComponentSelection,
    rules: &PhenotypeRules,
) -> Result<PhenotypeLabel, DegeneracyError> {
    let n = coeffs.len();
    if n < rules.min_coefficients {
        return Err(DegeneracyError::Unreliable {
            n,
            min: rules.min_coefficients,
        });
    }
    let comps = selection.components();
    if let Some(&bad) = comps.iter().find(|&&c| c >= FILTER_LEN) {
        return Err(DegeneracyError::ComponentOutOfRange(bad));
    }
    let columns: Vec<Vec<f64>> = (0..FILTER_LEN)
        .map(|k| coeffs.coeffs.rows().map(|r| r[k].as_f64()).collect())
        .collect();

    let all: Vec<f64> = comps.iter().flat_map(|&k| columns[k].iter().copied()).collect();
    let (lo, hi) = all
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let radius = rules.point_radius * (hi - lo);
    let near = (0..n)
        .filter(|&i| comps.iter().map(|&k| columns[k][i].powi(2)).sum::<f64>().sqrt() <= radius)
        .count();
    let center_fraction = near as f64 / n as f64;

    let mut max_mass = 0.0;
    let mut spike_pair = None;
    for (i, j) in selection.pairs() {
        let m = max_offcenter_mass(&columns[i], &columns[j], rules.bins);
        if m > max_mass {
            max_mass = m;
            spike_pair = Some((i, j));
        }
    }

    let mut multimodal = Vec::new();
    let mut kurt = f64::NEG_INFINITY;
    for &k in &comps {
        let (l, h) = axis_range(&columns[k]);
        let mut counts = vec![0u64; rules.bins];
        for &v in &columns[k] {
            counts[bin_index(v, l, h, rules.bins)] += 1;
        }
        if is_multimodal(&counts, rules.peak_fraction, rules.valley_fraction) {
            multimodal.push(k);
        }
        kurt = kurt.max(excess_kurtosis(&columns[k]));
    }

    let label = if center_fraction >= rules.point_fraction {
        Phenotype::Point
    } else if max_mass >= rules.spike_mass {
        Phenotype::Spikes
    } else if !multimodal.is_empty() || kurt > rules.max_excess_kurtosis {
        Phenotype::Symbols
    } else {
        Phenotype::Sun
    };
    Ok(PhenotypeLabel {
        label,
        evidence: PhenotypeEvidence {
            center_fraction,
            max_offcenter_bin_mass: max_mass,
            spike_pair: if max_mass >= rules.spike_mass { spike_pair } else { None },
            multimodal_components: multimodal,
            max_excess_kurtosis: kurt,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unimodal_counts() {
        assert!(!is_multimodal(&[1, 3, 8, 12, 8, 3, 1], 0.2, 0.5));
        assert!(!is_multimodal(&[5, 5, 5, 5], 0.2, 0.5));
        assert!(!is_multimodal(&[0, 0, 0], 0.2, 0.5));
    }

    #[test]
    fn bimodal_counts() {
        assert!(is_multimodal(&[1, 10, 2, 1, 8, 1], 0.2, 0.5));
        // second peak below 20% of the top does not count
        assert!(!is_multimodal(&[1, 100, 2, 1, 8, 1], 0.2, 0.5));
        // shallow valley does not count
        assert!(!is_multimodal(&[1, 10, 7, 9, 1], 0.2, 0.5));
    }

    #[test]
    fn kurtosis_of_two_point_distribution() {
        // symmetric two-point distribution has excess kurtosis -2
        assert!((excess_kurtosis(&[1.0, -1.0, 1.0, -1.0]) + 2.0).abs() < 1e-12);
    }
}

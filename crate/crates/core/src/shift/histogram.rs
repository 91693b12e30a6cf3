use serde::{Deserialize, Serialize};

use super::ShiftError;
use crate::matrix::FILTER_LEN;
use crate::scalar::Scalar;
use crate::spectra::CoefficientSet;

pub const N_BINS: usize = 70;
/// Probability floor applied before renormalizing, so no bin is empty.
pub const PROB_FLOOR: f64 = 1e-10;

/// Probability histogram of one PCA component's coefficients over uniform
/// bins.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentHistogram {
    pub bin_edges: Vec<f64>,
    pub probs: Vec<f64>,
    pub component_index: usize,
}

/// Uniform bin index of `x` in `[lo, hi]`; out-of-range values land in the
/// boundary bins.
#[inline]
pub fn bin_index(x: f64, lo: f64, hi: f64, bins: usize) -> usize {
    let t = (x - lo) / (hi - lo) * bins as f64;
    if t.is_nan() || t < 0.0 {
        0
    } else {
        (t as usize).min(bins - 1)
    }
}

pub fn bin_edges(lo: f64, hi: f64, bins: usize) -> Vec<f64> {
    (0..=bins)
        .map(|k| if k == bins { hi } else { lo + (hi - lo) * k as f64 / bins as f64 })
        .collect()
}

/// Normalizes counts to probabilities, floors every bin at [`PROB_FLOOR`] and
/// renormalizes.
pub fn floored_probs(counts: &[u64]) -> Vec<f64> {
    let total: u64 = counts.iter().sum();
    let floored: Vec<f64> = counts
        .iter()
        .map(|&c| (c as f64 / total as f64).max(PROB_FLOOR))
        .collect();
    let s: f64 = floored.iter().sum();
    floored.into_iter().map(|p| p / s).collect()
}

/// One histogram per component, all over the shared range `[lo, hi]`.
pub fn build_histograms<T: Scalar>(
    coeffs: &CoefficientSet<T>,
    range: (f64, f64),
) -> Result<Vec<ComponentHistogram>, ShiftError> {
    let (lo, hi) = range;
    if coeffs.is_empty() {
        return Err(ShiftError::EmptyCoefficients);
    }
    if !(lo < hi) {
        return Err(ShiftError::DegenerateRange { lo, hi });
    }
    let mut counts = vec![[0u64; N_BINS]; FILTER_LEN];
    for row in coeffs.coeffs.rows() {
        for (k, &c) in row.iter().enumerate() {
            counts[k][bin_index(c.as_f64(), lo, hi, N_BINS)] += 1;
        }
    }
    let edges = bin_edges(lo, hi, N_BINS);
    Ok(counts
        .iter()
        .enumerate()
        .map(|(k, c)| ComponentHistogram {
            bin_edges: edges.clone(),
            probs: floored_probs(c),
            component_index: k,
        })
        .collect())
}

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::pca::fit_pca;
use super::SpectraError;
use crate::matrix::{FilterMatrix, FilterSet};
use crate::scalar::Scalar;

/// Divides each filter by its largest absolute weight. All-zero filters are
/// returned unchanged.
pub fn normalize_filters<T: Scalar>(filters: &FilterMatrix<T>) -> FilterMatrix<T> {
    let mut out = filters.clone();
    for i in 0..out.n_rows() {
        let row = out.row_mut(i);
        let d = row.iter().fold(T::zero(), |m, &w| m.max(w.abs()));
        if d != T::zero() {
            for w in row.iter_mut() {
                *w = *w / d;
            }
        }
    }
    out
}

/// Base-10 Shannon entropy of a probability vector, with `0 · log 0 = 0`.
pub fn entropy_log10(ratios: &[f64]) -> f64 {
    // 0 - x rather than -x, so a single component gives +0
    0.0 - ratios
        .iter()
        .filter(|&&a| a > 0.0)
        .map(|&a| a * a.log10())
        .sum::<f64>()
}

/// Entropy of the explained-variance ratios of the layer's filters.
/// Zero for zero-variance layers.
pub fn layer_entropy<T: Scalar, S: FilterSet<T>>(filters: &S) -> Result<f64, SpectraError> {
    let basis = fit_pca(filters)?;
    Ok(entropy_log10(&basis.explained_variance_ratio))
}

/// How the sparsity threshold ε₀ is chosen for a layer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", content = "value", rename_all = "lowercase")]
pub enum Eps0 {
    /// `max(factor · layer max-abs weight, 1e-6)`.
    Relative(f64),
    Absolute(f64),
}

pub const EPS0_FLOOR: f64 = 1e-6;

impl Default for Eps0 {
    fn default() -> Self {
        Eps0::Relative(1e-2)
    }
}

impl Eps0 {
    pub fn resolve<T: Scalar, S: FilterSet<T>>(&self, filters: &S) -> f64 {
        match *self {
            Eps0::Absolute(v) => v,
            Eps0::Relative(f) => (f * max_abs(filters)).max(EPS0_FLOOR),
        }
    }
}

impl fmt::Display for Eps0 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Eps0::Relative(v) => write!(f, "rel:{v}"),
            Eps0::Absolute(v) => write!(f, "abs:{v}"),
        }
    }
}

impl FromStr for Eps0 {
    type Err = String;

    /// `rel:<factor>` or `abs:<value>`; a bare number is relative.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (mode, v) = s.split_once(':').unwrap_or(("rel", s));
        let v: f64 = v.parse().map_err(|e| format!("eps0 '{s}': {e}"))?;
        if !(v >= 0.0 && v.is_finite()) {
            return Err(format!("eps0 '{s}' must be a finite non-negative number"));
        }
        match mode {
            "rel" => Ok(Eps0::Relative(v)),
            "abs" => Ok(Eps0::Absolute(v)),
            m => Err(format!("eps0 mode '{m}' must be 'rel' or 'abs'")),
        }
    }
}

pub fn max_abs<T: Scalar, S: FilterSet<T>>(filters: &S) -> f64 {
    (0..filters.len())
        .flat_map(|i| filters.filter(i).iter())
        .fold(0.0f64, |m, &w| m.max(w.as_f64().abs()))
}

/// Fraction of filters whose every weight lies in `[−eps0, eps0]`.
/// Zero for an empty set.
pub fn layer_sparsity<T: Scalar, S: FilterSet<T>>(filters: &S, eps0: f64) -> f64 {
    let n = filters.len();
    if n == 0 {
        return 0.0;
    }
    let sparse = (0..n)
        .filter(|&i| filters.filter(i).iter().all(|w| w.as_f64().abs() <= eps0))
        .count();
    sparse as f64 / n as f64
}

/// Mean over filters of `max(f) − min(f)`.
pub fn mean_scale<T: Scalar, S: FilterSet<T>>(filters: &S) -> Result<f64, SpectraError> {
    let n = filters.len();
    if n == 0 {
        return Err(SpectraError::EmptySet);
    }
    let total: f64 = (0..n)
        .map(|i| {
            let (lo, hi) = filters
                .filter(i)
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &w| {
                    (lo.min(w.as_f64()), hi.max(w.as_f64()))
                });
            hi - lo
        })
        .sum();
    Ok(total / n as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerStats {
    pub n: usize,
    pub sparsity: f64,
    /// `None` for layers with fewer than two filters.
    pub entropy: Option<f64>,
    pub eps0: f64,
    pub mean_scale: f64,
}

pub fn layer_stats<T: Scalar, S: FilterSet<T>>(filters: &S, eps0: Eps0) -> Result<LayerStats, SpectraError> {
    let eps0 = eps0.resolve(filters);
    Ok(LayerStats {
        n: filters.len(),
        sparsity: layer_sparsity(filters, eps0),
        entropy: match layer_entropy(filters) {
            Ok(h) => Some(h),
            Err(SpectraError::TooFewFilters { .. }) => None,
            Err(e) => return Err(e),
        },
        eps0,
        mean_scale: mean_scale(filters)?,
    })
}

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::histogram::build_histograms;
use super::kl::{kl_sym, KlBase};
use super::ShiftError;
use crate::ingest::depth_decile;
use crate::matrix::{FilterMatrix, FilterSet, FILTER_LEN};
use crate::scalar::Scalar;
use crate::spectra::{project, CoefficientSet, PcaBasis};
use crate::store::FilterStore;

/// Where the shared histogram range of a comparison comes from.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub enum HistogramRange {
    /// Min/max over the union of the two coefficient sets being compared.
    #[default]
    Union,
    /// A fixed range, e.g. the coefficient range of the whole corpus.
    Fixed(f64, f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct DriftConfig {
    pub kl_base: KlBase,
    pub range: HistogramRange,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriftResult {
    pub value: f64,
    pub per_component: [f64; FILTER_LEN],
    pub weights: [f64; FILTER_LEN],
    pub basis_ref: String,
}

fn union_range<T: Scalar>(a: &CoefficientSet<T>, b: &CoefficientSet<T>) -> Result<(f64, f64), ShiftError> {
    let (la, ha) = a.range().ok_or(ShiftError::EmptyCoefficients)?;
    let (lb, hb) = b.range().ok_or(ShiftError::EmptyCoefficients)?;
    Ok((la.min(lb), ha.max(hb)))
}

/// Drift between two already-projected coefficient sets.
///
/// `D = Σᵢ wᵢ · KL_sym(Pᵢ‖Qᵢ)` with `w` the explained-variance ratios of
/// the basis both sets were projected on.
pub fn drift_coeffs<T: Scalar>(
    a: &CoefficientSet<T>,
    b: &CoefficientSet<T>,
    basis: &PcaBasis,
    cfg: &DriftConfig,
) -> Result<DriftResult, ShiftError> {
    let range = match cfg.range {
        HistogramRange::Union => union_range(a, b)?,
        HistogramRange::Fixed(lo, hi) => (lo, hi),
    };
    // Two sets that collapse onto one point are identical.
    let range = if range.0 == range.1 && range.0.is_finite() {
        (range.0 - 0.5, range.1 + 0.5)
    } else {
        range
    };
    let ha = build_histograms(a, range)?;
    let hb = build_histograms(b, range)?;
    let mut per_component = [0.0; FILTER_LEN];
    for (k, slot) in per_component.iter_mut().enumerate() {
        *slot = kl_sym(&ha[k], &hb[k], cfg.kl_base)?;
    }
    let weights = basis.explained_variance_ratio;
    let value = weights
        .iter()
        .zip(&per_component)
        .map(|(w, kl)| w * kl)
        .sum();
    Ok(DriftResult {
        value,
        per_component,
        weights,
        basis_ref: basis.id(),
    })
}

/// Projects both filter sets on `basis` and measures their drift.
pub fn drift<T: Scalar, A: FilterSet<T>, B: FilterSet<T>>(
    a: &A,
    b: &B,
    basis: &PcaBasis,
    cfg: &DriftConfig,
) -> Result<DriftResult, ShiftError> {
    if a.is_empty() || b.is_empty() {
        return Err(ShiftError::EmptyCoefficients);
    }
    drift_coeffs(&project(a, basis), &project(b, basis), basis, cfg)
}

/// Symmetric matrix of pairwise drifts with labelled rows/columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriftMatrix {
    pub labels: Vec<String>,
    pub values: Vec<Vec<f64>>,
    pub basis_ref: String,
    pub kl_base: KlBase,
}

/// Drift between every pair of groups. Each group is projected once.
pub fn pairwise_drift<T: Scalar, L: ToString + Sync, S: FilterSet<T>>(
    groups: &[(L, S)],
    basis: &PcaBasis,
    cfg: &DriftConfig,
) -> Result<DriftMatrix, ShiftError> {
    let n = groups.len();
    if n < 2 {
        return Err(ShiftError::TooFewGroups(n));
    }
    if groups.iter().any(|(_, s)| s.is_empty()) {
        return Err(ShiftError::EmptyCoefficients);
    }
    let coeffs: Vec<CoefficientSet<T>> = groups.par_iter().map(|(_, s)| project(s, basis)).collect();
    let cells: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let vals = cells
        .par_iter()
        .map(|&(i, j)| drift_coeffs(&coeffs[i], &coeffs[j], basis, cfg).map(|d| d.value))
        .collect::<Result<Vec<_>, _>>()?;

    let mut values = vec![vec![0.0; n]; n];
    for (&(i, j), v) in cells.iter().zip(vals) {
        values[i][j] = v;
        values[j][i] = v;
    }
    Ok(DriftMatrix {
        labels: groups.iter().map(|(l, _)| l.to_string()).collect(),
        values,
        basis_ref: basis.id(),
        kl_base: cfg.kl_base,
    })
}

/// Median and quartiles (linear interpolation between order statistics).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub count: usize,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

impl Summary {
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        let q = |p: f64| {
            let h = p * (v.len() - 1) as f64;
            let (i, f) = (h.floor() as usize, h.fract());
            if i + 1 < v.len() {
                v[i] + f * (v[i + 1] - v[i])
            } else {
                v[i]
            }
        };
        Some(Summary {
            count: v.len(),
            min: v[0],
            q1: q(0.25),
            median: q(0.5),
            q3: q(0.75),
            max: v[v.len() - 1],
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelPairDrift {
    pub model_a: u32,
    pub model_b: u32,
    pub drift: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecileShift {
    pub decile: u8,
    pub pairs: Vec<ModelPairDrift>,
    pub summary: Option<Summary>,
}

/// Model-to-model drift restricted to each conv-depth decile.
///
/// `filters` must be row-aligned with `store.filters` (e.g. the normalized
/// store). Deciles in which fewer than two of the models have filters are
/// omitted with a warning.
pub fn decile_shift<T: Scalar>(
    store: &FilterStore,
    filters: &FilterMatrix<T>,
    models: &[u32],
    basis: &PcaBasis,
    cfg: &DriftConfig,
) -> Result<Vec<DecileShift>, ShiftError> {
    assert_eq!(filters.n_rows(), store.len(), "filters must align with store rows");
    let models: Vec<u32> = models.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
    if models.len() < 2 {
        log::warn!("decile shift needs at least two models, got {}", models.len());
        return Ok(Vec::new());
    }

    let mut out = Vec::new();
    for decile in 0..10u8 {
        let per_model: Vec<(u32, Vec<usize>)> = models
            .iter()
            .map(|&m| {
                let rows = store
                    .layers
                    .iter()
                    .filter(|l| l.model_id == m && depth_decile(l.conv_depth_norm) == decile)
                    .flat_map(|l| l.filter_range())
                    .collect();
                (m, rows)
            })
            .filter(|(_, rows): &(u32, Vec<usize>)| !rows.is_empty())
            .collect();
        if per_model.len() < 2 {
            log::warn!("decile {decile}: fewer than two models have filters, skipped");
            continue;
        }
        let coeffs: Vec<CoefficientSet<T>> = per_model
            .par_iter()
            .map(|(_, rows)| project(&filters.select(rows), basis))
            .collect();
        let mut pairs = Vec::new();
        for i in 0..per_model.len() {
            for j in i + 1..per_model.len() {
                pairs.push(ModelPairDrift {
                    model_a: per_model[i].0,
                    model_b: per_model[j].0,
                    drift: drift_coeffs(&coeffs[i], &coeffs[j], basis, cfg)?.value,
                });
            }
        }
        let summary = Summary::of(&pairs.iter().map(|p| p.drift).collect::<Vec<_>>());
        out.push(DecileShift {
            decile,
            pairs,
            summary,
        });
    }
    Ok(out)
}

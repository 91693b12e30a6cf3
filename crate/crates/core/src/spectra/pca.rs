use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::eigen::jacobi_eigen;
use super::SpectraError;
use crate::matrix::{FilterMatrix, FilterSet, FILTER_LEN};
use crate::scalar::Scalar;

pub const JACOBI_TOL: f64 = 1e-12;
pub const JACOBI_MAX_SWEEPS: usize = 50;

/// Rows per partial sum. Fixed so the reduction order, and therefore every
/// bit of the result, does not depend on the thread pool.
const CHUNK: usize = 1 << 14;

/// Principal axes of a filter population.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaBasis {
    pub mean: [f64; FILTER_LEN],
    /// Row `i` is the i-th principal component, sign-fixed so its
    /// largest-magnitude entry is positive.
    pub components: [[f64; FILTER_LEN]; FILTER_LEN],
    /// Singular values of the centered matrix, descending.
    pub singular_values: [f64; FILTER_LEN],
    pub explained_variance_ratio: [f64; FILTER_LEN],
    pub n_fit: usize,
    /// Set when the population has zero total variance; the ratios are then
    /// `(1, 0, …, 0)` by convention.
    pub degenerate: bool,
}

impl PcaBasis {
    /// Short fingerprint of the basis parameters, used to tag coefficient sets.
    pub fn id(&self) -> String {
        // FNV-1a over the bit patterns of mean and components
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for v in self.mean.iter().chain(self.components.iter().flatten()) {
            for b in v.to_bits().to_le_bytes() {
                h ^= u64::from(b);
                h = h.wrapping_mul(0x0000_0100_0000_01b3);
            }
        }
        format!("{h:016x}")
    }

    pub fn cumulative_variance(&self) -> [f64; FILTER_LEN] {
        let total: f64 = self.explained_variance_ratio.iter().sum();
        let mut acc = 0.0;
        self.explained_variance_ratio.map(|a| {
            acc += a;
            acc / total
        })
    }
}

fn chunk_bounds(n: usize) -> Vec<(usize, usize)> {
    (0..n).step_by(CHUNK).map(|s| (s, (s + CHUNK).min(n))).collect()
}

fn column_sums<T: Scalar, S: FilterSet<T>>(filters: &S, shift: &[f64; FILTER_LEN]) -> [f64; FILTER_LEN] {
    let partial: Vec<[f64; FILTER_LEN]> = chunk_bounds(filters.len())
        .into_par_iter()
        .map(|(a, b)| {
            let mut s = [0.0; FILTER_LEN];
            for i in a..b {
                for (acc, (&x, m)) in s.iter_mut().zip(filters.filter(i).iter().zip(shift)) {
                    *acc += x.as_f64() - m;
                }
            }
            s
        })
        .collect();
    partial.iter().fold([0.0; FILTER_LEN], |mut s, p| {
        for (a, b) in s.iter_mut().zip(p) {
            *a += b;
        }
        s
    })
}

fn centered_gram<T: Scalar, S: FilterSet<T>>(filters: &S, mean: &[f64; FILTER_LEN]) -> [[f64; FILTER_LEN]; FILTER_LEN] {
    let partial: Vec<[[f64; FILTER_LEN]; FILTER_LEN]> = chunk_bounds(filters.len())
        .into_par_iter()
        .map(|(a, b)| {
            let mut g = [[0.0; FILTER_LEN]; FILTER_LEN];
            let mut d = [0.0; FILTER_LEN];
            for i in a..b {
                for (dj, (&x, m)) in d.iter_mut().zip(filters.filter(i).iter().zip(mean)) {
                    *dj = x.as_f64() - m;
                }
                for p in 0..FILTER_LEN {
                    for q in p..FILTER_LEN {
                        g[p][q] += d[p] * d[q];
                    }
                }
            }
            g
        })
        .collect();
    let mut g = [[0.0; FILTER_LEN]; FILTER_LEN];
    for part in &partial {
        for p in 0..FILTER_LEN {
            for q in p..FILTER_LEN {
                g[p][q] += part[p][q];
            }
        }
    }
    for p in 0..FILTER_LEN {
        for q in 0..p {
            g[p][q] = g[q][p];
        }
    }
    g
}

/// Column means with one refinement pass, so a population of identical
/// filters centers to exactly zero.
pub fn column_mean<T: Scalar, S: FilterSet<T>>(filters: &S) -> [f64; FILTER_LEN] {
    let n = filters.len() as f64;
    let mut mean = column_sums(filters, &[0.0; FILTER_LEN]).map(|s| s / n);
    let resid = column_sums(filters, &mean);
    for (m, r) in mean.iter_mut().zip(resid) {
        *m += r / n;
    }
    mean
}

/// Makes the largest-magnitude entry positive; the first index wins ties.
pub(crate) fn fix_sign(v: &mut [f64; FILTER_LEN]) {
    let mut best = 0;
    for j in 1..FILTER_LEN {
        if v[j].abs() > v[best].abs() {
            best = j;
        }
    }
    if v[best] < 0.0 {
        for x in v.iter_mut() {
            *x = -*x;
        }
    }
}

/// Full-rank PCA of the filter population.
///
/// The SVD of the centered `n × 9` matrix is obtained from the
/// eigendecomposition of its `9 × 9` Gram matrix; squared singular values are
/// the Gram eigenvalues.
pub fn fit_pca<T: Scalar, S: FilterSet<T>>(filters: &S) -> Result<PcaBasis, SpectraError> {
    let n = filters.len();
    if n < 2 {
        return Err(SpectraError::TooFewFilters { n, min: 2 });
    }
    let mean = column_mean(filters);
    let gram = centered_gram(filters, &mean);
    let eig = jacobi_eigen(gram, JACOBI_TOL, JACOBI_MAX_SWEEPS);
    if !eig.converged {
        log::warn!("Jacobi eigensolver stopped after {} sweeps without converging", eig.sweeps);
    }

    // Eigenvalues below the solver's resolution are rank deficiency, not
    // variance.
    let cutoff = FILTER_LEN as f64 * f64::EPSILON * eig.values[0].abs();
    let eigvals = eig.values.map(|l| if l <= cutoff { 0.0 } else { l });
    let total: f64 = eigvals.iter().sum();
    let scale = (0..n)
        .flat_map(|i| filters.filter(i).iter().map(|x| x.as_f64().abs()))
        .fold(0.0, f64::max);
    let degenerate = total <= n as f64 * (f64::EPSILON * scale).powi(2);

    let explained_variance_ratio = if degenerate {
        std::array::from_fn(|i| if i == 0 { 1.0 } else { 0.0 })
    } else {
        let var = eigvals.map(|l| l / (n as f64 - 1.0));
        let l1: f64 = var.iter().sum();
        var.map(|a| a / l1)
    };

    let mut components = eig.vectors;
    for c in components.iter_mut() {
        fix_sign(c);
    }

    Ok(PcaBasis {
        mean,
        components,
        singular_values: eigvals.map(f64::sqrt),
        explained_variance_ratio,
        n_fit: n,
        degenerate,
    })
}

/// PCA coefficients of a filter set, one row per filter.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientSet<T> {
    pub coeffs: FilterMatrix<T>,
    pub basis_ref: String,
}

impl<T: Scalar> CoefficientSet<T> {
    pub fn len(&self) -> usize {
        self.coeffs.n_rows()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Minimum and maximum over all coefficients of all components.
    pub fn range(&self) -> Option<(f64, f64)> {
        self.coeffs.as_flat().iter().fold(None, |acc, &c| {
            let c = c.as_f64();
            Some(match acc {
                None => (c, c),
                Some((lo, hi)) => (lo.min(c), hi.max(c)),
            })
        })
    }
}

/// `c = (f − mean) Vᵀ` for every filter.
pub fn project<T: Scalar, S: FilterSet<T>>(filters: &S, basis: &PcaBasis) -> CoefficientSet<T> {
    let flat: Vec<T> = (0..filters.len())
        .into_par_iter()
        .flat_map_iter(|i| {
            let f = filters.filter(i);
            let d: [f64; FILTER_LEN] = std::array::from_fn(|j| f[j].as_f64() - basis.mean[j]);
            basis.components.iter().map(move |v| {
                T::of(v.iter().zip(&d).map(|(a, b)| a * b).sum::<f64>())
            })
        })
        .collect();
    CoefficientSet {
        coeffs: FilterMatrix::from_flat(flat).expect("9 coefficients per filter"),
        basis_ref: basis.id(),
    }
}

/// `f = Σᵢ cᵢ vᵢ + mean` for every coefficient row.
pub fn reconstruct<T: Scalar>(coeffs: &CoefficientSet<T>, basis: &PcaBasis) -> FilterMatrix<T> {
    let flat: Vec<T> = coeffs
        .coeffs
        .rows()
        .flat_map(|c| {
            (0..FILTER_LEN).map(move |j| {
                let s: f64 = c
                    .iter()
                    .zip(&basis.components)
                    .map(|(ci, v)| ci.as_f64() * v[j])
                    .sum();
                T::of(s + basis.mean[j])
            })
        })
        .collect();
    FilterMatrix::from_flat(flat).expect("9 values per filter")
}

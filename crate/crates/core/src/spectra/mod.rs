//! Per-filter normalization, PCA of filter populations and the layer-level
//! statistics derived from it.

mod eigen;
mod pca;
mod stats;

use thiserror::Error;

pub use eigen::{jacobi_eigen, SymmetricEigen};
pub use pca::{column_mean, fit_pca, project, reconstruct, CoefficientSet, PcaBasis, JACOBI_MAX_SWEEPS, JACOBI_TOL};
pub use stats::{
    entropy_log10, layer_entropy, layer_sparsity, layer_stats, max_abs, mean_scale,
    normalize_filters, Eps0, LayerStats, EPS0_FLOOR,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpectraError {
    #[error("need at least {min} filters, got {n}")]
    TooFewFilters { n: usize, min: usize },
    #[error("empty filter set")]
    EmptySet,
}

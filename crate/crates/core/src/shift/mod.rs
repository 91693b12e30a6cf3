//! Distribution shift between filter sets: coefficient histograms,
//! symmetric KL divergence and the variance-weighted drift.

mod drift;
mod histogram;
mod kl;

use thiserror::Error;

pub use drift::{
    decile_shift, drift, drift_coeffs, pairwise_drift, DecileShift, DriftConfig, DriftMatrix,
    DriftResult, HistogramRange, ModelPairDrift, Summary,
};
pub use histogram::{bin_edges, bin_index, build_histograms, floored_probs, ComponentHistogram, N_BINS, PROB_FLOOR};
pub use kl::{kl_sym, kl_sym_probs, KlBase};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ShiftError {
    #[error("no coefficients to histogram")]
    EmptyCoefficients,
    #[error("histogram range [{lo}, {hi}] is empty")]
    DegenerateRange { lo: f64, hi: f64 },
    #[error("histograms have different bins")]
    BinMismatch,
    #[error("need at least two groups, got {0}")]
    TooFewGroups(usize),
}

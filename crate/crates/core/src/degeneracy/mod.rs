//! Randomness threshold, layer degeneration labels and coefficient
//! phenotypes.

mod classify;
mod phenotype;
mod sampling;
mod threshold;

use thiserror::Error;

pub use classify::{classify_layer, Degeneration, DegenerationCriteria, DegenerationLabel, Precedence};
pub use phenotype::{
    classify_phenotype, ComponentSelection, Phenotype, PhenotypeEvidence, PhenotypeLabel, PhenotypeRules,
};
pub use sampling::{
    normal_filters, rep_rng, sample_entropies, sample_entropy_curve, sample_min_entropy, size_seed,
    EntropySample, RNG_NAME,
};
pub use threshold::{fit_threshold, threshold, LmSettings, ThresholdFit, ThresholdParams};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DegeneracyError {
    #[error("sigmoid fit did not beat the constant model (rms {rms}, baseline {baseline})")]
    FitDiverged { rms: f64, baseline: f64 },
    #[error("need at least 6 distinct layer sizes over 3 octaves, got {distinct} over {octaves:.2}")]
    InsufficientSamples { distinct: usize, octaves: f64 },
    #[error("{n} coefficients are too few for a phenotype (need {min})")]
    Unreliable { n: usize, min: usize },
    #[error("component index {0} out of range")]
    ComponentOutOfRange(usize),
}

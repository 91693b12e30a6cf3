use std::fmt;

use serde::{Deserialize, Serialize};

use super::threshold::{threshold, ThresholdParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Degeneration {
    /// Entropy at or above the randomness threshold (minus the margin).
    Random,
    /// Low entropy and high sparsity together.
    Degenerate,
    /// Low entropy only. Advisory.
    LowDiversity,
    /// High sparsity only. Advisory.
    Sparse,
    Healthy,
}

impl fmt::Display for Degeneration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Degeneration::Random => "random",
            Degeneration::Degenerate => "degenerate",
            Degeneration::LowDiversity => "low_diversity",
            Degeneration::Sparse => "sparse",
            Degeneration::Healthy => "healthy",
        })
    }
}

/// How to read `(H ≥ T_H − m) ∨ (H < h_low) ∧ (S ≥ s_high)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Precedence {
    /// `A ∨ (B ∧ C)`: conjunction binds tighter.
    #[default]
    AndFirst,
    /// `(A ∨ B) ∧ C`: left to right.
    OrFirst,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DegenerationCriteria {
    pub random_margin: f64,
    pub low_entropy: f64,
    pub high_sparsity: f64,
    pub precedence: Precedence,
}

impl Default for DegenerationCriteria {
    fn default() -> Self {
        Self {
            random_margin: 0.02,
            low_entropy: 0.5,
            high_sparsity: 0.14,
            precedence: Precedence::AndFirst,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DegenerationLabel {
    pub label: Degeneration,
    /// Whether the selection criterion removes this layer.
    pub flagged: bool,
    pub entropy: f64,
    pub sparsity: f64,
    pub n: usize,
    pub threshold: f64,
}

pub fn classify_layer(
    entropy: f64,
    sparsity: f64,
    n: usize,
    params: &ThresholdParams,
    criteria: &DegenerationCriteria,
) -> DegenerationLabel {
    let t = threshold(n, params);
    let random = entropy >= t - criteria.random_margin;
    let low = entropy < criteria.low_entropy;
    let sparse = sparsity >= criteria.high_sparsity;

    let (flagged, label) = match criteria.precedence {
        Precedence::AndFirst => {
            let label = if random {
                Degeneration::Random
            } else if low && sparse {
                Degeneration::Degenerate
            } else if low {
                Degeneration::LowDiversity
            } else if sparse {
                Degeneration::Sparse
            } else {
                Degeneration::Healthy
            };
            (random || (low && sparse), label)
        }
        Precedence::OrFirst => {
            let flagged = (random || low) && sparse;
            let label = match (flagged, random, low, sparse) {
                (true, true, _, _) => Degeneration::Random,
                (true, false, _, _) => Degeneration::Degenerate,
                (false, _, true, _) => Degeneration::LowDiversity,
                (false, _, _, true) => Degeneration::Sparse,
                _ => Degeneration::Healthy,
            };
            (flagged, label)
        }
    };

    DegenerationLabel {
        label,
        flagged,
        entropy,
        sparsity,
        n,
        threshold: t,
    }
}

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::histogram::ComponentHistogram;
use super::ShiftError;

/// Logarithm base for divergences. Natural log unless configured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum KlBase {
    #[default]
    E,
    Ten,
    Two,
}

impl KlBase {
    fn ln_base(self) -> f64 {
        match self {
            KlBase::E => 1.0,
            KlBase::Ten => std::f64::consts::LN_10,
            KlBase::Two => std::f64::consts::LN_2,
        }
    }
}

impl fmt::Display for KlBase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            KlBase::E => "e",
            KlBase::Ten => "10",
            KlBase::Two => "2",
        })
    }
}

impl FromStr for KlBase {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "e" => Ok(KlBase::E),
            "10" => Ok(KlBase::Ten),
            "2" => Ok(KlBase::Two),
            _ => Err(format!("kl base '{s}' must be one of e, 10, 2")),
        }
    }
}

/// `KL(P‖Q) + KL(Q‖P)` over two strictly positive probability vectors.
///
/// Each bin contributes `(p − q)(ln p − ln q)`, which is the two KL terms
/// combined. Swapping the arguments negates both factors, so the result is
/// bit-for-bit symmetric and every term is non-negative.
pub fn kl_sym_probs(p: &[f64], q: &[f64], base: KlBase) -> f64 {
    debug_assert_eq!(p.len(), q.len());
    let s: f64 = p
        .iter()
        .zip(q)
        .map(|(&a, &b)| (a - b) * (a.ln() - b.ln()))
        .sum();
    s / base.ln_base()
}

pub fn kl_sym(p: &ComponentHistogram, q: &ComponentHistogram, base: KlBase) -> Result<f64, ShiftError> {
    if p.bin_edges != q.bin_edges || p.probs.len() != q.probs.len() {
        return Err(ShiftError::BinMismatch);
    }
    Ok(kl_sym_probs(&p.probs, &q.probs, base))
}

//! Monte-Carlo estimate of the lowest entropy reached by untrained layers.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::matrix::{FilterMatrix, FILTER_LEN};
use crate::spectra::layer_entropy;

/// Generator recorded alongside sampled results.
pub const RNG_NAME: &str = "ChaCha8 (seed_from_u64(seed), stream = rep index), StandardNormal ziggurat";

/// Generator for repetition `rep`: the seeded ChaCha8 key with the
/// repetition index as stream id. Independent of how many reps are run.
pub fn rep_rng(seed: u64, rep: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(rep);
    rng
}

/// `n` filters with i.i.d. standard normal weights.
pub fn normal_filters<R: Rng>(n: usize, rng: &mut R) -> FilterMatrix<f64> {
    let flat = (0..n * FILTER_LEN).map(|_| rng.sample(StandardNormal)).collect();
    FilterMatrix::from_flat(flat).expect("whole rows")
}

/// Entropy of each of `reps` independently drawn random layers of `n`
/// filters, in repetition order.
pub fn sample_entropies(n: usize, reps: usize, seed: u64) -> Vec<f64> {
    assert!(n >= 2, "entropy needs at least two filters");
    (0..reps as u64)
        .into_par_iter()
        .map(|rep| {
            let m = normal_filters(n, &mut rep_rng(seed, rep));
            layer_entropy(&m).expect("n >= 2")
        })
        .collect()
}

/// Minimum entropy over `reps` random layers of `n` standard-normal filters.
pub fn sample_min_entropy(n: usize, reps: usize, seed: u64) -> f64 {
    assert!(reps >= 1, "at least one repetition");
    sample_entropies(n, reps, seed).into_iter().fold(f64::INFINITY, f64::min)
}

/// splitmix64 finalizer; decorrelates per-size seeds.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed used for layer size `n` within a curve sampled with `seed`.
pub fn size_seed(seed: u64, n: usize) -> u64 {
    mix(seed ^ mix(n as u64))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropySample {
    pub n: usize,
    pub min_entropy: f64,
}

/// Minimum entropy for `n = 2^lo … 2^hi`.
pub fn sample_entropy_curve(log2_lo: u32, log2_hi: u32, reps: usize, seed: u64) -> Vec<EntropySample> {
    (log2_lo..=log2_hi)
        .map(|e| {
            let n = 1usize << e;
            EntropySample {
                n,
                min_entropy: sample_min_entropy(n, reps, size_seed(seed, n)),
            }
        })
        .collect()
}

mod common;

use common::*;
use filterscope_core::degeneracy::*;
use filterscope_core::spectra::CoefficientSet;
use filterscope_core::FilterMatrix;
use proptest::prelude::*;
use rand::Rng;
use rand_distr::StandardNormal;

fn coeffs(rows: Vec<[f64; 9]>) -> CoefficientSet<f64> {
    CoefficientSet { coeffs: FilterMatrix::from_rows(rows), basis_ref: "test".into() }
}

fn gaussian(n: usize, seed: u64) -> Vec<[f64; 9]> {
    let mut r = rng(seed);
    (0..n).map(|_| std::array::from_fn(|_| r.sample(StandardNormal))).collect()
}

fn phenotype(rows: Vec<[f64; 9]>) -> PhenotypeLabel {
    classify_phenotype(&coeffs(rows), ComponentSelection::Pair(0, 1), &PhenotypeRules::default()).unwrap()
}

#[test]
fn gaussian_cloud_is_sun() {
    let p = phenotype(gaussian(5000, 1));
    assert_eq!(p.label, Phenotype::Sun, "{:?}", p.evidence);
    assert!(p.evidence.multimodal_components.is_empty());
    assert_eq!(p.evidence.spike_pair, None);
}

#[test]
fn collapsed_cloud_is_point() {
    let mut rows = gaussian(5000, 2);
    for r in rows.iter_mut().take(4000) {
        *r = [0.0; 9];
    }
    let p = phenotype(rows);
    assert_eq!(p.label, Phenotype::Point, "{:?}", p.evidence);
    assert!(p.evidence.center_fraction >= 0.8);
}

#[test]
fn repeated_filter_is_spikes() {
    let mut rows = gaussian(5000, 3);
    for r in rows.iter_mut().take(1500) {
        r[0] = 2.0;
        r[1] = 0.0;
    }
    let p = phenotype(rows);
    assert_eq!(p.label, Phenotype::Spikes, "{:?}", p.evidence);
    assert_eq!(p.evidence.spike_pair, Some((0, 1)));
    assert!(p.evidence.max_offcenter_bin_mass >= 0.3);
}

#[test]
fn two_clusters_are_symbols() {
    let mut rows = gaussian(5000, 4);
    for (i, r) in rows.iter_mut().enumerate() {
        r[0] = r[0] * 0.5 + if i % 2 == 0 { 3.0 } else { -3.0 };
    }
    let p = phenotype(rows);
    assert_eq!(p.label, Phenotype::Symbols, "{:?}", p.evidence);
    assert_eq!(p.evidence.multimodal_components, [0]);
}

#[test]
fn heavy_tails_are_symbols() {
    let mut r = rng(5);
    let rows: Vec<[f64; 9]> = (0..5000)
        .map(|_| {
            // Cauchy-like: ratio of normals, clipped to keep the grid usable
            std::array::from_fn(|_| {
                let a: f64 = r.sample(StandardNormal);
                let b: f64 = r.sample(StandardNormal);
                (a / b.abs().max(0.05)).clamp(-40.0, 40.0)
            })
        })
        .collect();
    let p = classify_phenotype(&coeffs(rows), ComponentSelection::All, &PhenotypeRules::default()).unwrap();
    assert!(p.evidence.max_excess_kurtosis > 10.0);
    assert_ne!(p.label, Phenotype::Sun);
}

#[test]
fn small_sets_are_unreliable() {
    let err = classify_phenotype(&coeffs(gaussian(50, 6)), ComponentSelection::All, &PhenotypeRules::default());
    assert!(matches!(err, Err(DegeneracyError::Unreliable { n: 50, min: 100 })));
}

#[test]
fn component_out_of_range() {
    let err = classify_phenotype(&coeffs(gaussian(200, 6)), ComponentSelection::Pair(0, 9), &PhenotypeRules::default());
    assert!(matches!(err, Err(DegeneracyError::ComponentOutOfRange(9))));
}

#[test]
fn min_entropy_at_1024_tracks_threshold() {
    let h = sample_min_entropy(1 << 10, 100, 0x5eed);
    let t = threshold(1 << 10, &ThresholdParams::PUBLISHED);
    assert!((h - t).abs() < 0.03, "min H {h} vs T_H {t}");
}

#[test]
fn sampling_is_reproducible_and_seed_dependent() {
    let a = sample_entropies(64, 20, 9);
    assert_eq!(a, sample_entropies(64, 20, 9));
    assert_ne!(a, sample_entropies(64, 20, 10));
    assert!(a.iter().all(|h| (0.0..=9f64.log10()).contains(h)));
}

#[test]
fn entropy_curve_is_increasing_on_average() {
    let curve = sample_entropy_curve(2, 10, 30, 1);
    assert_eq!(curve.iter().map(|s| s.n).collect::<Vec<_>>(), (2..=10).map(|k| 1usize << k).collect::<Vec<_>>());
    assert!(curve.first().unwrap().min_entropy < curve.last().unwrap().min_entropy);
}

#[test]
fn fit_recovers_parameters_of_noisy_curve() {
    let truth = ThresholdParams { l: 1.1, x0: 2.6, k: 1.1, b: -0.2 };
    let mut r = rng(77);
    let samples: Vec<(usize, f64)> = (1..=17)
        .map(|k| (1usize << k, threshold(1 << k, &truth) + r.random_range(-1e-3..1e-3)))
        .collect();
    let fit = fit_threshold(&samples, &LmSettings::default()).unwrap();
    assert!(fit.rms < 1e-3);
    for k in 1..=20 {
        let n = 1usize << k;
        assert!((threshold(n, &fit.params) - threshold(n, &truth)).abs() < 5e-3);
    }
}

#[test]
fn fit_rejects_narrow_samples() {
    let samples: Vec<(usize, f64)> = (0..10).map(|i| (100 + i, 0.9)).collect();
    assert!(matches!(
        fit_threshold(&samples, &LmSettings::default()),
        Err(DegeneracyError::InsufficientSamples { .. })
    ));
}

#[test]
fn precedence_only_matters_for_random_dense_layers() {
    let params = ThresholdParams::PUBLISHED;
    let and = DegenerationCriteria::default();
    let or = DegenerationCriteria { precedence: Precedence::OrFirst, ..and };
    for hi in 0..=100 {
        for si in 0..=20 {
            let (h, s, n) = (hi as f64 * 0.0096, si as f64 * 0.05, 1 << 12);
            let a = classify_layer(h, s, n, &params, &and);
            let o = classify_layer(h, s, n, &params, &or);
            let random = h >= threshold(n, &params) - and.random_margin;
            let sparse = s >= and.high_sparsity;
            assert_eq!(a.flagged != o.flagged, random && !sparse, "H={h} S={s}");
        }
    }
}

proptest! {
    #[test]
    fn threshold_is_monotone(a in 1usize..1 << 30, b in 1usize..1 << 30) {
        let p = ThresholdParams::PUBLISHED;
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(threshold(lo, &p) <= threshold(hi, &p));
        prop_assert!(threshold(hi, &p) < p.asymptote());
    }

    #[test]
    fn labels_are_consistent(h in 0.0f64..1.0, s in 0.0f64..1.0, k in 1u32..24) {
        let c = DegenerationCriteria::default();
        let l = classify_layer(h, s, 1 << k, &ThresholdParams::PUBLISHED, &c);
        match l.label {
            Degeneration::Random | Degeneration::Degenerate => prop_assert!(l.flagged),
            _ => prop_assert!(!l.flagged),
        }
    }
}

#[test]
fn five_point_masses_are_spikes() {
    let centers = [[1.0, 1.0], [-2.0, 0.5], [0.5, -1.5], [3.0, 2.0], [-1.0, -2.5]];
    let rows: Vec<[f64; 9]> = (0..1000)
        .map(|i| {
            let c = centers[i % 5];
            let mut r = [0.0; 9];
            r[0] = c[0];
            r[1] = c[1];
            r
        })
        .collect();
    // direct binning oracle: each mass holds 20% of rows in a single cell
    let p = phenotype(rows);
    assert_eq!(p.label, Phenotype::Spikes, "{:?}", p.evidence);
    assert!((p.evidence.max_offcenter_bin_mass - 0.2).abs() < 1e-12);
}

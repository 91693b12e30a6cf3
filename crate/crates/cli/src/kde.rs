//! Gaussian kernel density curves for export.

use rayon::prelude::*;

pub const KDE_POINTS: usize = 512;

/// Silverman's rule of thumb, `0.9 · min(σ, IQR/1.34) · n^(−1/5)`.
/// Falls back to whichever spread estimate is non-zero; zero if both are.
pub fn silverman_bandwidth(values: &[f64]) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let sd = (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt();
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let q = |p: f64| {
        let h = p * (n - 1) as f64;
        let i = h.floor() as usize;
        let j = (i + 1).min(n - 1);
        sorted[i] + (h - i as f64) * (sorted[j] - sorted[i])
    };
    let iqr = (q(0.75) - q(0.25)) / 1.34;
    let spread = match (sd > 0.0, iqr > 0.0) {
        (true, true) => sd.min(iqr),
        (true, false) => sd,
        (false, true) => iqr,
        (false, false) => 0.0,
    };
    0.9 * spread * (n as f64).powf(-0.2)
}

/// Density on `points` evenly spaced values over `[lo, hi]`.
/// Returns `(x, density)` pairs and the bandwidth used.
pub fn gaussian_kde(values: &[f64], lo: f64, hi: f64, points: usize) -> (Vec<(f64, f64)>, f64) {
    let bw = silverman_bandwidth(values);
    let xs: Vec<f64> = (0..points)
        .map(|i| if points == 1 { lo } else { lo + (hi - lo) * i as f64 / (points - 1) as f64 })
        .collect();
    if values.is_empty() || bw == 0.0 {
        // a point mass has no finite density curve
        return (xs.into_iter().map(|x| (x, 0.0)).collect(), bw);
    }
    let norm = 1.0 / (values.len() as f64 * bw * (2.0 * std::f64::consts::PI).sqrt());
    let curve = xs
        .par_iter()
        .map(|&x| {
            let s: f64 = values.iter().map(|v| (-0.5 * ((x - v) / bw).powi(2)).exp()).sum();
            (x, s * norm)
        })
        .collect();
    (curve, bw)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bandwidth_of_known_sample() {
        // σ = sqrt(2.5), IQR = 2 -> 1.4925...; min is IQR/1.34
        let v = [1.0, 2.0, 3.0, 4.0, 5.0];
        let want = 0.9 * (2.0 / 1.34) * 5f64.powf(-0.2);
        assert!((silverman_bandwidth(&v) - want).abs() < 1e-15);
        assert_eq!(silverman_bandwidth(&[2.0; 10]), 0.0);
    }

    #[test]
    fn density_integrates_to_one() {
        let v: Vec<f64> = (0..200).map(|i| ((i as f64) * 0.7).sin()).collect();
        let (c, bw) = gaussian_kde(&v, -3.0, 3.0, KDE_POINTS);
        assert_eq!(c.len(), KDE_POINTS);
        let dx = c[1].0 - c[0].0;
        let area: f64 = c.iter().map(|p| p.1).sum::<f64>() * dx;
        assert!((area - 1.0).abs() < 1e-3, "{area}");
        assert!(bw > 0.0);
        assert_eq!(c[0].0, -3.0);
        assert_eq!(c[KDE_POINTS - 1].0, 3.0);
    }

    #[test]
    fn single_value_matches_gaussian() {
        // one sample: bandwidth is zero, so use two symmetric ones
        let v = [-1.0, 1.0];
        let bw = silverman_bandwidth(&v);
        let (c, _) = gaussian_kde(&v, 0.0, 0.0, 1);
        let g = |d: f64| (-0.5 * (d / bw).powi(2)).exp() / (bw * (2.0 * std::f64::consts::PI).sqrt());
        assert!((c[0].1 - g(1.0)).abs() < 1e-15);
    }
}

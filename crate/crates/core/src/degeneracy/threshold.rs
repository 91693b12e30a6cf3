use serde::{Deserialize, Serialize};

use super::DegeneracyError;

/// Parameters of the randomness threshold
/// `T_H(n) = L / (1 + exp(−k (log₂ n − x0))) + b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdParams {
    #[serde(rename = "L")]
    pub l: f64,
    pub x0: f64,
    pub k: f64,
    pub b: f64,
}

impl ThresholdParams {
    /// Fit reported for 1000 repetitions and n = 2¹ … 2²¹.
    pub const PUBLISHED: ThresholdParams = ThresholdParams {
        l: 1.26,
        x0: 2.30,
        k: 0.89,
        b: -0.31,
    };

    /// Threshold as a function of `x = log₂ n`.
    pub fn at_log2(&self, x: f64) -> f64 {
        self.l / (1.0 + (-self.k * (x - self.x0)).exp()) + self.b
    }

    pub fn eval(&self, n: f64) -> f64 {
        self.at_log2(n.log2())
    }

    /// `L + b`, the limit for large layers.
    pub fn asymptote(&self) -> f64 {
        self.l + self.b
    }

    fn to_array(self) -> [f64; 4] {
        [self.l, self.x0, self.k, self.b]
    }

    fn from_array(p: [f64; 4]) -> Self {
        Self {
            l: p[0],
            x0: p[1],
            k: p[2],
            b: p[3],
        }
    }
}

impl Default for ThresholdParams {
    fn default() -> Self {
        Self::PUBLISHED
    }
}

/// `T_H(n)` for a layer with `n` filters.
pub fn threshold(n: usize, params: &ThresholdParams) -> f64 {
    params.eval(n as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdFit {
    pub params: ThresholdParams,
    pub rms: f64,
    /// RMS of the best constant model, the bar the sigmoid has to beat.
    pub baseline_rms: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LmSettings {
    pub max_iterations: usize,
    /// Stop once an accepted step changes the RMS by less than this fraction.
    pub rel_tol: f64,
    pub start_k: [f64; 3],
}

impl Default for LmSettings {
    fn default() -> Self {
        Self {
            max_iterations: 500,
            rel_tol: 1e-9,
            start_k: [0.5, 1.0, 2.0],
        }
    }
}

fn rms(p: &ThresholdParams, xs: &[f64], ys: &[f64]) -> f64 {
    let ss: f64 = xs.iter().zip(ys).map(|(&x, &y)| (p.at_log2(x) - y).powi(2)).sum();
    (ss / xs.len() as f64).sqrt()
}

/// Gaussian elimination with partial pivoting.
fn solve4(mut a: [[f64; 4]; 4], mut rhs: [f64; 4]) -> Option<[f64; 4]> {
    for col in 0..4 {
        let piv = (col..4).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, piv);
        rhs.swap(col, piv);
        for r in col + 1..4 {
            let f = a[r][col] / a[col][col];
            for c in col..4 {
                a[r][c] -= f * a[col][c];
            }
            rhs[r] -= f * rhs[col];
        }
    }
    let mut x = [0.0; 4];
    for r in (0..4).rev() {
        let s: f64 = (r + 1..4).map(|c| a[r][c] * x[c]).sum();
        x[r] = (rhs[r] - s) / a[r][r];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}

/// Levenberg–Marquardt on the four sigmoid parameters with the analytic
/// Jacobian. Returns the final parameters and the iteration count.
fn levenberg_marquardt(
    start: ThresholdParams,
    xs: &[f64],
    ys: &[f64],
    settings: &LmSettings,
) -> (ThresholdParams, usize) {
    let mut p = start;
    let mut cost = rms(&p, xs, ys);
    let mut lambda = 1e-3;
    let mut it = 0;
    while it < settings.max_iterations {
        it += 1;
        let mut jtj = [[0.0; 4]; 4];
        let mut jtr = [0.0; 4];
        for (&x, &y) in xs.iter().zip(ys) {
            let s = 1.0 / (1.0 + (-p.k * (x - p.x0)).exp());
            let ds = p.l * s * (1.0 - s);
            let grad = [s, -p.k * ds, (x - p.x0) * ds, 1.0];
            let r = p.l * s + p.b - y;
            for i in 0..4 {
                jtr[i] += grad[i] * r;
                for j in 0..4 {
                    jtj[i][j] += grad[i] * grad[j];
                }
            }
        }

        let mut accepted = false;
        while lambda < 1e16 {
            let mut a = jtj;
            for (i, row) in a.iter_mut().enumerate() {
                row[i] += lambda * jtj[i][i].max(1e-12);
            }
            let Some(step) = solve4(a, jtr.map(|v| -v)) else {
                lambda *= 10.0;
                continue;
            };
            let cur = p.to_array();
            let trial = ThresholdParams::from_array(std::array::from_fn(|i| cur[i] + step[i]));
            let trial_cost = rms(&trial, xs, ys);
            if trial_cost.is_finite() && trial_cost < cost {
                let rel = (cost - trial_cost) / cost;
                p = trial;
                cost = trial_cost;
                lambda = (lambda / 10.0).max(1e-12);
                accepted = true;
                if rel < settings.rel_tol {
                    return (p, it);
                }
                break;
            }
            lambda *= 10.0;
        }
        if !accepted || cost == 0.0 {
            break;
        }
    }
    (p, it)
}

fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let m = s.len() / 2;
    if s.len() % 2 == 0 {
        0.5 * (s[m - 1] + s[m])
    } else {
        s[m]
    }
}

/// Least-squares sigmoid fit to `(n, minimum entropy)` samples in
/// `(log₂ n, H)` space, multi-started over the steepness.
pub fn fit_threshold(samples: &[(usize, f64)], settings: &LmSettings) -> Result<ThresholdFit, DegeneracyError> {
    let mut distinct: Vec<usize> = samples.iter().map(|s| s.0).collect();
    distinct.sort_unstable();
    distinct.dedup();
    let span = match (distinct.first(), distinct.last()) {
        (Some(&lo), Some(&hi)) if lo > 0 => (hi as f64 / lo as f64).log2(),
        _ => 0.0,
    };
    if distinct.len() < 6 || span < 3.0 {
        return Err(DegeneracyError::InsufficientSamples {
            distinct: distinct.len(),
            octaves: span,
        });
    }

    let xs: Vec<f64> = samples.iter().map(|s| (s.0 as f64).log2()).collect();
    let ys: Vec<f64> = samples.iter().map(|s| s.1).collect();
    let mean = ys.iter().sum::<f64>() / ys.len() as f64;
    let baseline_rms = (ys.iter().map(|y| (y - mean).powi(2)).sum::<f64>() / ys.len() as f64).sqrt();

    let (ymin, ymax) = ys
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &y| (a.min(y), b.max(y)));
    let x_mid = median(&xs);

    let mut best: Option<ThresholdFit> = None;
    for &k in &settings.start_k {
        let start = ThresholdParams {
            l: ymax - ymin,
            x0: x_mid,
            k,
            b: ymin,
        };
        let (params, iterations) = levenberg_marquardt(start, &xs, &ys, settings);
        let r = rms(&params, &xs, &ys);
        if r.is_finite() && best.is_none_or(|b| r < b.rms) {
            best = Some(ThresholdFit {
                params,
                rms: r,
                baseline_rms,
                iterations,
            });
        }
    }
    // Flat samples leave the steepness and midpoint unidentifiable.
    let flat = baseline_rms <= 1e-12 * (1.0 + ymax.abs().max(ymin.abs()));
    match best {
        Some(fit) if !flat && fit.rms < baseline_rms => Ok(fit),
        Some(fit) => Err(DegeneracyError::FitDiverged {
            rms: fit.rms,
            baseline: baseline_rms,
        }),
        None => Err(DegeneracyError::FitDiverged {
            rms: f64::NAN,
            baseline: baseline_rms,
        }),
    }
}

use anyhow::{bail, Result};
use filterscope_core::degeneracy::{
    fit_threshold, sample_entropy_curve, threshold, EntropySample, LmSettings, ThresholdParams, RNG_NAME,
};
use serde::Serialize;

use crate::args::GlobalArgs;
use crate::output::{num, Output};
use crate::render::plot::{Series, Style, XyPlot, PALETTE};

/// Largest supported sample size, 2^MAX_LOG2 filters per draw.
const MAX_LOG2: u32 = 22;

#[derive(Serialize)]
struct FitReport<'a> {
    #[serde(rename = "L")]
    l: f64,
    x0: f64,
    k: f64,
    b: f64,
    rms: f64,
    n_values: Vec<usize>,
    reps: usize,
    seed: u64,
    rng: &'static str,
    iterations: usize,
    samples: &'a [EntropySample],
}

pub fn run(out: &mut Output, g: &GlobalArgs, log2_min: u32, log2_max: u32, reps: usize) -> Result<()> {
    if log2_min < 1 || log2_min > log2_max || log2_max > MAX_LOG2 {
        bail!("need 1 <= --log2-min <= --log2-max <= {MAX_LOG2}");
    }
    let samples = sample_entropy_curve(log2_min, log2_max, reps, g.seed);
    let pairs: Vec<(usize, f64)> = samples.iter().map(|s| (s.n, s.min_entropy)).collect();
    let fit = fit_threshold(&pairs, &LmSettings::default())?;
    let p = fit.params;

    out.json(
        "threshold.json",
        &FitReport {
            l: p.l,
            x0: p.x0,
            k: p.k,
            b: p.b,
            rms: fit.rms,
            n_values: samples.iter().map(|s| s.n).collect(),
            reps,
            seed: g.seed,
            rng: RNG_NAME,
            iterations: fit.iterations,
            samples: &samples,
        },
    )?;
    let published = ThresholdParams::PUBLISHED;
    let rows: Vec<Vec<String>> = samples
        .iter()
        .map(|s| {
            vec![
                s.n.to_string(),
                num(s.min_entropy),
                num(threshold(s.n, &p)),
                num(threshold(s.n, &published)),
            ]
        })
        .collect();
    out.csv("threshold.csv", &["n", "min_entropy", "fitted", "builtin"], &rows)?;

    let curve = |q: ThresholdParams| {
        (0..=100)
            .map(|i| {
                let x = log2_min as f64 + (log2_max - log2_min) as f64 * i as f64 / 100.0;
                (x, q.at_log2(x))
            })
            .collect()
    };
    let plot = XyPlot {
        title: format!("Minimum entropy of normal filters ({reps} reps)"),
        x_label: "log2 n".into(),
        y_label: "min H".into(),
        series: vec![
            Series {
                name: "samples".into(),
                points: samples.iter().map(|s| ((s.n as f64).log2(), s.min_entropy)).collect(),
                style: Style::Dots,
                color: PALETTE[0],
            },
            Series {
                name: "fit".into(),
                points: curve(p),
                style: Style::Line,
                color: PALETTE[1],
            },
            Series {
                name: "builtin".into(),
                points: curve(published),
                style: Style::Dashed,
                color: PALETTE[5],
            },
        ],
    };
    out.text("threshold.svg", &plot.render(&out.prov.line()))?;
    println!("L={} x0={} k={} b={} rms={}", p.l, p.x0, p.k, p.b, fit.rms);
    Ok(())
}

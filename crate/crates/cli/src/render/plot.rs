//! Small fixed-layout charts built on [`Svg`].

use filterscope_core::shift::Summary;
use filterscope_core::spectra::PcaBasis;

use super::colormap::{diverging, hex, sequential};
use super::svg::Svg;

pub const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#7f7f7f"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Style {
    Line,
    Dashed,
    Dots,
}

#[derive(Debug, Clone)]
pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
    pub style: Style,
    pub color: &'static str,
}

#[derive(Debug, Clone)]
pub struct XyPlot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
}

fn extent(vals: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = vals
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        (0.0, 1.0)
    } else if lo == hi {
        (lo - 0.5, hi + 0.5)
    } else {
        let pad = (hi - lo) * 0.05;
        (lo - pad, hi + pad)
    }
}

fn tick_label(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else if v.abs() >= 1e4 || v.abs() < 1e-2 {
        format!("{v:.1e}")
    } else {
        let s = format!("{v:.3}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

const W: f64 = 640.0;
const H: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 160.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;

impl XyPlot {
    pub fn render(&self, meta: &str) -> String {
        let (x0, x1) = extent(self.series.iter().flat_map(|s| s.points.iter().map(|p| p.0)));
        let (y0, y1) = extent(self.series.iter().flat_map(|s| s.points.iter().map(|p| p.1)));
        let (pw, ph) = (W - LEFT - RIGHT, H - TOP - BOTTOM);
        let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * pw;
        let sy = |y: f64| TOP + ph - (y - y0) / (y1 - y0) * ph;

        let mut svg = Svg::new(W, H, meta);
        svg.text(W / 2.0, 22.0, 14.0, "middle", &self.title);
        svg.line(LEFT, TOP + ph, LEFT + pw, TOP + ph, "black");
        svg.line(LEFT, TOP, LEFT, TOP + ph, "black");
        for k in 0..=5 {
            let (xv, yv) = (x0 + (x1 - x0) * k as f64 / 5.0, y0 + (y1 - y0) * k as f64 / 5.0);
            svg.line(sx(xv), TOP + ph, sx(xv), TOP + ph + 4.0, "black");
            svg.text(sx(xv), TOP + ph + 16.0, 10.0, "middle", &tick_label(xv));
            svg.line(LEFT - 4.0, sy(yv), LEFT, sy(yv), "black");
            svg.text(LEFT - 6.0, sy(yv) + 3.0, 10.0, "end", &tick_label(yv));
        }
        svg.text(LEFT + pw / 2.0, H - 10.0, 12.0, "middle", &self.x_label);
        svg.rotated_text(16.0, TOP + ph / 2.0, 12.0, "middle", -90.0, &self.y_label);

        for (i, s) in self.series.iter().enumerate() {
            let pts: Vec<(f64, f64)> = s
                .points
                .iter()
                .filter(|p| p.0.is_finite() && p.1.is_finite())
                .map(|&(x, y)| (sx(x), sy(y)))
                .collect();
            match s.style {
                Style::Line => svg.polyline(&pts, s.color, false),
                Style::Dashed => svg.polyline(&pts, s.color, true),
                Style::Dots => {
                    for &(x, y) in &pts {
                        svg.circle(x, y, 2.5, s.color, None);
                    }
                }
            }
            let ly = TOP + 10.0 + 18.0 * i as f64;
            svg.rect(LEFT + pw + 12.0, ly - 8.0, 10.0, 10.0, s.color, None);
            svg.text(LEFT + pw + 28.0, ly + 1.0, 11.0, "start", &s.name);
        }
        svg.finish()
    }
}

/// Labelled square matrix on a white-to-red scale.
pub fn heatmap(title: &str, labels: &[String], values: &[Vec<f64>], meta: &str) -> String {
    let n = labels.len();
    let cell = (480.0 / n.max(1) as f64).clamp(4.0, 48.0);
    let label_w = 12.0 + 6.5 * labels.iter().map(|l| l.chars().count()).max().unwrap_or(0).min(40) as f64;
    let (x0, y0) = (label_w, 40.0 + label_w);
    let width = x0 + cell * n as f64 + 90.0;
    let height = y0 + cell * n as f64 + 20.0;
    let max = values.iter().flatten().copied().filter(|v| v.is_finite()).fold(0.0, f64::max);

    let mut svg = Svg::new(width, height, meta);
    svg.text(width / 2.0, 22.0, 14.0, "middle", title);
    let font = (cell * 0.6).min(11.0);
    for (i, l) in labels.iter().enumerate() {
        let c = (i as f64 + 0.5) * cell;
        svg.text(x0 - 4.0, y0 + c + font / 3.0, font, "end", l);
        svg.rotated_text(x0 + c + font / 3.0, y0 - 4.0, font, "start", -90.0, l);
    }
    for (i, row) in values.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            let title = format!("{} / {}: {v}", labels[i], labels[j]);
            svg.rect(x0 + j as f64 * cell, y0 + i as f64 * cell, cell, cell, &hex(sequential(v, max)), Some(&title));
            if n <= 12 {
                svg.text(
                    x0 + (j as f64 + 0.5) * cell,
                    y0 + (i as f64 + 0.5) * cell + 3.0,
                    9.0,
                    "middle",
                    &tick_label(v),
                );
            }
        }
    }
    // color bar
    let bx = x0 + cell * n as f64 + 20.0;
    let bh = cell * n as f64;
    for k in 0..50 {
        let v = max * (1.0 - k as f64 / 50.0);
        svg.rect(bx, y0 + bh * k as f64 / 50.0, 14.0, bh / 50.0 + 0.5, &hex(sequential(v, max)), None);
    }
    svg.text(bx + 18.0, y0 + 8.0, 10.0, "start", &tick_label(max));
    svg.text(bx + 18.0, y0 + bh, 10.0, "start", "0");
    svg.finish()
}

/// The nine principal components as 3x3 tiles, with the cumulative
/// explained variance underneath.
pub fn basis_figure(title: &str, basis: &PcaBasis, meta: &str) -> String {
    let (cell, tile, gap) = (18.0, 54.0, 16.0);
    let width = 9.0 * (tile + gap) + gap;
    let chart_top = 130.0;
    let chart_h = 160.0;
    let height = chart_top + chart_h + 50.0;

    let mut svg = Svg::new(width, height, meta);
    svg.text(width / 2.0, 22.0, 14.0, "middle", title);
    for (k, comp) in basis.components.iter().enumerate() {
        let x0 = gap + k as f64 * (tile + gap);
        let y0 = 50.0;
        let max_abs = comp.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for (j, &w) in comp.iter().enumerate() {
            let c = hex(diverging(w, max_abs));
            svg.rect(x0 + (j % 3) as f64 * cell, y0 + (j / 3) as f64 * cell, cell, cell, &c, Some(&format!("{w}")));
        }
        svg.text(x0 + tile / 2.0, y0 + tile + 14.0, 10.0, "middle", &format!("PC{k}"));
        svg.text(
            x0 + tile / 2.0,
            y0 + tile + 26.0,
            9.0,
            "middle",
            &format!("{:.3}", basis.explained_variance_ratio[k]),
        );
    }

    let cum = basis.cumulative_variance();
    let (cx0, cx1) = (gap + tile / 2.0, gap + 8.0 * (tile + gap) + tile / 2.0);
    let sy = |v: f64| chart_top + chart_h - v * chart_h;
    svg.line(cx0, sy(0.0), cx1, sy(0.0), "black");
    svg.line(cx0, sy(0.0), cx0, sy(1.0), "black");
    for t in [0.0, 0.5, 1.0] {
        svg.text(cx0 - 4.0, sy(t) + 3.0, 9.0, "end", &tick_label(t));
    }
    let xs = |k: usize| cx0 + (cx1 - cx0) * k as f64 / 8.0;
    let bars: Vec<(f64, f64)> = (0..9).map(|k| (xs(k), sy(basis.explained_variance_ratio[k]))).collect();
    for &(x, y) in &bars {
        svg.rect(x - 8.0, y, 16.0, sy(0.0) - y, PALETTE[0], None);
    }
    let pts: Vec<(f64, f64)> = (0..9).map(|k| (xs(k), sy(cum[k]))).collect();
    svg.polyline(&pts, PALETTE[1], false);
    for &(x, y) in &pts {
        svg.circle(x, y, 2.5, PALETTE[1], None);
    }
    svg.text(width / 2.0, height - 12.0, 11.0, "middle", "explained variance ratio (bars) and cumulative (line)");
    svg.finish()
}

/// One box (quartiles, median, whiskers at min/max) per category.
pub fn boxplot(title: &str, y_label: &str, boxes: &[(String, Summary)], meta: &str) -> String {
    let (y0, y1) = extent(boxes.iter().flat_map(|(_, s)| [s.min, s.max]));
    let y0 = y0.min(0.0);
    let n = boxes.len().max(1);
    let (pw, ph) = (W - LEFT - 40.0, H - TOP - BOTTOM);
    let step = pw / n as f64;
    let sy = |y: f64| TOP + ph - (y - y0) / (y1 - y0) * ph;

    let mut svg = Svg::new(W, H, meta);
    svg.text(W / 2.0, 22.0, 14.0, "middle", title);
    svg.line(LEFT, TOP + ph, LEFT + pw, TOP + ph, "black");
    svg.line(LEFT, TOP, LEFT, TOP + ph, "black");
    for k in 0..=5 {
        let yv = y0 + (y1 - y0) * k as f64 / 5.0;
        svg.text(LEFT - 6.0, sy(yv) + 3.0, 10.0, "end", &tick_label(yv));
    }
    svg.rotated_text(16.0, TOP + ph / 2.0, 12.0, "middle", -90.0, y_label);
    for (i, (label, s)) in boxes.iter().enumerate() {
        let cx = LEFT + step * (i as f64 + 0.5);
        let hw = (step * 0.3).min(30.0);
        svg.line(cx, sy(s.min), cx, sy(s.q1), "black");
        svg.line(cx, sy(s.q3), cx, sy(s.max), "black");
        let tip = format!("{label}: n={} median={}", s.count, s.median);
        svg.rect(cx - hw, sy(s.q3), 2.0 * hw, (sy(s.q1) - sy(s.q3)).max(0.5), "#9ecae1", Some(&tip));
        svg.line(cx - hw, sy(s.median), cx + hw, sy(s.median), "black");
        svg.text(cx, TOP + ph + 16.0, 10.0, "middle", label);
    }
    svg.finish()
}

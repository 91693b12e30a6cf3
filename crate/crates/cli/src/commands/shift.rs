use anyhow::{bail, Result};
use filterscope_core::shift::{decile_shift, pairwise_drift, DriftConfig, HistogramRange, Summary};
use filterscope_core::spectra::{project, PcaBasis};
use filterscope_core::store::{Dimension, FilterStore};
use filterscope_core::{FilterMatrix, FilterSet};
use serde::Serialize;

use super::{analysis_filters, group_rows, load_store, model_name, resolve_basis, rows_of, selected_layers};
use crate::args::{AnalysisArgs, GlobalArgs, RangeMode, StoreArgs};
use crate::kde::{gaussian_kde, KDE_POINTS};
use crate::output::{num, Output};
use crate::render::plot::{boxplot, heatmap};

fn coefficient_range<S: FilterSet<f32>>(filters: &S, basis: &PcaBasis) -> Option<(f64, f64)> {
    project(filters, basis).range()
}

fn drift_config(g: &GlobalArgs, range: RangeMode, global: Option<(f64, f64)>) -> DriftConfig {
    DriftConfig {
        kl_base: g.kl_base,
        range: match (range, global) {
            (RangeMode::Global, Some((lo, hi))) => HistogramRange::Fixed(lo, hi),
            _ => HistogramRange::Union,
        },
    }
}

#[derive(Serialize)]
struct ShiftFile<'a> {
    dimension: String,
    labels: &'a [String],
    sizes: Vec<usize>,
    values: &'a [Vec<f64>],
    basis_ref: &'a str,
    kl_base: String,
    range: HistogramRange,
    normalized: bool,
}

pub fn run_shift(
    out: &mut Output,
    g: &GlobalArgs,
    args: &StoreArgs,
    dim: Dimension,
    analysis: &AnalysisArgs,
    range: RangeMode,
    kde: bool,
) -> Result<()> {
    let store = load_store(&args.store)?;
    let layers = selected_layers(&store, &args.select);
    let filters = analysis_filters(&store, analysis.raw);
    let all_rows = rows_of(&store, &layers);
    let groups = group_rows(&store, &layers, dim);
    if groups.len() < 2 {
        bail!("shift needs at least 2 non-empty groups along {dim}, found {}", groups.len());
    }
    let basis = resolve_basis(&analysis.basis, &filters, &all_rows)?;
    let global = coefficient_range(&filters.select(&all_rows), &basis);
    let cfg = drift_config(g, range, global);

    let views: Vec<(String, _)> = groups
        .iter()
        .map(|(k, rows)| (k.value.to_string(), filters.select(rows)))
        .collect();
    let m = pairwise_drift(&views, &basis, &cfg)?;

    let stem = format!("shift_{dim}");
    let mut header = vec!["group".to_string()];
    header.extend(m.labels.iter().cloned());
    let rows: Vec<Vec<String>> = m
        .labels
        .iter()
        .zip(&m.values)
        .map(|(l, r)| std::iter::once(l.clone()).chain(r.iter().map(|v| num(*v))).collect())
        .collect();
    out.csv(&format!("{stem}.csv"), &header.iter().map(String::as_str).collect::<Vec<_>>(), &rows)?;
    out.json(
        &format!("{stem}.json"),
        &ShiftFile {
            dimension: dim.to_string(),
            labels: &m.labels,
            sizes: groups.iter().map(|(_, r)| r.len()).collect(),
            values: &m.values,
            basis_ref: &m.basis_ref,
            kl_base: m.kl_base.to_string(),
            range: cfg.range,
            normalized: !analysis.raw,
        },
    )?;
    let title = format!("Drift D between {dim} groups");
    out.text(&format!("{stem}.svg"), &heatmap(&title, &m.labels, &m.values, &out.prov.line()))?;

    if kde {
        write_kde(out, &stem, &views, &basis)?;
    }
    Ok(())
}

/// One KDE curve per (group, component) over the component's range across
/// all groups.
fn write_kde<S: FilterSet<f32>>(out: &mut Output, stem: &str, views: &[(String, S)], basis: &PcaBasis) -> Result<()> {
    let coeffs: Vec<Vec<Vec<f64>>> = views
        .iter()
        .map(|(_, v)| {
            let c = project(v, basis);
            (0..9)
                .map(|k| c.coeffs.rows().map(|r| r[k] as f64).collect())
                .collect()
        })
        .collect();
    let mut rows = Vec::new();
    for k in 0..9 {
        let (lo, hi) = coeffs
            .iter()
            .flat_map(|g| g[k].iter())
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
        for ((label, _), g) in views.iter().zip(&coeffs) {
            let (curve, bw) = gaussian_kde(&g[k], lo, hi, KDE_POINTS);
            for (x, d) in curve {
                rows.push(vec![label.clone(), k.to_string(), num(bw), num(x), num(d)]);
            }
        }
    }
    out.csv(&format!("{stem}_kde.csv"), &["group", "component", "bandwidth", "x", "density"], &rows)
}

/// The selected layers as a store of their own.
fn substore(store: &FilterStore, layers: &[usize]) -> FilterStore {
    let mut s = FilterStore::new();
    s.models = store.models.clone();
    let mut filters = FilterMatrix::with_capacity(layers.iter().map(|&l| store.layers[l].filter_count).sum());
    for &l in layers {
        let mut rec = store.layers[l].clone();
        let range = rec.filter_range();
        rec.filter_start = filters.n_rows();
        filters.extend_from_slice(&store.filters.as_flat()[range.start * 9..range.end * 9]);
        s.layers.push(rec);
    }
    s.filters = filters;
    s
}

#[derive(Serialize)]
struct DecileRow {
    decile: u8,
    pairs: Vec<(String, String, f64)>,
    summary: Option<Summary>,
}

pub fn run_decile(out: &mut Output, g: &GlobalArgs, args: &StoreArgs, analysis: &AnalysisArgs, range: RangeMode) -> Result<()> {
    let full = load_store(&args.store)?;
    let layers = selected_layers(&full, &args.select);
    let store = substore(&full, &layers);
    let filters = analysis_filters(&store, analysis.raw);
    let all_rows: Vec<usize> = (0..store.len()).collect();
    if all_rows.is_empty() {
        bail!("no filters selected");
    }
    let basis = resolve_basis(&analysis.basis, &filters, &all_rows)?;
    let cfg = drift_config(g, range, coefficient_range(&filters, &basis));
    let mut models: Vec<u32> = store.layers.iter().map(|l| l.model_id).collect();
    models.sort_unstable();
    models.dedup();
    if models.len() < 2 {
        bail!("decile shift needs at least 2 models, found {}", models.len());
    }
    let result = decile_shift(&store, &filters, &models, &basis, &cfg)?;

    let mut pair_rows = Vec::new();
    let mut summary_rows = Vec::new();
    let mut boxes = Vec::new();
    let mut json = Vec::new();
    for d in &result {
        let pairs: Vec<(String, String, f64)> = d
            .pairs
            .iter()
            .map(|p| (model_name(&store, p.model_a), model_name(&store, p.model_b), p.drift))
            .collect();
        for (a, b, v) in &pairs {
            pair_rows.push(vec![d.decile.to_string(), a.clone(), b.clone(), num(*v)]);
        }
        if let Some(s) = d.summary {
            summary_rows.push(vec![
                d.decile.to_string(),
                s.count.to_string(),
                num(s.min),
                num(s.q1),
                num(s.median),
                num(s.q3),
                num(s.max),
            ]);
            boxes.push((d.decile.to_string(), s));
        }
        json.push(DecileRow {
            decile: d.decile,
            pairs,
            summary: d.summary,
        });
    }
    out.csv("decile_shift.csv", &["decile", "model_a", "model_b", "drift"], &pair_rows)?;
    out.csv(
        "decile_summary.csv",
        &["decile", "count", "min", "q1", "median", "q3", "max"],
        &summary_rows,
    )?;
    out.json(
        "decile_shift.json",
        &serde_json::json!({
            "basis_ref": basis.id(),
            "kl_base": g.kl_base.to_string(),
            "range": cfg.range,
            "normalized": !analysis.raw,
            "deciles": json,
        }),
    )?;
    out.text(
        "decile_shift.svg",
        &boxplot("Model-to-model drift per conv-depth decile", "drift D", &boxes, &out.prov.line()),
    )?;
    Ok(())
}

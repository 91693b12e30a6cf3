use std::collections::BTreeMap;

use anyhow::Result;
use filterscope_core::degeneracy::{classify_layer, threshold, DegenerationCriteria};
use filterscope_core::spectra::layer_stats;
use rayon::prelude::*;
use serde::Serialize;

use super::{load_store, model_name, selected_layers, threshold_params};
use crate::args::{GlobalArgs, StoreArgs};
use crate::output::{num, opt_num, Output};
use crate::render::plot::{Series, Style, XyPlot, PALETTE};

#[derive(Serialize)]
struct Summary {
    layers: usize,
    mean_sparsity: Option<f64>,
    mean_entropy: Option<f64>,
    labels: BTreeMap<String, usize>,
    threshold_params: filterscope_core::degeneracy::ThresholdParams,
    criteria: DegenerationCriteria,
    eps0: String,
}

pub fn run(out: &mut Output, g: &GlobalArgs, args: &StoreArgs, criteria: &DegenerationCriteria) -> Result<()> {
    let store = load_store(&args.store)?;
    let params = threshold_params(&g.threshold_params)?;
    let layers = selected_layers(&store, &args.select);

    let results = layers
        .par_iter()
        .map(|&l| {
            let layer = &store.layers[l];
            let filters = store.filters.slice_rows(layer.filter_range());
            let st = layer_stats(&filters, g.eps0).ok();
            (l, st)
        })
        .collect::<Vec<_>>();

    let mut rows = Vec::new();
    let mut labels = BTreeMap::new();
    let mut points: BTreeMap<String, Vec<(f64, f64)>> = BTreeMap::new();
    let (mut s_sum, mut h_sum, mut s_n, mut h_n) = (0.0, 0.0, 0usize, 0usize);
    for (l, st) in &results {
        let layer = &store.layers[*l];
        let n = layer.filter_count;
        let t = threshold(n.max(1), &params);
        let (s, h, label, flagged, scale) = match st {
            Some(st) => {
                s_sum += st.sparsity;
                s_n += 1;
                let (label, flagged) = match st.entropy {
                    Some(h) => {
                        h_sum += h;
                        h_n += 1;
                        let c = classify_layer(h, st.sparsity, n, &params, criteria);
                        points.entry(c.label.to_string()).or_default().push((st.sparsity, h));
                        (c.label.to_string(), c.flagged.to_string())
                    }
                    None => ("n/a".to_string(), String::new()),
                };
                (Some(st.sparsity), st.entropy, label, flagged, Some(st.mean_scale))
            }
            None => (None, None, "n/a".to_string(), String::new(), None),
        };
        *labels.entry(label.clone()).or_insert(0) += 1;
        rows.push(vec![
            model_name(&store, layer.model_id),
            layer.layer_index.to_string(),
            layer.name.clone(),
            num(layer.conv_depth_norm),
            n.to_string(),
            opt_num(s),
            opt_num(h),
            num(t),
            label,
            flagged,
            opt_num(scale),
        ]);
    }

    out.csv(
        "stats.csv",
        &[
            "model",
            "layer",
            "name",
            "conv_depth_norm",
            "n",
            "S",
            "H",
            "T_H",
            "label",
            "flagged",
            "mean_scale",
        ],
        &rows,
    )?;
    let summary = Summary {
        layers: rows.len(),
        mean_sparsity: (s_n > 0).then(|| s_sum / s_n as f64),
        mean_entropy: (h_n > 0).then(|| h_sum / h_n as f64),
        labels,
        threshold_params: params,
        criteria: *criteria,
        eps0: g.eps0.to_string(),
    };
    out.json("stats_summary.json", &summary)?;

    let plot = XyPlot {
        title: "Layer entropy vs sparsity".into(),
        x_label: "sparsity S".into(),
        y_label: "entropy H".into(),
        series: points
            .into_iter()
            .enumerate()
            .map(|(i, (name, pts))| Series {
                name,
                points: pts,
                style: Style::Dots,
                color: PALETTE[i % PALETTE.len()],
            })
            .collect(),
    };
    out.text("stats.svg", &plot.render(&out.prov.line()))?;
    println!(
        "{} layers, mean S {}, mean H {}",
        summary.layers,
        opt_num(summary.mean_sparsity),
        opt_num(summary.mean_entropy)
    );
    Ok(())
}

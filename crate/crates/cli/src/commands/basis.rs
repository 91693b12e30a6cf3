use anyhow::{bail, Result};
use filterscope_core::spectra::{fit_pca, PcaBasis};
use filterscope_core::store::Dimension;
use serde::Serialize;

use super::{analysis_filters, group_rows, load_store, rows_of, selected_layers};
use crate::args::StoreArgs;
use crate::output::{num, slug, Output};
use crate::render::plot::basis_figure;

#[derive(Serialize)]
struct BasisFile<'a> {
    group: String,
    n: usize,
    normalized: bool,
    basis: &'a PcaBasis,
}

pub fn run(out: &mut Output, args: &StoreArgs, group_by: Option<Dimension>, raw: bool) -> Result<()> {
    let store = load_store(&args.store)?;
    let layers = selected_layers(&store, &args.select);
    let filters = analysis_filters(&store, raw);

    let groups: Vec<(String, String, Vec<usize>)> = match group_by {
        None => vec![("all".into(), "all".into(), rows_of(&store, &layers))],
        Some(dim) => group_rows(&store, &layers, dim)
            .into_iter()
            .enumerate()
            .map(|(i, (k, rows))| (k.to_string(), format!("{i:02}_{}", slug(&k.value.to_string())), rows))
            .collect(),
    };

    let mut fitted = 0;
    for (label, file_key, rows) in &groups {
        if rows.len() < 2 {
            log::warn!("{label}: {} filters, need at least 2 for a basis; skipped", rows.len());
            continue;
        }
        let basis = fit_pca(&filters.select(rows))?;
        out.json(
            &format!("basis_{file_key}.json"),
            &BasisFile {
                group: label.clone(),
                n: rows.len(),
                normalized: !raw,
                basis: &basis,
            },
        )?;
        let title = format!("PCA basis of {label} ({} filters)", rows.len());
        out.text(&format!("basis_{file_key}.svg"), &basis_figure(&title, &basis, &out.prov.line()))?;
        let cum = basis.cumulative_variance();
        let rows: Vec<Vec<String>> = (0..9)
            .map(|k| {
                vec![
                    k.to_string(),
                    num(basis.explained_variance_ratio[k]),
                    num(cum[k]),
                    num(basis.singular_values[k]),
                ]
            })
            .collect();
        out.csv(
            &format!("cumvar_{file_key}.csv"),
            &["component", "explained_variance_ratio", "cumulative", "singular_value"],
            &rows,
        )?;
        fitted += 1;
    }
    if fitted == 0 {
        bail!("no group has at least 2 filters");
    }
    Ok(())
}

use anyhow::{bail, Result};
use filterscope_core::degeneracy::{classify_phenotype, ComponentSelection, DegeneracyError, PhenotypeRules};
use filterscope_core::spectra::project;
use filterscope_core::store::Dimension;
use serde_json::json;

use super::{analysis_filters, group_rows, load_store, resolve_basis, rows_of, selected_layers};
use crate::args::{AnalysisArgs, StoreArgs};
use crate::output::{num, Output};

pub fn run(
    out: &mut Output,
    args: &StoreArgs,
    dim: Dimension,
    analysis: &AnalysisArgs,
    selection: ComponentSelection,
    rules: &PhenotypeRules,
) -> Result<()> {
    let store = load_store(&args.store)?;
    let layers = selected_layers(&store, &args.select);
    let filters = analysis_filters(&store, analysis.raw);
    let all_rows = rows_of(&store, &layers);
    if all_rows.len() < 2 {
        bail!("need at least 2 selected filters");
    }
    let basis = resolve_basis(&analysis.basis, &filters, &all_rows)?;

    let mut rows = Vec::new();
    let mut records = Vec::new();
    for (key, idx) in group_rows(&store, &layers, dim) {
        let coeffs = project(&filters.select(&idx), &basis);
        let group = key.value.to_string();
        match classify_phenotype(&coeffs, selection, rules) {
            Ok(p) => {
                let e = &p.evidence;
                rows.push(vec![
                    group.clone(),
                    idx.len().to_string(),
                    p.label.to_string(),
                    num(e.center_fraction),
                    num(e.max_offcenter_bin_mass),
                    e.spike_pair.map(|(i, j)| format!("{i}-{j}")).unwrap_or_default(),
                    e.multimodal_components.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(" "),
                    num(e.max_excess_kurtosis),
                ]);
                records.push(json!({"group": group, "n": idx.len(), "label": p.label, "evidence": e}));
            }
            Err(DegeneracyError::Unreliable { .. }) => {
                let mut r = vec![group.clone(), idx.len().to_string(), "unreliable".into()];
                r.resize(8, String::new());
                rows.push(r);
                records.push(json!({"group": group, "n": idx.len(), "label": "unreliable"}));
            }
            Err(e) => return Err(e.into()),
        }
    }
    out.csv(
        "phenotype.csv",
        &[
            "group",
            "n",
            "label",
            "center_fraction",
            "max_offcenter_bin_mass",
            "spike_pair",
            "multimodal_components",
            "max_excess_kurtosis",
        ],
        &rows,
    )?;
    out.json(
        "phenotype.json",
        &json!({
            "dimension": dim.to_string(),
            "basis_ref": basis.id(),
            "components": format!("{selection:?}"),
            "rules": rules,
            "groups": records,
        }),
    )?;
    Ok(())
}

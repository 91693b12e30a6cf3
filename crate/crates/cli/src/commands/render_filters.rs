use anyhow::{bail, Result};
use filterscope_core::spectra::max_abs;

use super::{load_store, model_name, selected_layers};
use crate::args::StoreArgs;
use crate::output::{slug, Output};
use crate::render::{filter_grid, GridLayout};

pub fn run(out: &mut Output, args: &StoreArgs, columns: Option<usize>, cell: usize, gap: usize) -> Result<()> {
    let store = load_store(&args.store)?;
    let layers = selected_layers(&store, &args.select);
    if layers.is_empty() {
        bail!("no layers selected");
    }
    for l in layers {
        let layer = &store.layers[l];
        let filters = store.filters.slice_rows(layer.filter_range());
        let tiles: Vec<[f32; 9]> = filters.rows().map(|r| r.try_into().expect("9 weights")).collect();
        let peak = max_abs(&filters);
        let cols = columns.unwrap_or((layer.c_in / layer.groups.max(1)).max(1));
        let model = model_name(&store, layer.model_id);
        let comments = [
            out.prov.line(),
            format!("layer {model}:{} {} max_abs={peak}", layer.layer_index, layer.name),
        ];
        let img = filter_grid(&tiles, peak, GridLayout { columns: cols, cell, gap }, &comments);
        out.bytes(&format!("filters_{}_{:03}.ppm", slug(&model), layer.layer_index), &img)?;
    }
    Ok(())
}

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{bail, Context, Result};
use filterscope_core::degeneracy::ThresholdParams;
use filterscope_core::spectra::{normalize_filters, PcaBasis};
use filterscope_core::store::{Dimension, FilterStore, GroupKey, Selector};
use filterscope_core::FilterMatrix;

use crate::args::{BasisSource, Cli, Command, ThresholdSource};
use crate::output::{report, Output, Provenance};

mod basis;
mod extract;
mod phenotype;
mod render_filters;
mod shift;
mod stats;
mod threshold;

pub fn run(cli: Cli) -> Result<()> {
    let prov = Provenance::new(&cli.global, &cli.command);
    let mut out = Output::new(&cli.global.out, prov)?;
    let g = &cli.global;
    match &cli.command {
        Command::Extract {
            models,
            manifest,
            store_name,
            task,
            visual_category,
            training_dataset,
        } => extract::run(
            &mut out,
            models,
            manifest.as_deref(),
            store_name,
            [task, visual_category, training_dataset],
        )?,
        Command::Stats {
            store,
            precedence,
            random_margin,
            low_entropy,
            high_sparsity,
        } => {
            let criteria = filterscope_core::degeneracy::DegenerationCriteria {
                random_margin: *random_margin,
                low_entropy: *low_entropy,
                high_sparsity: *high_sparsity,
                precedence: (*precedence).into(),
            };
            stats::run(&mut out, g, store, &criteria)?
        }
        Command::FitThreshold { log2_min, log2_max, reps } => {
            threshold::run(&mut out, g, *log2_min, *log2_max, *reps as usize)?
        }
        Command::Basis { store, group_by, raw } => basis::run(&mut out, store, *group_by, *raw)?,
        Command::Shift {
            store,
            group_by,
            analysis,
            range,
            kde,
        } => shift::run_shift(&mut out, g, store, *group_by, analysis, *range, *kde)?,
        Command::DecileShift { store, analysis, range } => {
            shift::run_decile(&mut out, g, store, analysis, *range)?
        }
        Command::Phenotype {
            store,
            group_by,
            analysis,
            components,
            min_coefficients,
            point_fraction,
            point_radius,
            spike_mass,
            max_excess_kurtosis,
        } => {
            let rules = filterscope_core::degeneracy::PhenotypeRules {
                min_coefficients: *min_coefficients,
                point_fraction: *point_fraction,
                point_radius: *point_radius,
                spike_mass: *spike_mass,
                max_excess_kurtosis: *max_excess_kurtosis,
                ..Default::default()
            };
            phenotype::run(&mut out, store, *group_by, analysis, components.0, &rules)?
        }
        Command::RenderFilters {
            store,
            columns,
            cell,
            gap,
        } => render_filters::run(&mut out, store, *columns, *cell as usize, *gap as usize)?,
    }
    report(&out);
    Ok(())
}

pub(crate) fn load_store(path: &Path) -> Result<FilterStore> {
    let store = FilterStore::read(path).with_context(|| format!("reading store {}", path.display()))?;
    store.validate().with_context(|| format!("store {}", path.display()))?;
    Ok(store)
}

/// Indices of the layers matching every selector.
pub(crate) fn selected_layers(store: &FilterStore, select: &[Selector]) -> Vec<usize> {
    (0..store.layers.len())
        .filter(|&i| {
            select
                .iter()
                .all(|s| store.key_of(&store.layers[i], s.dimension).value.matches(&s.value))
        })
        .collect()
}

pub(crate) fn rows_of(store: &FilterStore, layers: &[usize]) -> Vec<usize> {
    layers.iter().flat_map(|&l| store.layers[l].filter_range()).collect()
}

/// Filter rows of the selected layers grouped along `dim`, ordered by key.
/// Groups without filters are dropped.
pub(crate) fn group_rows(store: &FilterStore, layers: &[usize], dim: Dimension) -> Vec<(GroupKey, Vec<usize>)> {
    let mut groups: BTreeMap<GroupKey, Vec<usize>> = BTreeMap::new();
    for &l in layers {
        let layer = &store.layers[l];
        groups
            .entry(store.key_of(layer, dim))
            .or_default()
            .extend(layer.filter_range());
    }
    groups.into_iter().filter(|(_, r)| !r.is_empty()).collect()
}

/// Filters as analysed: each divided by its max-abs weight unless `raw`.
pub(crate) fn analysis_filters(store: &FilterStore, raw: bool) -> FilterMatrix<f32> {
    if raw {
        store.filters.clone()
    } else {
        normalize_filters(&store.filters)
    }
}

pub(crate) fn threshold_params(source: &ThresholdSource) -> Result<ThresholdParams> {
    match source {
        ThresholdSource::Builtin => Ok(ThresholdParams::PUBLISHED),
        ThresholdSource::File(p) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            let params: ThresholdParams =
                serde_json::from_str(&text).with_context(|| format!("parsing threshold parameters {}", p.display()))?;
            if ![params.l, params.x0, params.k, params.b].iter().all(|v| v.is_finite()) || params.k <= 0.0 {
                bail!("{}: parameters must be finite with k > 0", p.display());
            }
            Ok(params)
        }
    }
}

/// Reads a basis written by the `basis` command, or a bare basis object.
pub(crate) fn load_basis(path: &Path) -> Result<PcaBasis> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut v: serde_json::Value =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    if let Some(inner) = v.get_mut("basis") {
        v = inner.take();
    }
    serde_json::from_value(v).with_context(|| format!("{} does not hold a PCA basis", path.display()))
}

pub(crate) fn resolve_basis(source: &BasisSource, filters: &FilterMatrix<f32>, rows: &[usize]) -> Result<PcaBasis> {
    match source {
        BasisSource::Corpus => {
            filterscope_core::spectra::fit_pca(&filters.select(rows)).context("fitting the corpus basis")
        }
        BasisSource::File(p) => load_basis(p),
    }
}

/// Display name of a model id.
pub(crate) fn model_name(store: &FilterStore, id: u32) -> String {
    store.model(id).map(|m| m.model.clone()).unwrap_or_else(|| id.to_string())
}

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use filterscope_core::ingest::{ingest_model, KernelShape, ModelTags};
use filterscope_core::store::FilterStore;
use rayon::prelude::*;
use serde::Deserialize;

use crate::output::Output;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Manifest {
    models: Vec<ManifestEntry>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ManifestEntry {
    /// Relative paths resolve against the manifest's directory.
    path: PathBuf,
    #[serde(default)]
    model: String,
    #[serde(default)]
    name: String,
    #[serde(default)]
    task: String,
    #[serde(default)]
    visual_category: String,
    #[serde(default)]
    training_dataset: String,
    #[serde(default)]
    extra: serde_json::Map<String, serde_json::Value>,
}

struct Job {
    path: PathBuf,
    tags: ModelTags,
    extra: serde_json::Map<String, serde_json::Value>,
}

fn file_stem(p: &Path) -> String {
    p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

fn read_manifest(path: &Path) -> Result<Vec<Job>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading manifest {}", path.display()))?;
    let m: Manifest = serde_json::from_str(&text).with_context(|| format!("parsing manifest {}", path.display()))?;
    let base = path.parent().unwrap_or(Path::new(""));
    Ok(m.models
        .into_iter()
        .map(|e| {
            let path = base.join(&e.path);
            let name = if e.name.is_empty() { file_stem(&path) } else { e.name };
            Job {
                tags: ModelTags {
                    model: e.model,
                    name,
                    task: e.task,
                    visual_category: e.visual_category,
                    training_dataset: e.training_dataset,
                },
                path,
                extra: e.extra,
            }
        })
        .collect())
}

pub fn run(
    out: &mut Output,
    models: &[PathBuf],
    manifest: Option<&Path>,
    store_name: &str,
    [task, visual_category, training_dataset]: [&String; 3],
) -> Result<()> {
    let mut jobs = match manifest {
        Some(p) => read_manifest(p)?,
        None => Vec::new(),
    };
    jobs.extend(models.iter().map(|p| Job {
        path: p.clone(),
        tags: ModelTags {
            model: String::new(),
            name: file_stem(p),
            task: task.clone(),
            visual_category: visual_category.clone(),
            training_dataset: training_dataset.clone(),
        },
        extra: Default::default(),
    }));
    if jobs.is_empty() {
        bail!("no models given; pass model files or --manifest");
    }

    let ingested = jobs
        .par_iter()
        .enumerate()
        .map(|(id, job)| {
            let bytes = std::fs::read(&job.path).with_context(|| format!("reading {}", job.path.display()))?;
            let mut m = ingest_model(&bytes, id as u32, &job.tags, KernelShape::K3X3)
                .with_context(|| format!("ingesting {}", job.path.display()))?;
            m.meta.extra = job.extra.clone();
            Ok(m)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut seen = BTreeSet::new();
    for m in &ingested {
        if !seen.insert(m.meta.model.clone()) {
            bail!("duplicate model id '{}'; set distinct `model` or `name` tags", m.meta.model);
        }
    }

    let mut store = FilterStore::new();
    for m in ingested {
        log::info!("{}: {} layers, {} filters", m.meta.model, m.layers.len(), m.filters.n_rows());
        store.push_model(m);
    }
    store.extra.insert("provenance".into(), out.prov.to_value());
    let stem = out.path(store_name);
    store.write(&stem).with_context(|| format!("writing store {}", stem.display()))?;
    out.record(filterscope_core::store::filters_path(&stem));
    out.record(filterscope_core::store::meta_path(&stem));
    println!(
        "{} models, {} layers, {} filters",
        store.models.len(),
        store.layers.len(),
        store.len()
    );
    Ok(())
}

//! On-disk filter database: a raw little-endian `f32` payload plus a JSON
//! sidecar describing models and layers.
//!
//! `<stem>.filters.f32` holds exactly `36 · n` bytes (row-major `n × 9`
//! binary32, no header). `<stem>.meta.json` is
//! `{version: 1, n, models: […], layers: […]}`; top-level keys other than
//! these are preserved across read/write.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::{IngestedModel, LayerRecord, ModelMeta};
use crate::matrix::{FilterMatrix, IndexView, FILTER_LEN};

pub const STORE_VERSION: u32 = 1;
const BYTES_PER_FILTER: usize = FILTER_LEN * 4;

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("metadata does not match schema: {0}")]
    SchemaMismatch(String),
    #[error("dangling index: {0}")]
    DanglingIndex(String),
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> StoreError + '_ {
    move |source| StoreError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct FilterStore {
    pub filters: FilterMatrix<f32>,
    pub layers: Vec<LayerRecord>,
    pub models: Vec<ModelMeta>,
    /// Unrecognized top-level metadata keys, kept verbatim.
    pub extra: serde_json::Map<String, serde_json::Value>,
}

#[derive(Serialize, Deserialize)]
struct MetaFile {
    version: u32,
    n: usize,
    models: Vec<ModelMeta>,
    layers: Vec<LayerRecord>,
    #[serde(flatten)]
    extra: serde_json::Map<String, serde_json::Value>,
}

pub fn filters_path(stem: &Path) -> PathBuf {
    suffixed(stem, ".filters.f32")
}

pub fn meta_path(stem: &Path) -> PathBuf {
    suffixed(stem, ".meta.json")
}

fn suffixed(stem: &Path, suffix: &str) -> PathBuf {
    let mut s = stem.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

impl FilterStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.filters.n_rows()
    }

    pub fn is_empty(&self) -> bool {
        self.filters.is_empty()
    }

    /// Appends an ingested model, offsetting its layer ranges.
    pub fn push_model(&mut self, m: IngestedModel) {
        let offset = self.filters.n_rows();
        self.filters.extend_from_slice(m.filters.as_flat());
        self.layers.extend(m.layers.into_iter().map(|mut l| {
            l.filter_start += offset;
            l
        }));
        self.models.push(m.meta);
    }

    pub fn model(&self, model_id: u32) -> Option<&ModelMeta> {
        self.models.iter().find(|m| m.model_id == model_id)
    }

    /// Layer ranges must tile `[0, n)` and every layer must name a known model.
    pub fn validate(&self) -> Result<(), StoreError> {
        let n = self.len();
        let mut ranges: Vec<_> = self.layers.iter().map(|l| l.filter_range()).collect();
        ranges.sort_by_key(|r| (r.start, r.end));
        let mut next = 0;
        for r in &ranges {
            if r.end > n {
                return Err(StoreError::DanglingIndex(format!(
                    "layer range {r:?} exceeds {n} filters"
                )));
            }
            if r.start != next {
                return Err(StoreError::SchemaMismatch(format!(
                    "layer ranges must tile the filter rows; expected start {next}, found {r:?}"
                )));
            }
            next = r.end;
        }
        if next != n {
            return Err(StoreError::SchemaMismatch(format!(
                "layers cover {next} of {n} filters"
            )));
        }
        for l in &self.layers {
            if self.model(l.model_id).is_none() {
                return Err(StoreError::DanglingIndex(format!(
                    "layer {} references unknown model {}",
                    l.layer_index, l.model_id
                )));
            }
        }
        Ok(())
    }

    pub fn write(&self, stem: &Path) -> Result<(), StoreError> {
        self.validate()?;
        let fpath = filters_path(stem);
        let file = fs::File::create(&fpath).map_err(io_err(&fpath))?;
        let mut w = BufWriter::new(file);
        for v in self.filters.as_flat() {
            w.write_all(&v.to_le_bytes()).map_err(io_err(&fpath))?;
        }
        w.flush().map_err(io_err(&fpath))?;

        let meta = MetaFile {
            version: STORE_VERSION,
            n: self.len(),
            models: self.models.clone(),
            layers: self.layers.clone(),
            extra: self.extra.clone(),
        };
        let mpath = meta_path(stem);
        let mut json = serde_json::to_vec_pretty(&meta)
            .map_err(|e| StoreError::SchemaMismatch(e.to_string()))?;
        json.push(b'\n');
        fs::write(&mpath, json).map_err(io_err(&mpath))
    }

    pub fn read(stem: &Path) -> Result<Self, StoreError> {
        let mpath = meta_path(stem);
        let text = fs::read(&mpath).map_err(io_err(&mpath))?;
        let meta: MetaFile =
            serde_json::from_slice(&text).map_err(|e| StoreError::SchemaMismatch(e.to_string()))?;
        if meta.version != STORE_VERSION {
            return Err(StoreError::SchemaMismatch(format!(
                "unsupported store version {}",
                meta.version
            )));
        }

        let fpath = filters_path(stem);
        let bytes = fs::read(&fpath).map_err(io_err(&fpath))?;
        if bytes.len() != meta.n * BYTES_PER_FILTER {
            return Err(StoreError::SchemaMismatch(format!(
                "{} holds {} bytes, metadata declares {} filters ({} bytes)",
                fpath.display(),
                bytes.len(),
                meta.n,
                meta.n * BYTES_PER_FILTER
            )));
        }
        let flat = bytes
            .chunks_exact(4)
            .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]))
            .collect();
        let store = FilterStore {
            filters: FilterMatrix::from_flat(flat).expect("length checked above"),
            layers: meta.layers,
            models: meta.models,
            extra: meta.extra,
        };
        store.validate()?;
        Ok(store)
    }

    /// Grouping key of a layer along one metadata dimension.
    pub fn key_of(&self, layer: &LayerRecord, dim: Dimension) -> GroupKey {
        let model = self.model(layer.model_id);
        let text = |f: fn(&ModelMeta) -> &String| {
            GroupValue::Text(model.map(f).cloned().unwrap_or_default())
        };
        let value = match dim {
            Dimension::Model => text(|m| &m.model),
            Dimension::Task => text(|m| &m.task),
            Dimension::VisualCategory => text(|m| &m.visual_category),
            Dimension::TrainingDataset => text(|m| &m.training_dataset),
            Dimension::ConvDepthDecile => GroupValue::Int(i64::from(layer.depth_decile())),
            Dimension::Layer => GroupValue::Text(format!("{}:{}", layer.model_id, layer.layer_index)),
        };
        GroupKey { dimension: dim, value }
    }

    /// Partitions filter rows by their key along `dim`, ordered by key.
    pub fn group_by(&self, dim: Dimension) -> Vec<(GroupKey, Vec<usize>)> {
        let mut groups: BTreeMap<GroupKey, Vec<usize>> = BTreeMap::new();
        for l in &self.layers {
            groups
                .entry(self.key_of(l, dim))
                .or_default()
                .extend(l.filter_range());
        }
        groups.into_iter().collect()
    }

    /// Rows of every layer whose key along `dim` satisfies `pred`.
    pub fn select(&self, dim: Dimension, pred: impl Fn(&GroupKey) -> bool) -> StoreView<'_> {
        let layers: Vec<usize> = self
            .layers
            .iter()
            .enumerate()
            .filter(|(_, l)| pred(&self.key_of(l, dim)))
            .map(|(i, _)| i)
            .collect();
        let indices = layers
            .iter()
            .flat_map(|&i| self.layers[i].filter_range())
            .collect();
        StoreView {
            store: self,
            layers,
            indices,
        }
    }

    pub fn select_where(&self, sel: &Selector) -> StoreView<'_> {
        self.select(sel.dimension, |k| k.value.matches(&sel.value))
    }
}

/// A subset of a store's layers. Holds row indices only.
#[derive(Debug, Clone)]
pub struct StoreView<'a> {
    store: &'a FilterStore,
    layers: Vec<usize>,
    indices: Vec<usize>,
}

impl<'a> StoreView<'a> {
    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn layers(&self) -> impl Iterator<Item = &'a LayerRecord> + '_ {
        self.layers.iter().map(|&i| &self.store.layers[i])
    }

    pub fn filters(&self) -> IndexView<'_, f32> {
        self.store.filters.select(&self.indices)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Dimension {
    Model,
    Task,
    VisualCategory,
    TrainingDataset,
    ConvDepthDecile,
    Layer,
}

impl Dimension {
    pub const ALL: [Dimension; 6] = [
        Dimension::Model,
        Dimension::Task,
        Dimension::VisualCategory,
        Dimension::TrainingDataset,
        Dimension::ConvDepthDecile,
        Dimension::Layer,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Dimension::Model => "model",
            Dimension::Task => "task",
            Dimension::VisualCategory => "visual_category",
            Dimension::TrainingDataset => "training_dataset",
            Dimension::ConvDepthDecile => "conv_depth_decile",
            Dimension::Layer => "layer",
        }
    }
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Dimension {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Dimension::ALL
            .into_iter()
            .find(|d| d.as_str() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Dimension::ALL.iter().map(|d| d.as_str()).collect();
                format!("unknown dimension '{s}', expected one of {}", names.join(", "))
            })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GroupValue {
    Int(i64),
    Text(String),
}

impl GroupValue {
    /// Compares against a user-supplied string.
    pub fn matches(&self, s: &str) -> bool {
        match self {
            GroupValue::Int(v) => s.trim().parse::<i64>() == Ok(*v),
            GroupValue::Text(t) => t == s,
        }
    }
}

impl fmt::Display for GroupValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupValue::Int(v) => write!(f, "{v}"),
            GroupValue::Text(t) => f.write_str(t),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GroupKey {
    pub dimension: Dimension,
    pub value: GroupValue,
}

impl fmt::Display for GroupKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}={}", self.dimension, self.value)
    }
}

/// `dimension=value`, e.g. `task=classification`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Selector {
    pub dimension: Dimension,
    pub value: String,
}

impl FromStr for Selector {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (d, v) = s
            .split_once('=')
            .ok_or_else(|| format!("selector '{s}' is not of the form dimension=value"))?;
        Ok(Selector {
            dimension: d.trim().parse()?,
            value: v.trim().to_string(),
        })
    }
}

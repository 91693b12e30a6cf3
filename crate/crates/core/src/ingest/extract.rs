use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::depth::{compute_conv_depths, model_depth, topological_order, CONV_OP};
use super::graph::{parse_model, ModelGraph, Node};
use super::IngestError;
use crate::matrix::{FilterMatrix, FILTER_LEN};

/// Spatial kernel size `(height, width)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct KernelShape {
    pub h: usize,
    pub w: usize,
}

impl KernelShape {
    pub const K3X3: KernelShape = KernelShape { h: 3, w: 3 };

    pub fn new(h: usize, w: usize) -> Self {
        Self { h, w }
    }
}

impl fmt::Display for KernelShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.h, self.w)
    }
}

impl FromStr for KernelShape {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (h, w) = s
            .split_once('x')
            .ok_or_else(|| format!("kernel shape '{s}' is not of the form HxW"))?;
        let parse = |v: &str| v.trim().parse::<usize>().map_err(|e| format!("{s}: {e}"));
        Ok(Self::new(parse(h)?, parse(w)?))
    }
}

/// Descriptive tags of a model. Not derivable from the file itself.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ModelTags {
    /// Unique string id; defaults to `name` when empty.
    #[serde(default)]
    pub model: String,
    #[serde(default)]
    pub name: String,
    #[serde(default)]
    pub task: String,
    #[serde(default)]
    pub visual_category: String,
    #[serde(default)]
    pub training_dataset: String,
}

/// Per-model metadata. Unknown fields read from a store are kept in `extra`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelMeta {
    pub model_id: u32,
    pub model: String,
    pub producer: String,
    pub op_set: i64,
    pub depth: usize,
    #[serde(rename = "Name")]
    pub name: String,
    #[serde(rename = "Task")]
    pub task: String,
    #[serde(rename = "Visual Category")]
    pub visual_category: String,
    #[serde(rename = "Training-Dataset")]
    pub training_dataset: String,
    pub total_filters: u64,
    #[serde(with = "shape_keys")]
    pub filter_shape_census: BTreeMap<KernelShape, u64>,
    pub op_census: BTreeMap<String, u64>,
    #[serde(flatten)]
    pub extra: serde_json::Map<String, serde_json::Value>,
}

mod shape_keys {
    use super::KernelShape;
    use serde::{de::Error, Deserialize, Deserializer, Serialize, Serializer};
    use std::collections::BTreeMap;

    pub fn serialize<S: Serializer>(m: &BTreeMap<KernelShape, u64>, s: S) -> Result<S::Ok, S::Error> {
        m.iter()
            .map(|(k, v)| (k.to_string(), *v))
            .collect::<BTreeMap<String, u64>>()
            .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<KernelShape, u64>, D::Error> {
        BTreeMap::<String, u64>::deserialize(d)?
            .into_iter()
            .map(|(k, v)| Ok((k.parse().map_err(D::Error::custom)?, v)))
            .collect()
    }
}

/// One extracted convolution layer and the contiguous filter rows it owns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerRecord {
    pub model_id: u32,
    /// Ordinal among the model's extracted layers.
    pub layer_index: usize,
    pub node_index: usize,
    #[serde(default)]
    pub name: String,
    pub conv_depth: usize,
    pub conv_depth_norm: f64,
    pub c_in: usize,
    pub c_out: usize,
    pub groups: usize,
    pub filter_start: usize,
    pub filter_count: usize,
}

impl LayerRecord {
    pub fn filter_range(&self) -> std::ops::Range<usize> {
        self.filter_start..self.filter_start + self.filter_count
    }

    /// `min(floor(conv_depth_norm * 10), 9)`.
    pub fn depth_decile(&self) -> u8 {
        depth_decile(self.conv_depth_norm)
    }
}

pub fn depth_decile(conv_depth_norm: f64) -> u8 {
    ((conv_depth_norm * 10.0).floor().max(0.0) as u8).min(9)
}

/// A regular convolution node and its weight geometry.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvLayerSpec {
    pub node_index: usize,
    pub name: String,
    pub c_in: usize,
    pub c_out: usize,
    pub groups: usize,
    pub kernel_shape: KernelShape,
    pub weight_tensor: String,
    pub conv_depth: usize,
    pub conv_depth_norm: f64,
}

impl ConvLayerSpec {
    pub fn filter_count(&self) -> usize {
        self.c_out * (self.c_in / self.groups)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Census {
    pub op_census: BTreeMap<String, u64>,
    pub filter_shape_census: BTreeMap<KernelShape, u64>,
    pub total_filters: u64,
}

/// Kernel shape of a conv node: the `kernel_shape` attribute when present,
/// otherwise the trailing dims of a rank-4 weight initializer.
fn kernel_of(g: &ModelGraph, n: &Node) -> Option<KernelShape> {
    if let Some(ks) = n.attr_ints("kernel_shape") {
        return match ks {
            [h, w] => Some(KernelShape::new(*h as usize, *w as usize)),
            // 1-D / 3-D convs never match a 2-D kernel
            _ => None,
        };
    }
    let w = g.initializers.get(n.inputs.get(1)?)?;
    match w.shape.as_slice() {
        [_, _, h, w] => Some(KernelShape::new(*h, *w)),
        _ => None,
    }
}

pub fn census(g: &ModelGraph, kernel: KernelShape) -> Census {
    let mut c = Census::default();
    for n in &g.nodes {
        *c.op_census.entry(n.op_type.clone()).or_default() += 1;
        if n.op_type != CONV_OP {
            continue;
        }
        let Some(ks) = kernel_of(g, n) else { continue };
        let Some(w) = n.inputs.get(1).and_then(|t| g.initializers.get(t)) else {
            continue;
        };
        if w.shape.len() != 4 {
            continue;
        }
        let count = (w.shape[0] * w.shape[1]) as u64;
        *c.filter_shape_census.entry(ks).or_default() += count;
        if ks == kernel {
            c.total_filters += count;
        }
    }
    c
}

/// All `Conv` nodes with kernel `kernel`, in topological order.
pub fn conv_layers(g: &ModelGraph, kernel: KernelShape) -> Result<Vec<ConvLayerSpec>, IngestError> {
    let depths = compute_conv_depths(g)?;
    let max_depth = g
        .nodes
        .iter()
        .enumerate()
        .filter(|(_, n)| n.op_type == CONV_OP)
        .map(|(i, _)| depths[&i])
        .max()
        .unwrap_or(0);

    let mut out = Vec::new();
    for i in topological_order(g)? {
        let n = &g.nodes[i];
        if n.op_type != CONV_OP {
            continue;
        }
        let has_attr = n.attr_ints("kernel_shape").is_some();
        if has_attr && kernel_of(g, n) != Some(kernel) {
            continue;
        }
        let weight_name = n.inputs.get(1).cloned().unwrap_or_default();
        let Some(w) = g.initializers.get(&weight_name) else {
            return Err(IngestError::WeightNotInitializer {
                node: n.name.clone(),
                tensor: weight_name,
            });
        };
        let [c_out, c_in_per_group, kh, kw] = w.shape[..] else {
            return Err(IngestError::ShapeMismatch {
                node: n.name.clone(),
                shape: w.shape.clone(),
            });
        };
        if KernelShape::new(kh, kw) != kernel {
            if has_attr {
                return Err(IngestError::ShapeMismatch {
                    node: n.name.clone(),
                    shape: w.shape.clone(),
                });
            }
            continue;
        }
        let groups = n.attr_int("group").unwrap_or(1).max(1) as usize;
        let conv_depth = depths[&i];
        out.push(ConvLayerSpec {
            node_index: i,
            name: n.name.clone(),
            c_in: c_in_per_group * groups,
            c_out,
            groups,
            kernel_shape: kernel,
            weight_tensor: weight_name,
            conv_depth,
            conv_depth_norm: if max_depth == 0 {
                0.0
            } else {
                conv_depth as f64 / max_depth as f64
            },
        });
    }
    Ok(out)
}

/// Flattens every matching conv layer's `(c_out, c_in/groups, 3, 3)` weight
/// into filter rows, converted to `f32`. Layer records carry row ranges
/// starting at 0 for this model.
pub fn extract_filters(
    g: &ModelGraph,
    meta: &ModelMeta,
    kernel: KernelShape,
) -> Result<(FilterMatrix<f32>, Vec<LayerRecord>), IngestError> {
    if kernel.h * kernel.w != FILTER_LEN {
        return Err(IngestError::UnsupportedKernel(kernel));
    }
    let layers = conv_layers(g, kernel)?;
    let mut filters = FilterMatrix::with_capacity(layers.iter().map(|l| l.filter_count()).sum());
    let mut records = Vec::with_capacity(layers.len());
    for (layer_index, l) in layers.iter().enumerate() {
        let w = &g.initializers[&l.weight_tensor];
        let values = w.to_f32().ok_or_else(|| IngestError::UnsupportedDType {
            tensor: l.weight_tensor.clone(),
            dtype: w.dtype,
        })?;
        let start = filters.n_rows();
        filters.extend_from_slice(&values);
        records.push(LayerRecord {
            model_id: meta.model_id,
            layer_index,
            node_index: l.node_index,
            name: l.name.clone(),
            conv_depth: l.conv_depth,
            conv_depth_norm: l.conv_depth_norm,
            c_in: l.c_in,
            c_out: l.c_out,
            groups: l.groups,
            filter_start: start,
            filter_count: l.filter_count(),
        });
    }
    Ok((filters, records))
}

/// Everything extracted from one model file.
#[derive(Debug, Clone, PartialEq)]
pub struct IngestedModel {
    pub meta: ModelMeta,
    pub filters: FilterMatrix<f32>,
    pub layers: Vec<LayerRecord>,
}

pub fn build_meta(g: &ModelGraph, model_id: u32, tags: &ModelTags, kernel: KernelShape) -> Result<ModelMeta, IngestError> {
    let c = census(g, kernel);
    Ok(ModelMeta {
        model_id,
        model: if tags.model.is_empty() {
            tags.name.clone()
        } else {
            tags.model.clone()
        },
        producer: g.producer.clone(),
        op_set: g.opset,
        depth: model_depth(g)?,
        name: tags.name.clone(),
        task: tags.task.clone(),
        visual_category: tags.visual_category.clone(),
        training_dataset: tags.training_dataset.clone(),
        total_filters: c.total_filters,
        filter_shape_census: c.filter_shape_census,
        op_census: c.op_census,
        extra: Default::default(),
    })
}

/// Parses a model file and extracts its filters and metadata.
pub fn ingest_model(
    bytes: &[u8],
    model_id: u32,
    tags: &ModelTags,
    kernel: KernelShape,
) -> Result<IngestedModel, IngestError> {
    let g = parse_model(bytes)?;
    let meta = build_meta(&g, model_id, tags, kernel)?;
    let (filters, layers) = extract_filters(&g, &meta, kernel)?;
    debug_assert_eq!(filters.n_rows() as u64, meta.total_filters);
    Ok(IngestedModel {
        meta,
        filters,
        layers,
    })
}

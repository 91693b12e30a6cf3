//! Reading ONNX models and pulling 3×3 convolution filters out of them.

mod builder;
mod depth;
mod extract;
mod graph;
pub mod onnx;

use thiserror::Error;

pub use builder::ModelBuilder;
pub use depth::{compute_conv_depths, model_depth, topological_order};
pub use extract::{
    build_meta, census, conv_layers, depth_decile, extract_filters, ingest_model, Census,
    ConvLayerSpec, IngestedModel, KernelShape, LayerRecord, ModelMeta, ModelTags,
};
pub use graph::{parse_model, AttributeValue, DType, Initializer, ModelGraph, Node};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("malformed protobuf: {0}")]
    MalformedProtobuf(#[from] prost::DecodeError),
    #[error("model has no graph")]
    MissingGraph,
    #[error("initializer '{0}' stores its data externally, which is not supported")]
    ExternalDataUnsupported(String),
    #[error("malformed tensor '{name}': {reason}")]
    MalformedTensor { name: String, reason: String },
    #[error("graph contains a cycle (at node '{0}')")]
    CycleDetected(String),
    #[error("weight '{tensor}' of node '{node}' is not an initializer")]
    WeightNotInitializer { node: String, tensor: String },
    #[error("weight of node '{node}' has shape {shape:?}, expected (c_out, c_in/groups, kh, kw)")]
    ShapeMismatch { node: String, shape: Vec<usize> },
    #[error("tensor '{tensor}' has unsupported dtype {dtype:?}")]
    UnsupportedDType { tensor: String, dtype: DType },
    #[error("kernel {0} does not flatten to 9 weights")]
    UnsupportedKernel(KernelShape),
}

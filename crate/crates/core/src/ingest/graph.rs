use std::collections::BTreeMap;

use log::warn;
use prost::Message;

use super::onnx::{self, attribute_type, data_location, data_type};
use super::IngestError;

/// Element type of an initializer tensor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DType {
    Float16,
    Float32,
    Float64,
    /// Any other ONNX data type code; carried through but never decoded.
    Other(i32),
}

impl DType {
    pub fn from_onnx(code: i32) -> Self {
        match code {
            data_type::FLOAT16 => DType::Float16,
            data_type::FLOAT => DType::Float32,
            data_type::DOUBLE => DType::Float64,
            c => DType::Other(c),
        }
    }

    pub fn onnx_code(self) -> i32 {
        match self {
            DType::Float16 => data_type::FLOAT16,
            DType::Float32 => data_type::FLOAT,
            DType::Float64 => data_type::DOUBLE,
            DType::Other(c) => c,
        }
    }

    /// Width in bytes for the float types we decode.
    pub fn float_width(self) -> Option<usize> {
        match self {
            DType::Float16 => Some(2),
            DType::Float32 => Some(4),
            DType::Float64 => Some(8),
            DType::Other(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum AttributeValue {
    Float(f32),
    Int(i64),
    String(Vec<u8>),
    Floats(Vec<f32>),
    Ints(Vec<i64>),
    Strings(Vec<Vec<u8>>),
    Tensor,
    /// Graph-valued attribute (If/Loop/Scan bodies). Bodies are not analyzed.
    Subgraph,
    Other(i32),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub name: String,
    pub op_type: String,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    pub attributes: BTreeMap<String, AttributeValue>,
}

impl Node {
    pub fn attr_int(&self, name: &str) -> Option<i64> {
        match self.attributes.get(name) {
            Some(AttributeValue::Int(v)) => Some(*v),
            _ => None,
        }
    }

    pub fn attr_ints(&self, name: &str) -> Option<&[i64]> {
        match self.attributes.get(name) {
            Some(AttributeValue::Ints(v)) => Some(v),
            _ => None,
        }
    }
}

/// An initializer tensor with its payload normalized to little-endian bytes,
/// whichever protobuf field it was stored in.
#[derive(Debug, Clone, PartialEq)]
pub struct Initializer {
    pub dtype: DType,
    pub shape: Vec<usize>,
    pub raw: Vec<u8>,
}

impl Initializer {
    pub fn numel(&self) -> usize {
        self.shape.iter().product()
    }

    /// Decodes a float payload to `f32`. `None` for non-float dtypes.
    pub fn to_f32(&self) -> Option<Vec<f32>> {
        let out = match self.dtype {
            DType::Float32 => self
                .raw
                .chunks_exact(4)
                .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]))
                .collect(),
            DType::Float16 => self
                .raw
                .chunks_exact(2)
                .map(|b| half::f16::from_le_bytes([b[0], b[1]]).to_f32())
                .collect(),
            DType::Float64 => self
                .raw
                .chunks_exact(8)
                .map(|b| {
                    let mut a = [0u8; 8];
                    a.copy_from_slice(b);
                    f64::from_le_bytes(a) as f32
                })
                .collect(),
            DType::Other(_) => return None,
        };
        Some(out)
    }
}

/// Decoded ONNX graph: nodes in file order plus initializer payloads.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ModelGraph {
    pub nodes: Vec<Node>,
    pub initializers: BTreeMap<String, Initializer>,
    pub graph_inputs: Vec<String>,
    pub graph_outputs: Vec<String>,
    pub opset: i64,
    pub producer: String,
}

const SUBGRAPH_OPS: [&str; 3] = ["If", "Loop", "Scan"];

/// Decodes a protobuf `ModelProto` with embedded initializers.
pub fn parse_model(bytes: &[u8]) -> Result<ModelGraph, IngestError> {
    let model = onnx::ModelProto::decode(bytes)?;
    let graph = model.graph.ok_or(IngestError::MissingGraph)?;

    let opset = model
        .opset_import
        .iter()
        .find(|o| o.domain.is_empty() || o.domain == "ai.onnx")
        .map(|o| o.version)
        .unwrap_or(0);

    let producer = if model.producer_version.is_empty() {
        model.producer_name
    } else {
        format!("{} {}", model.producer_name, model.producer_version)
    };

    let mut initializers = BTreeMap::new();
    for t in graph.initializer {
        let (name, init) = decode_tensor(t)?;
        initializers.insert(name, init);
    }

    let nodes = graph
        .node
        .into_iter()
        .map(|n| {
            if SUBGRAPH_OPS.contains(&n.op_type.as_str()) {
                warn!(
                    "node '{}' ({}) has a subgraph body; the body is skipped",
                    n.name, n.op_type
                );
            }
            let attributes = n
                .attribute
                .into_iter()
                .map(|a| (a.name.clone(), decode_attribute(a)))
                .collect();
            Node {
                name: n.name,
                op_type: n.op_type,
                inputs: n.input,
                outputs: n.output,
                attributes,
            }
        })
        .collect();

    Ok(ModelGraph {
        nodes,
        initializers,
        graph_inputs: graph.input.into_iter().map(|v| v.name).collect(),
        graph_outputs: graph.output.into_iter().map(|v| v.name).collect(),
        opset,
        producer,
    })
}

fn decode_attribute(a: onnx::AttributeProto) -> AttributeValue {
    match a.r#type {
        attribute_type::FLOAT => AttributeValue::Float(a.f),
        attribute_type::INT => AttributeValue::Int(a.i),
        attribute_type::STRING => AttributeValue::String(a.s),
        attribute_type::FLOATS => AttributeValue::Floats(a.floats),
        attribute_type::INTS => AttributeValue::Ints(a.ints),
        attribute_type::STRINGS => AttributeValue::Strings(a.strings),
        attribute_type::TENSOR | attribute_type::TENSORS => AttributeValue::Tensor,
        attribute_type::GRAPH | attribute_type::GRAPHS => AttributeValue::Subgraph,
        // Pre-IR3 exporters omit the type tag; infer from the populated field.
        attribute_type::UNDEFINED => {
            if !a.ints.is_empty() {
                AttributeValue::Ints(a.ints)
            } else if !a.floats.is_empty() {
                AttributeValue::Floats(a.floats)
            } else if !a.s.is_empty() {
                AttributeValue::String(a.s)
            } else if a.f != 0.0 {
                AttributeValue::Float(a.f)
            } else {
                AttributeValue::Int(a.i)
            }
        }
        other => AttributeValue::Other(other),
    }
}

fn decode_tensor(t: onnx::TensorProto) -> Result<(String, Initializer), IngestError> {
    if t.data_location == data_location::EXTERNAL || !t.external_data.is_empty() {
        return Err(IngestError::ExternalDataUnsupported(t.name));
    }
    let shape = t
        .dims
        .iter()
        .map(|&d| usize::try_from(d))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|_| IngestError::MalformedTensor {
            name: t.name.clone(),
            reason: format!("negative dimension in {:?}", t.dims),
        })?;
    let dtype = DType::from_onnx(t.data_type);

    let raw = if !t.raw_data.is_empty() {
        t.raw_data
    } else {
        match dtype {
            DType::Float32 => t.float_data.iter().flat_map(|v| v.to_le_bytes()).collect(),
            DType::Float64 => t.double_data.iter().flat_map(|v| v.to_le_bytes()).collect(),
            // float16 bit patterns live in the low half of int32_data
            DType::Float16 => t
                .int32_data
                .iter()
                .flat_map(|&v| (v as u16).to_le_bytes())
                .collect(),
            DType::Other(data_type::INT64) => {
                t.int64_data.iter().flat_map(|v| v.to_le_bytes()).collect()
            }
            DType::Other(_) => t.int32_data.iter().flat_map(|v| v.to_le_bytes()).collect(),
        }
    };

    let init = Initializer { dtype, shape, raw };
    if let Some(w) = dtype.float_width() {
        if init.raw.len() != init.numel() * w {
            return Err(IngestError::MalformedTensor {
                name: t.name,
                reason: format!(
                    "payload holds {} bytes, shape {:?} needs {}",
                    init.raw.len(),
                    init.shape,
                    init.numel() * w
                ),
            });
        }
    }
    Ok((t.name, init))
}

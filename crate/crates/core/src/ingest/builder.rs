//! Programmatic construction of small ONNX models.
//!
//! Used for test fixtures and for generating synthetic inputs; produces the
//! same wire format exporters write.

use prost::Message;

use super::onnx::{
    attribute_type, data_location, data_type, AttributeProto, GraphProto, ModelProto, NodeProto,
    OperatorSetIdProto, StringStringEntryProto, TensorProto, ValueInfoProto,
};

#[derive(Debug, Clone)]
pub struct ModelBuilder {
    graph: GraphProto,
    producer: String,
    opset: i64,
}

impl ModelBuilder {
    pub fn new() -> Self {
        Self {
            graph: GraphProto {
                name: "graph".into(),
                ..Default::default()
            },
            producer: "filterscope-builder".into(),
            opset: 13,
        }
    }

    pub fn producer(&mut self, producer: &str) -> &mut Self {
        self.producer = producer.into();
        self
    }

    pub fn opset(&mut self, version: i64) -> &mut Self {
        self.opset = version;
        self
    }

    pub fn input(&mut self, name: &str) -> &mut Self {
        self.graph.input.push(ValueInfoProto {
            name: name.into(),
            ..Default::default()
        });
        self
    }

    pub fn output(&mut self, name: &str) -> &mut Self {
        self.graph.output.push(ValueInfoProto {
            name: name.into(),
            ..Default::default()
        });
        self
    }

    fn push_tensor(&mut self, name: &str, shape: &[usize], dtype: i32, raw: Vec<u8>) -> &mut Self {
        self.graph.initializer.push(TensorProto {
            name: name.into(),
            dims: shape.iter().map(|&d| d as i64).collect(),
            data_type: dtype,
            raw_data: raw,
            ..Default::default()
        });
        self
    }

    /// float32 initializer stored in `raw_data`.
    pub fn initializer_f32(&mut self, name: &str, shape: &[usize], values: &[f32]) -> &mut Self {
        let raw = values.iter().flat_map(|v| v.to_le_bytes()).collect();
        self.push_tensor(name, shape, data_type::FLOAT, raw)
    }

    /// float32 initializer stored in the typed `float_data` field.
    pub fn initializer_f32_typed(
        &mut self,
        name: &str,
        shape: &[usize],
        values: &[f32],
    ) -> &mut Self {
        self.graph.initializer.push(TensorProto {
            name: name.into(),
            dims: shape.iter().map(|&d| d as i64).collect(),
            data_type: data_type::FLOAT,
            float_data: values.to_vec(),
            ..Default::default()
        });
        self
    }

    pub fn initializer_f16(
        &mut self,
        name: &str,
        shape: &[usize],
        values: &[half::f16],
    ) -> &mut Self {
        let raw = values.iter().flat_map(|v| v.to_le_bytes()).collect();
        self.push_tensor(name, shape, data_type::FLOAT16, raw)
    }

    pub fn initializer_f64(&mut self, name: &str, shape: &[usize], values: &[f64]) -> &mut Self {
        let raw = values.iter().flat_map(|v| v.to_le_bytes()).collect();
        self.push_tensor(name, shape, data_type::DOUBLE, raw)
    }

    /// Initializer whose payload lives in an external file.
    pub fn external_initializer(&mut self, name: &str, shape: &[usize]) -> &mut Self {
        self.graph.initializer.push(TensorProto {
            name: name.into(),
            dims: shape.iter().map(|&d| d as i64).collect(),
            data_type: data_type::FLOAT,
            data_location: data_location::EXTERNAL,
            external_data: vec![StringStringEntryProto {
                key: "location".into(),
                value: format!("{name}.bin"),
            }],
            ..Default::default()
        });
        self
    }

    pub fn node(&mut self, op_type: &str, inputs: &[&str], outputs: &[&str]) -> &mut Self {
        let name = format!("{}_{}", op_type.to_lowercase(), self.graph.node.len());
        self.graph.node.push(NodeProto {
            name,
            op_type: op_type.into(),
            input: inputs.iter().map(|s| s.to_string()).collect(),
            output: outputs.iter().map(|s| s.to_string()).collect(),
            ..Default::default()
        });
        self
    }

    /// Adds an INTS attribute to the most recently added node.
    pub fn attr_ints(&mut self, name: &str, values: &[i64]) -> &mut Self {
        let node = self.graph.node.last_mut().expect("attribute without a node");
        node.attribute.push(AttributeProto {
            name: name.into(),
            ints: values.to_vec(),
            r#type: attribute_type::INTS,
            ..Default::default()
        });
        self
    }

    /// Adds an INT attribute to the most recently added node.
    pub fn attr_int(&mut self, name: &str, value: i64) -> &mut Self {
        let node = self.graph.node.last_mut().expect("attribute without a node");
        node.attribute.push(AttributeProto {
            name: name.into(),
            i: value,
            r#type: attribute_type::INT,
            ..Default::default()
        });
        self
    }

    /// Conv node with a float32 weight initializer of shape
    /// `(c_out, c_in / group, kh, kw)` filled from `weights`.
    #[allow(clippy::too_many_arguments)]
    pub fn conv(
        &mut self,
        input: &str,
        output: &str,
        weight_name: &str,
        c_out: usize,
        c_in: usize,
        kernel: (usize, usize),
        group: usize,
        weights: &[f32],
    ) -> &mut Self {
        let shape = [c_out, c_in / group, kernel.0, kernel.1];
        assert_eq!(weights.len(), shape.iter().product::<usize>());
        self.initializer_f32(weight_name, &shape, weights);
        self.node("Conv", &[input, weight_name], &[output]);
        self.attr_ints("kernel_shape", &[kernel.0 as i64, kernel.1 as i64]);
        if group != 1 {
            self.attr_int("group", group as i64);
        }
        self
    }

    pub fn to_proto(&self) -> ModelProto {
        ModelProto {
            ir_version: 7,
            producer_name: self.producer.clone(),
            graph: Some(self.graph.clone()),
            opset_import: vec![OperatorSetIdProto {
                domain: String::new(),
                version: self.opset,
            }],
            ..Default::default()
        }
    }

    pub fn encode(&self) -> Vec<u8> {
        self.to_proto().encode_to_vec()
    }
}

impl Default for ModelBuilder {
    fn default() -> Self {
        Self::new()
    }
}

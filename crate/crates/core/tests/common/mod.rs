#![allow(dead_code)]

use filterscope_core::ingest::ModelBuilder;
use filterscope_core::FilterMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Deterministic, non-repeating weights.
pub fn weights(n: usize, salt: u32) -> Vec<f32> {
    (0..n)
        .map(|i| ((i as f32 + 1.0) * 0.37 + salt as f32).sin() * (1.0 + salt as f32 * 0.1))
        .collect()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normal_matrix(n: usize, rng: &mut ChaCha8Rng) -> FilterMatrix<f64> {
    FilterMatrix::from_rows((0..n).map(|_| std::array::from_fn(|_| rng.sample(StandardNormal))))
}

pub fn to_le_bytes(v: &[f32]) -> Vec<u8> {
    v.iter().flat_map(|x| x.to_le_bytes()).collect()
}

pub struct Fixture {
    pub bytes: Vec<u8>,
    /// Expected filter payload, layer by layer in extraction order.
    pub expected: Vec<f32>,
}

/// x -> Conv(3->2) -> Relu -> Conv(2->4) -> Conv(4->2)
pub fn chain() -> Fixture {
    let (w0, w1, w2) = (weights(2 * 3 * 9, 0), weights(4 * 2 * 9, 1), weights(2 * 4 * 9, 2));
    let mut b = ModelBuilder::new();
    b.input("x")
        .conv("x", "a", "w0", 2, 3, (3, 3), 1, &w0)
        .node("Relu", &["a"], &["b"])
        .conv("b", "c", "w1", 4, 2, (3, 3), 1, &w1)
        .conv("c", "y", "w2", 2, 4, (3, 3), 1, &w2)
        .output("y");
    Fixture {
        bytes: b.encode(),
        expected: [w0, w1, w2].concat(),
    }
}

/// x -> {ConvA, ConvB -> Relu} -> Add -> ConvC
pub fn diamond() -> Fixture {
    let (wa, wb, wc) = (weights(9, 3), weights(9, 4), weights(9, 5));
    let mut b = ModelBuilder::new();
    b.input("x")
        .conv("x", "a", "wa", 1, 1, (3, 3), 1, &wa)
        .conv("x", "b0", "wb", 1, 1, (3, 3), 1, &wb)
        .node("Relu", &["b0"], &["b"])
        .node("Add", &["a", "b"], &["s"])
        .conv("s", "y", "wc", 1, 1, (3, 3), 1, &wc)
        .output("y");
    Fixture {
        bytes: b.encode(),
        expected: [wa, wb, wc].concat(),
    }
}

/// Depthwise 3x3 conv with 4 channels.
pub fn depthwise() -> Fixture {
    let w = weights(4 * 9, 6);
    let mut b = ModelBuilder::new();
    b.input("x").conv("x", "y", "w", 4, 4, (3, 3), 4, &w).output("y");
    Fixture {
        bytes: b.encode(),
        expected: w,
    }
}

/// 3x3 conv (2->3) followed by 5x5 conv (3->2) and a 1x1 conv (2->5).
pub fn mixed() -> Fixture {
    let w3 = weights(3 * 2 * 9, 7);
    let w5 = weights(2 * 3 * 25, 8);
    let w1 = weights(5 * 2, 9);
    let mut b = ModelBuilder::new();
    b.input("x")
        .conv("x", "a", "w3", 3, 2, (3, 3), 1, &w3)
        .conv("a", "b", "w5", 2, 3, (5, 5), 1, &w5)
        .conv("b", "y", "w1", 5, 2, (1, 1), 1, &w1)
        .output("y");
    Fixture {
        bytes: b.encode(),
        expected: w3,
    }
}

/// Conv followed by a 3x3 ConvTranspose and another Conv.
pub fn with_transpose() -> Fixture {
    let w0 = weights(2 * 9, 10);
    let wt = weights(2 * 2 * 9, 11);
    let w1 = weights(2 * 9, 12);
    let mut b = ModelBuilder::new();
    b.input("x")
        .conv("x", "a", "w0", 2, 1, (3, 3), 1, &w0)
        .initializer_f32("wt", &[2, 2, 3, 3], &wt)
        .node("ConvTranspose", &["a", "wt"], &["t"])
        .attr_ints("kernel_shape", &[3, 3])
        .conv("t", "y", "w1", 1, 2, (3, 3), 1, &w1)
        .output("y");
    Fixture {
        bytes: b.encode(),
        expected: [w0, w1].concat(),
    }
}

use filterscope_core::ingest::{KernelShape, LayerRecord, ModelMeta};
use filterscope_core::store::FilterStore;

pub fn meta(id: u32, task: &str, category: &str) -> ModelMeta {
    ModelMeta {
        model_id: id,
        model: format!("m{id}"),
        producer: "test".into(),
        op_set: 13,
        depth: 1,
        name: format!("m{id}"),
        task: task.into(),
        visual_category: category.into(),
        training_dataset: "synthetic".into(),
        total_filters: 0,
        filter_shape_census: [(KernelShape::K3X3, 0)].into(),
        op_census: Default::default(),
        extra: Default::default(),
    }
}

/// Builds a store from `(model_id, filter_count, conv_depth_norm)` layers.
/// `gen(model_id, row_in_layer)` supplies each filter.
pub fn synthetic_store(
    models: Vec<ModelMeta>,
    layers: &[(u32, usize, f64)],
    mut gen: impl FnMut(u32, usize) -> [f32; 9],
) -> FilterStore {
    let mut s = FilterStore::new();
    let mut next_index = std::collections::BTreeMap::<u32, usize>::new();
    for &(model_id, count, norm) in layers {
        let idx = next_index.entry(model_id).or_default();
        s.layers.push(LayerRecord {
            model_id,
            layer_index: *idx,
            node_index: *idx,
            name: format!("conv{idx}"),
            conv_depth: (norm * 10.0).round() as usize,
            conv_depth_norm: norm,
            c_in: 1,
            c_out: count,
            groups: 1,
            filter_start: s.filters.n_rows(),
            filter_count: count,
        });
        *idx += 1;
        for r in 0..count {
            s.filters.push(gen(model_id, r));
        }
    }
    s.models = models
        .into_iter()
        .map(|mut m| {
            m.total_filters = layers
                .iter()
                .filter(|l| l.0 == m.model_id)
                .map(|l| l.1 as u64)
                .sum();
            m.filter_shape_census = [(KernelShape::K3X3, m.total_filters)].into();
            m
        })
        .collect();
    s
}

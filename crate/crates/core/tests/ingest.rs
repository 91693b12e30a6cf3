mod common;

use common::*;
use filterscope_core::ingest::*;
use filterscope_core::FilterSet;

fn ingest(bytes: &[u8]) -> IngestedModel {
    ingest_model(bytes, 0, &ModelTags { name: "m".into(), ..Default::default() }, KernelShape::K3X3).unwrap()
}

#[test]
fn single_conv_round_trips_known_weights() {
    let w: Vec<f32> = (0..9).map(|i| i as f32 * 0.5 - 2.0).collect();
    let mut b = ModelBuilder::new();
    b.input("x").conv("x", "y", "w", 1, 1, (3, 3), 1, &w).output("y");
    let g = parse_model(&b.encode()).unwrap();
    assert_eq!(g.nodes.len(), 1);
    assert_eq!(g.initializers.len(), 1);
    assert_eq!(g.initializers["w"].to_f32().unwrap(), w);
    assert_eq!(g.opset, 13);
    assert_eq!(g.graph_inputs, vec!["x".to_string()]);

    let m = ingest(&b.encode());
    assert_eq!(m.filters.n_rows(), 1);
    assert_eq!(m.filters.row(0), &w[..]);
    assert_eq!(m.layers[0].conv_depth, 0);
    assert_eq!(m.layers[0].conv_depth_norm, 0.0);
}

#[test]
fn truncated_stream_is_malformed() {
    let bytes = chain().bytes;
    let err = parse_model(&bytes[..bytes.len() / 2]).unwrap_err();
    assert!(matches!(err, IngestError::MalformedProtobuf(_)), "{err}");
}

#[test]
fn garbage_is_malformed() {
    assert!(matches!(parse_model(&[0xff, 0xff, 0xff, 0x01]), Err(IngestError::MalformedProtobuf(_))));
}

#[test]
fn model_without_graph() {
    use prost::Message;
    let bytes = onnx::ModelProto::default().encode_to_vec();
    assert!(matches!(parse_model(&bytes), Err(IngestError::MissingGraph)));
}

#[test]
fn external_data_is_rejected() {
    let mut b = ModelBuilder::new();
    b.input("x").external_initializer("w", &[1, 1, 3, 3]).node("Conv", &["x", "w"], &["y"]);
    assert!(matches!(parse_model(&b.encode()), Err(IngestError::ExternalDataUnsupported(n)) if n == "w"));
}

#[test]
fn conv_transpose_parses_and_is_skipped() {
    let f = with_transpose();
    let g = parse_model(&f.bytes).unwrap();
    assert!(g.nodes.iter().any(|n| n.op_type == "ConvTranspose"));
    let m = ingest(&f.bytes);
    assert_eq!(m.filters.as_flat(), &f.expected[..]);
    assert_eq!(m.meta.op_census["ConvTranspose"], 1);
    assert_eq!(m.layers.len(), 2);
}

#[test]
fn chain_layers_and_depths() {
    let f = chain();
    let m = ingest(&f.bytes);
    assert_eq!(to_le_bytes(m.filters.as_flat()), to_le_bytes(&f.expected));
    let depths: Vec<_> = m.layers.iter().map(|l| (l.conv_depth, l.conv_depth_norm)).collect();
    assert_eq!(depths, vec![(0, 0.0), (1, 0.5), (2, 1.0)]);
    let ranges: Vec<_> = m.layers.iter().map(|l| l.filter_range()).collect();
    assert_eq!(ranges, vec![0..6, 6..14, 14..22]);
    assert_eq!(m.meta.total_filters, 22);
    assert_eq!(m.meta.depth, 4);
    assert_eq!(m.meta.op_census, [("Conv".to_string(), 3), ("Relu".to_string(), 1)].into());
}

#[test]
fn depthwise_filter_count() {
    let f = depthwise();
    let m = ingest(&f.bytes);
    let l = &m.layers[0];
    assert_eq!((l.c_in, l.c_out, l.groups, l.filter_count), (4, 4, 4, 4));
    // enumerate (out, in/group) slices directly
    let slices = (0..l.c_out).flat_map(|o| (0..l.c_in / l.groups).map(move |i| (o, i))).count();
    assert_eq!(slices, m.filters.n_rows());
    assert_eq!(m.filters.as_flat(), &f.expected[..]);
}

#[test]
fn mixed_kernels_census() {
    let f = mixed();
    let m = ingest(&f.bytes);
    assert_eq!(m.filters.as_flat(), &f.expected[..]);
    assert_eq!(
        m.meta.filter_shape_census,
        [(KernelShape::new(3, 3), 6), (KernelShape::new(5, 5), 6), (KernelShape::new(1, 1), 10)].into()
    );
    assert_eq!(m.meta.total_filters, 6);
    // 5x5 and 1x1 convs still count toward depth
    assert_eq!(m.layers[0].conv_depth, 0);
}

#[test]
fn census_of_empty_graph() {
    let c = census(&ModelGraph::default(), KernelShape::K3X3);
    assert!(c.op_census.is_empty());
    assert!(c.filter_shape_census.is_empty());
    assert_eq!(c.total_filters, 0);
}

#[test]
fn kernel_inferred_from_weight_when_attribute_missing() {
    let w = weights(2 * 9, 1);
    let mut b = ModelBuilder::new();
    b.input("x").initializer_f32("w", &[2, 1, 3, 3], &w).node("Conv", &["x", "w"], &["y"]);
    let m = ingest(&b.encode());
    assert_eq!(m.filters.as_flat(), &w[..]);
    assert_eq!(m.meta.filter_shape_census[&KernelShape::K3X3], 2);
}

#[test]
fn typed_float_field_is_read() {
    let w = weights(9, 2);
    let mut b = ModelBuilder::new();
    b.input("x").initializer_f32_typed("w", &[1, 1, 3, 3], &w).node("Conv", &["x", "w"], &["y"]);
    assert_eq!(ingest(&b.encode()).filters.as_flat(), &w[..]);
}

#[test]
fn half_and_double_weights_are_converted() {
    let w64: Vec<f64> = (0..18).map(|i| (i as f64 * 0.123).cos() / 3.0).collect();
    let w16: Vec<half::f16> = w64.iter().map(|&v| half::f16::from_f64(v)).collect();
    let mut b = ModelBuilder::new();
    b.input("x")
        .initializer_f64("wd", &[2, 1, 3, 3], &w64)
        .node("Conv", &["x", "wd"], &["a"])
        .initializer_f16("wh", &[1, 2, 3, 3], &w16)
        .node("Conv", &["a", "wh"], &["y"]);
    let m = ingest(&b.encode());
    let want: Vec<f32> = w64
        .iter()
        .map(|&v| v as f32)
        .chain(w16.iter().map(|v| v.to_f32()))
        .collect();
    assert_eq!(to_le_bytes(m.filters.as_flat()), to_le_bytes(&want));
}

#[test]
fn dynamic_weight_is_an_error() {
    let mut b = ModelBuilder::new();
    b.input("x").input("w").node("Conv", &["x", "w"], &["y"]).attr_ints("kernel_shape", &[3, 3]);
    let g = parse_model(&b.encode()).unwrap();
    let meta = build_meta(&g, 0, &ModelTags::default(), KernelShape::K3X3).unwrap();
    assert!(matches!(
        extract_filters(&g, &meta, KernelShape::K3X3),
        Err(IngestError::WeightNotInitializer { .. })
    ));
}

#[test]
fn rank_three_weight_is_a_shape_mismatch() {
    let mut b = ModelBuilder::new();
    b.input("x").initializer_f32("w", &[1, 3, 3], &[0.0; 9]).node("Conv", &["x", "w"], &["y"]);
    let g = parse_model(&b.encode()).unwrap();
    let meta = build_meta(&g, 0, &ModelTags::default(), KernelShape::K3X3).unwrap();
    assert!(matches!(
        extract_filters(&g, &meta, KernelShape::K3X3),
        Err(IngestError::ShapeMismatch { .. })
    ));
}

#[test]
fn extraction_is_deterministic() {
    let f = chain();
    assert_eq!(ingest(&f.bytes), ingest(&f.bytes));
}

#[test]
fn total_filters_matches_layer_sum() {
    for f in [chain(), diamond(), depthwise(), mixed(), with_transpose()] {
        let m = ingest(&f.bytes);
        let sum: usize = m.layers.iter().map(|l| l.c_out * (l.c_in / l.groups)).sum();
        assert_eq!(sum as u64, m.meta.total_filters);
        assert_eq!(m.filters.len(), sum);
    }
}

#[test]
fn subgraph_ops_are_tolerated() {
    let w = weights(9, 0);
    let mut b = ModelBuilder::new();
    b.input("x").input("cond").conv("x", "a", "w", 1, 1, (3, 3), 1, &w).node("If", &["cond"], &["y"]);
    let m = ingest(&b.encode());
    assert_eq!(m.meta.op_census["If"], 1);
    assert_eq!(m.filters.n_rows(), 1);
}

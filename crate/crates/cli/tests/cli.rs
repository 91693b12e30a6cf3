use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use filterscope_core::degeneracy::{normal_filters, rep_rng};
use filterscope_core::ingest::ModelBuilder;
use quick_xml::events::Event;
use quick_xml::Reader;
use serde_json::Value;

fn filterscope(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_filterscope"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let o = filterscope(args);
    assert!(
        o.status.success(),
        "{args:?} failed:\n{}",
        String::from_utf8_lossy(&o.stderr)
    );
    o
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// One-conv model with `c_out` x `c_in` filters.
fn model(dir: &Path, name: &str, c_out: usize, c_in: usize, weights: &[f32]) -> PathBuf {
    let mut b = ModelBuilder::new();
    b.input("x").conv("x", "y", "w", c_out, c_in, (3, 3), 1, weights).output("y");
    let p = dir.join(format!("{name}.onnx"));
    std::fs::write(&p, b.encode()).unwrap();
    p
}

fn normal_weights(n: usize, seed: u64) -> Vec<f32> {
    normal_filters(n, &mut rep_rng(seed, 0)).as_flat().iter().map(|&w| w as f32).collect()
}

/// Two-layer model: a 1 -> c conv followed by a c -> c conv.
fn two_layer(dir: &Path, name: &str, c: usize, seed: u64, shift: f32) -> PathBuf {
    let w0: Vec<f32> = normal_weights(c, seed);
    let w1: Vec<f32> = normal_weights(c * c, seed + 1).iter().map(|w| w + shift).collect();
    let mut b = ModelBuilder::new();
    b.input("x")
        .conv("x", "a", "w0", c, 1, (3, 3), 1, &w0)
        .node("Relu", &["a"], &["r"])
        .conv("r", "y", "w1", c, c, (3, 3), 1, &w1)
        .output("y");
    let p = dir.join(format!("{name}.onnx"));
    std::fs::write(&p, b.encode()).unwrap();
    p
}

fn read_csv(p: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_path(p).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r.records().map(|rec| rec.unwrap().iter().map(String::from).collect()).collect();
    (header, rows)
}

fn read_json(p: &Path) -> Value {
    serde_json::from_slice(&std::fs::read(p).unwrap()).unwrap()
}

fn assert_well_formed_svg(p: &Path) {
    let text = std::fs::read_to_string(p).unwrap();
    let mut reader = Reader::from_str(&text);
    let mut depth = 0i32;
    let mut saw_svg = false;
    loop {
        match reader.read_event() {
            Ok(Event::Start(e)) => {
                saw_svg |= e.name().as_ref() == "svg";
                depth += 1;
            }
            Ok(Event::End(_)) => depth -= 1,
            Ok(Event::Eof) => break,
            Ok(_) => {}
            Err(e) => panic!("{}: {e}", p.display()),
        }
    }
    assert!(saw_svg && depth == 0, "{}", p.display());
}

/// Corpus of three classification models and one segmentation model.
fn corpus(dir: &Path) -> PathBuf {
    let models = [
        ("a", "classification", 0.0),
        ("b", "classification", 0.0),
        ("c", "classification", 0.0),
        ("d", "segmentation", 0.8),
    ];
    let mut entries = Vec::new();
    for (i, (name, task, shift)) in models.iter().enumerate() {
        two_layer(dir, name, 16, 10 * i as u64, *shift);
        entries.push(serde_json::json!({
            "path": format!("{name}.onnx"),
            "name": name,
            "task": task,
            "visual_category": "natural",
            "training_dataset": "synthetic",
        }));
    }
    let manifest = dir.join("manifest.json");
    std::fs::write(&manifest, serde_json::json!({ "models": entries }).to_string()).unwrap();
    ok(&["extract", "--manifest", s(&manifest), "--out", s(dir), "--store-name", "corpus"]);
    dir.join("corpus")
}

#[test]
fn extract_single_model() {
    let dir = tempfile::tempdir().unwrap();
    let m = model(dir.path(), "tiny", 4, 2, &normal_weights(8, 1));
    let o = ok(&["extract", s(&m), "--task", "classification", "--out", s(dir.path())]);
    assert!(String::from_utf8_lossy(&o.stdout).contains("8 filters"));
    let meta = read_json(&dir.path().join("filters.meta.json"));
    assert_eq!(meta["n"], 8);
    assert_eq!(meta["models"][0]["model"], "tiny");
    assert_eq!(meta["models"][0]["Task"], "classification");
    assert_eq!(meta["provenance"]["tool"], "filterscope");
    assert_eq!(std::fs::metadata(dir.path().join("filters.filters.f32")).unwrap().len(), 8 * 36);
}

#[test]
fn corrupt_model_fails_with_diagnostic() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.onnx");
    std::fs::write(&p, b"\x0a\xff\xff\xff\xff\x0fnot a model").unwrap();
    let o = filterscope(&["extract", s(&p), "--out", s(dir.path())]);
    assert!(!o.status.success());
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("bad.onnx"), "{err}");
    assert!(!dir.path().join("filters.meta.json").exists());
}

#[test]
fn missing_store_fails() {
    let dir = tempfile::tempdir().unwrap();
    let o = filterscope(&["stats", "--store", s(&dir.path().join("nope")), "--out", s(dir.path())]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error:"));
}

#[test]
fn bad_flags_are_rejected() {
    for args in [
        &["stats", "--store", "x", "--eps0", "abs:-1"][..],
        &["stats", "--store", "x", "--kl-base", "3"],
        &["fit-threshold", "--reps", "0"],
        &["phenotype", "--store", "x", "--components", "0,0"],
        &["shift", "--store", "x", "--group-by", "colour"],
    ] {
        assert!(!filterscope(args).status.success(), "{args:?}");
    }
}

#[test]
fn manifest_merges_models() {
    let dir = tempfile::tempdir().unwrap();
    let stem = corpus(dir.path());
    let meta = read_json(&stem.with_extension("meta.json"));
    assert_eq!(meta["models"].as_array().unwrap().len(), 4);
    assert_eq!(meta["models"][3]["Task"], "segmentation");
    assert_eq!(meta["n"], 4 * (16 + 256));
    assert_eq!(meta["layers"][1]["conv_depth_norm"], 1.0);
}

#[test]
fn manifest_rejects_unknown_keys_and_duplicates() {
    let dir = tempfile::tempdir().unwrap();
    model(dir.path(), "m", 1, 1, &[0.5; 9]);
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"models": [{"path": "m.onnx", "visual-category": "x"}]}"#).unwrap();
    assert!(!filterscope(&["extract", "--manifest", s(&bad), "--out", s(dir.path())]).status.success());
    let dup = dir.path().join("dup.json");
    std::fs::write(&dup, r#"{"models": [{"path": "m.onnx"}, {"path": "m.onnx"}]}"#).unwrap();
    let o = filterscope(&["extract", "--manifest", s(&dup), "--out", s(dir.path())]);
    assert!(String::from_utf8_lossy(&o.stderr).contains("duplicate"));
}

#[test]
fn stats_of_zero_layers() {
    let dir = tempfile::tempdir().unwrap();
    let m = model(dir.path(), "zero", 8, 8, &[0.0; 64 * 9]);
    ok(&["extract", s(&m), "--out", s(dir.path())]);
    ok(&["stats", "--store", s(&dir.path().join("filters")), "--out", s(dir.path())]);
    let (header, rows) = read_csv(&dir.path().join("stats.csv"));
    assert_eq!(header, ["model", "layer", "name", "conv_depth_norm", "n", "S", "H", "T_H", "label", "flagged", "mean_scale"]);
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0][5], "1");
    assert_eq!(rows[0][6], "0");
    assert_eq!(rows[0][8], "degenerate");
    assert_well_formed_svg(&dir.path().join("stats.svg"));
}

#[test]
fn stats_of_random_init_layers_are_random() {
    let dir = tempfile::tempdir().unwrap();
    let m = model(dir.path(), "init", 64, 64, &normal_weights(64 * 64, 3));
    ok(&["extract", s(&m), "--out", s(dir.path())]);
    ok(&["stats", "--store", s(&dir.path().join("filters")), "--out", s(dir.path())]);
    let (_, rows) = read_csv(&dir.path().join("stats.csv"));
    assert!(rows.iter().all(|r| r[8] == "random"), "{rows:?}");
    let summary = read_json(&dir.path().join("stats_summary.json"));
    assert_eq!(summary["labels"]["random"], 1);
}

#[test]
fn stats_of_empty_selection_is_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let stem = corpus(dir.path());
    ok(&["stats", "--store", s(&stem), "--select", "task=detection", "--out", s(dir.path())]);
    let text = std::fs::read_to_string(dir.path().join("stats.csv")).unwrap();
    assert_eq!(text.lines().count(), 2);
    assert!(text.lines().next().unwrap().starts_with("# filterscope"));
}

#[test]
fn fit_threshold_is_deterministic_and_feeds_stats() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let args = |out: &Path| {
        vec!["fit-threshold", "--log2-min", "1", "--log2-max", "10", "--reps", "20", "--seed", "7", "--out"]
            .into_iter()
            .map(String::from)
            .chain([s(out).to_string()])
            .collect::<Vec<_>>()
    };
    let run = |out: &Path| ok(&args(out).iter().map(String::as_str).collect::<Vec<_>>());
    run(&a);
    run(&b);
    for f in ["threshold.json", "threshold.csv", "threshold.svg"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f}");
    }
    let fit = read_json(&a.join("threshold.json"));
    for k in ["L", "x0", "k", "b", "rms", "n_values", "reps", "seed", "rng"] {
        assert!(fit.get(k).is_some(), "missing {k}");
    }
    assert_eq!(fit["seed"], 7);
    assert_eq!(fit["n_values"].as_array().unwrap().len(), 10);
    assert_well_formed_svg(&a.join("threshold.svg"));

    let stem = corpus(dir.path());
    let params = a.join("threshold.json");
    ok(&["stats", "--store", s(&stem), "--threshold-params", s(&params), "--out", s(dir.path())]);
    let summary = read_json(&dir.path().join("stats_summary.json"));
    assert_eq!(summary["threshold_params"]["L"], fit["L"]);
}

#[test]
fn basis_of_antipodal_pair() {
    let dir = tempfile::tempdir().unwrap();
    let v = [0.1f32, -0.4, 0.2, 0.9, -0.3, 0.0, 0.5, -0.7, 0.25];
    let w: Vec<f32> = v.iter().chain(v.iter().map(|x| -x).collect::<Vec<_>>().iter()).copied().collect();
    let m = model(dir.path(), "pair", 2, 1, &w);
    ok(&["extract", s(&m), "--out", s(dir.path())]);
    ok(&["basis", "--store", s(&dir.path().join("filters")), "--raw", "--out", s(dir.path())]);
    let b = read_json(&dir.path().join("basis_all.json"));
    let norm = v.iter().map(|x| (*x as f64).powi(2)).sum::<f64>().sqrt();
    let c0: Vec<f64> = b["basis"]["components"][0].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    let sign = if c0[3] > 0.0 { 1.0 } else { -1.0 };
    for (c, x) in c0.iter().zip(v) {
        assert!((c - sign * x as f64 / norm).abs() < 1e-6);
    }
    assert_eq!(b["basis"]["explained_variance_ratio"][0], 1.0);
    let (_, rows) = read_csv(&dir.path().join("cumvar_all.csv"));
    assert_eq!(rows[8][2], "1");
    assert_well_formed_svg(&dir.path().join("basis_all.svg"));
}

#[test]
fn grouped_basis_emits_one_per_group() {
    let dir = tempfile::tempdir().unwrap();
    let stem = corpus(dir.path());
    let out = dir.path().join("basis");
    ok(&["basis", "--store", s(&stem), "--group-by", "task", "--out", s(&out)]);
    for g in ["00_classification", "01_segmentation"] {
        assert!(out.join(format!("basis_{g}.json")).exists());
        assert_well_formed_svg(&out.join(format!("basis_{g}.svg")));
    }
    let b = read_json(&out.join("basis_00_classification.json"));
    assert_eq!(b["n"], 3 * 272);
}

#[test]
fn shift_matrix_and_heatmap() {
    let dir = tempfile::tempdir().unwrap();
    let stem = corpus(dir.path());
    let out = dir.path().join("shift");
    ok(&["shift", "--store", s(&stem), "--group-by", "model", "--kde", "--out", s(&out)]);
    let (header, rows) = read_csv(&out.join("shift_model.csv"));
    assert_eq!(header, ["group", "a", "b", "c", "d"]);
    let m: Vec<Vec<f64>> = rows.iter().map(|r| r[1..].iter().map(|x| x.parse().unwrap()).collect()).collect();
    for i in 0..4 {
        assert_eq!(m[i][i], 0.0);
        for j in 0..4 {
            assert_eq!(m[i][j], m[j][i]);
        }
    }
    // d has shifted deep filters
    assert!(m[0][3] > m[0][1] && m[1][3] > m[1][2]);
    assert_well_formed_svg(&out.join("shift_model.svg"));
    let (_, kde) = read_csv(&out.join("shift_model_kde.csv"));
    assert_eq!(kde.len(), 4 * 9 * 512);
    let json = read_json(&out.join("shift_model.json"));
    assert_eq!(json["sizes"], serde_json::json!([272, 272, 272, 272]));
    assert!(json["range"]["Fixed"].is_array());

    let again = dir.path().join("shift2");
    ok(&["shift", "--store", s(&stem), "--group-by", "model", "--kde", "--out", s(&again)]);
    for f in ["shift_model.csv", "shift_model.json", "shift_model.svg", "shift_model_kde.csv"] {
        assert_eq!(std::fs::read(out.join(f)).unwrap(), std::fs::read(again.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn shift_with_basis_file_and_pair_range() {
    let dir = tempfile::tempdir().unwrap();
    let stem = corpus(dir.path());
    ok(&["basis", "--store", s(&stem), "--out", s(dir.path())]);
    let basis = dir.path().join("basis_all.json");
    ok(&[
        "shift", "--store", s(&stem), "--group-by", "task", "--basis", s(&basis), "--range", "pair", "--kl-base", "2",
        "--out", s(dir.path()),
    ]);
    let json = read_json(&dir.path().join("shift_task.json"));
    assert_eq!(json["range"], "Union");
    assert_eq!(json["kl_base"], "2");
    assert!(json["values"][0][1].as_f64().unwrap() > 0.0);
}

#[test]
fn shift_needs_two_groups() {
    let dir = tempfile::tempdir().unwrap();
    let stem = corpus(dir.path());
    let o = filterscope(&["shift", "--store", s(&stem), "--group-by", "visual_category", "--out", s(dir.path())]);
    assert!(!o.status.success());
}

#[test]
fn decile_shift_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let stem = corpus(dir.path());
    ok(&["decile-shift", "--store", s(&stem), "--select", "task=classification", "--out", s(dir.path())]);
    let (_, summary) = read_csv(&dir.path().join("decile_summary.csv"));
    let deciles: Vec<&str> = summary.iter().map(|r| r[0].as_str()).collect();
    assert_eq!(deciles, ["0", "9"]);
    assert!(summary.iter().all(|r| r[1] == "3"));
    let (_, pairs) = read_csv(&dir.path().join("decile_shift.csv"));
    assert_eq!(pairs.len(), 6);
    assert_well_formed_svg(&dir.path().join("decile_shift.svg"));
}

#[test]
fn phenotype_per_layer() {
    let dir = tempfile::tempdir().unwrap();
    let stem = corpus(dir.path());
    ok(&["phenotype", "--store", s(&stem), "--out", s(dir.path())]);
    let (_, rows) = read_csv(&dir.path().join("phenotype.csv"));
    assert_eq!(rows.len(), 8);
    // first layers have 16 filters, too few for a reliable label
    for r in &rows {
        let n: usize = r[1].parse().unwrap();
        assert_eq!(r[2] == "unreliable", n < 100, "{r:?}");
    }
}

#[test]
fn render_filters_ppm() {
    let dir = tempfile::tempdir().unwrap();
    let w: Vec<f32> = (0..6 * 9).map(|i| if i < 27 { 0.0 } else { (i as f32 - 40.0) / 13.0 }).collect();
    let m = model(dir.path(), "img", 2, 3, &w);
    ok(&["extract", s(&m), "--out", s(dir.path())]);
    let stem = dir.path().join("filters");
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    ok(&["render-filters", "--store", s(&stem), "--cell", "2", "--gap", "1", "--out", s(&a)]);
    ok(&["render-filters", "--store", s(&stem), "--cell", "2", "--gap", "1", "--out", s(&b)]);
    let img = std::fs::read(a.join("filters_img_000.ppm")).unwrap();
    assert_eq!(img, std::fs::read(b.join("filters_img_000.ppm")).unwrap());
    assert!(img.starts_with(b"P6\n# filterscope"));
    // 3 columns x 2 rows of 6x6 tiles with 1 px gaps
    let text = String::from_utf8_lossy(&img[..img.len().min(400)]).to_string();
    assert!(text.contains("\n22 15\n255\n"), "{text}");
    assert_eq!(img.len() - (text.find("255\n").unwrap() + 4), 22 * 15 * 3);
}

#[test]
fn provenance_hash_ignores_out_dir_but_not_seed() {
    let dir = tempfile::tempdir().unwrap();
    let stem = corpus(dir.path());
    let hash = |out: &str, seed: &str| {
        let out = dir.path().join(out);
        ok(&["stats", "--store", s(&stem), "--seed", seed, "--out", s(&out)]);
        read_json(&out.join("stats_summary.json"))["provenance"]["config_hash"].clone()
    };
    assert_eq!(hash("x", "1"), hash("y", "1"));
    assert_ne!(hash("x", "1"), hash("x", "2"));
}

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn data(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data").join(rel)
}

fn nestdnf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nestdnf")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Binarized sanity table plus a nested 2-DNF trained on it.
fn sanity_model(dir: &TempDir) -> (PathBuf, PathBuf) {
    let bin = dir.path().join("sanity.csv");
    let model = dir.path().join("model.json");
    let o = nestdnf(&[
        "binarize",
        "--data",
        s(&data("sanity/sanity.csv")),
        "--schema",
        s(&data("sanity/schema.json")),
        "--out",
        s(&bin),
    ]);
    assert!(o.status.success(), "{o:?}");
    let o = nestdnf(&["train-nested", "--data", s(&bin), "--k", "2", "--out", s(&model)]);
    assert!(o.status.success(), "{o:?}");
    (bin, model)
}

#[test]
fn train_log_is_json_lines() {
    let dir = TempDir::new().unwrap();
    let bin = dir.path().join("sanity.nbin");
    let o = nestdnf(&[
        "binarize",
        "--data",
        s(&data("sanity/sanity.csv")),
        "--schema",
        s(&data("sanity/schema.json")),
        "--out",
        s(&bin),
    ]);
    assert!(o.status.success());
    let model = dir.path().join("m.json");
    let o = nestdnf(&["train-nested", "--data", s(&bin), "--k", "2", "--out", s(&model)]);
    assert!(o.status.success(), "{o:?}");
    let events: Vec<Value> = stdout(&o).lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    let kinds: Vec<&str> = events.iter().map(|e| e["event"].as_str().unwrap()).collect();
    assert_eq!(kinds.iter().filter(|k| **k == "matrix_cell").count(), 4);
    assert_eq!(kinds.iter().filter(|k| **k == "selected").count(), 2);
    assert_eq!(kinds.iter().filter(|k| **k == "pruned").count(), 2);
    let m: Value = serde_json::from_str(&std::fs::read_to_string(&model).unwrap()).unwrap();
    assert_eq!(m["k"], 2);
    assert_eq!(m["rows"], serde_json::json!([[2, 0], [0, 2]]));
    assert_eq!(m["trained_on_complement"], false);
}

#[test]
fn predict_reports_accuracy_only_with_labels() {
    let dir = TempDir::new().unwrap();
    let (bin, model) = sanity_model(&dir);
    let o = nestdnf(&["predict", "--model", s(&model), "--data", s(&bin)]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().count(), 17);
    assert!(String::from_utf8_lossy(&o.stderr).contains("accuracy: 100.00"));

    let unlabeled = dir.path().join("u.csv");
    std::fs::write(&unlabeled, "x0,x1,x2,x3\n1,1,0,0\n0,0,0,1\n").unwrap();
    let o = nestdnf(&["predict", "--model", s(&model), "--data", s(&unlabeled)]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "prediction\n1\n0\n");
    assert!(!String::from_utf8_lossy(&o.stderr).contains("accuracy"));

    let o = nestdnf(&["--json", "predict", "--model", s(&model), "--data", s(&unlabeled)]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["predictions"], serde_json::json!([1, 0]));
    assert!(v["accuracy"].is_null());
}

#[test]
fn complement_flag_negates_predictions() {
    let dir = TempDir::new().unwrap();
    let (bin, _) = sanity_model(&dir);
    let model = dir.path().join("c.json");
    let o = nestdnf(&["--quiet", "train-nested", "--data", s(&bin), "--k", "2", "--complement", "--out", s(&model)]);
    assert!(o.status.success());
    assert!(stdout(&o).is_empty());
    let m: Value = serde_json::from_str(&std::fs::read_to_string(&model).unwrap()).unwrap();
    assert_eq!(m["trained_on_complement"], true);
    let preds = dir.path().join("p.csv");
    let o = nestdnf(&["predict", "--model", s(&model), "--data", s(&bin), "--out", s(&preds)]);
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("accuracy: "));
}

#[test]
fn feature_mismatch_exits_with_code_2() {
    let dir = TempDir::new().unwrap();
    let (_, model) = sanity_model(&dir);
    let other = dir.path().join("o.csv");
    std::fs::write(&other, "a,b,c,d\n1,1,0,0\n").unwrap();
    let o = nestdnf(&["predict", "--model", s(&model), "--data", s(&other)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("model expects"));
}

#[test]
fn verify_trained_model_and_formula() {
    let dir = TempDir::new().unwrap();
    let (_, model) = sanity_model(&dir);
    let o = nestdnf(&["verify", "--model", s(&model)]);
    assert!(o.status.success());
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["k_dnf"], true);
    assert_eq!(v["mim_le_k"], true);
    assert_eq!(v["complement_is_k_dnf"], true);
    assert_eq!(v["theorem_bound"]["pass"], true);

    let o = nestdnf(&["verify", "--formula", "x0&x1&x2 | x3", "--k", "2"]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["k_dnf"], false);
    assert_eq!(v["mim_le_k"], false);

    let o = nestdnf(&["verify", "--formula", "x0&x1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn complement_prints_formula_and_report() {
    let o = nestdnf(&["complement", "--formula", "x0&x1 | x2&x3"]);
    assert!(o.status.success());
    let out = stdout(&o);
    let mut lines = out.lines();
    assert_eq!(lines.next().unwrap(), "!x0&!x2 | !x0&!x3 | !x1&!x2 | !x1&!x3");
    let report: Value = serde_json::from_str(lines.next().unwrap()).unwrap();
    assert_eq!(report, serde_json::json!({"input_size": 2, "output_size": 4, "max_term_size": 2}));

    let raw = nestdnf(&["complement", "--raw", "--formula", "x0&x1 | !x0&x2"]);
    let clean = nestdnf(&["complement", "--formula", "x0&x1 | !x0&x2"]);
    assert!(stdout(&raw).lines().next().unwrap().contains("x0&!x0"));
    assert!(!stdout(&clean).lines().next().unwrap().contains("x0&!x0"));

    let o = nestdnf(&["complement", "--formula", "x0 & y"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn explain_instance() {
    let dir = TempDir::new().unwrap();
    let (_, model) = sanity_model(&dir);
    let o = nestdnf(&["explain", "--model", s(&model), "--instance", "1101"]);
    assert!(o.status.success(), "{o:?}");
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["decision"], true);
    assert_eq!(v["axp"], serde_json::json!([0, 1]));
    assert_eq!(v["cxp"], serde_json::json!([0]));

    let o = nestdnf(&["explain", "--model", s(&model), "--instance", "0101"]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["decision"], false);
    assert_eq!(v["axp"], serde_json::json!([0, 2]));

    let o = nestdnf(&["explain", "--model", s(&model), "--instance", "01"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn decision_tree_round_trip() {
    let dir = TempDir::new().unwrap();
    let (bin, _) = sanity_model(&dir);
    let tree = dir.path().join("t.json");
    let o = nestdnf(&["--json", "train-dt", "--data", s(&bin), "--k", "4", "--out", s(&tree)]);
    assert!(o.status.success());
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["train_accuracy"], 100.0);
    let o = nestdnf(&["--json", "predict", "--model", s(&tree), "--data", s(&bin)]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["accuracy"], 100.0);
    let o = nestdnf(&["verify", "--model", s(&tree)]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["k_dnf"], true);
}

#[test]
fn benchmark_sanity_and_empty() {
    let o = nestdnf(&["--json", "benchmark", "--config", s(&data("sanity.bench.json"))]);
    assert!(o.status.success(), "{o:?}");
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let acc = |m: &str| {
        v["entries"].as_array().unwrap().iter().find(|e| e["model"] == m).unwrap()["mean_accuracy"].as_f64().unwrap()
    };
    assert_eq!(acc("dnf"), 100.0);
    assert!(acc("dt") < 100.0);

    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("empty.json");
    std::fs::write(&cfg, r#"{"datasets": [], "ks": [2], "splits": 5, "train_fraction": 0.8, "seed": 1}"#).unwrap();
    let out = dir.path().join("report.json");
    let o = nestdnf(&["benchmark", "--config", s(&cfg), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["entries"], serde_json::json!([]));
    assert!(stdout(&o).starts_with("dataset"));
}

#[test]
fn binarize_applies_fitted_features_to_held_out_file() {
    let dir = TempDir::new().unwrap();
    let train = dir.path().join("train.csv");
    let test = dir.path().join("test.csv");
    let o = nestdnf(&[
        "--json",
        "binarize",
        "--data",
        s(&data("monks/monks-1.train.csv")),
        "--schema",
        s(&data("monks/schema.json")),
        "--out",
        s(&train),
        "--apply",
        s(&data("monks/monks-1.test.csv")),
        "--apply-out",
        s(&test),
    ]);
    assert!(o.status.success(), "{o:?}");
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["n_examples"], 124);
    let header = |p: &Path| std::fs::read_to_string(p).unwrap().lines().next().unwrap().to_string();
    assert_eq!(header(&train), header(&test));
    assert_eq!(std::fs::read_to_string(&test).unwrap().lines().count(), 433);
}

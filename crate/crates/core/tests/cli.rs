use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn annosel(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_annosel")).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("batch.json"), r#"{"batch_id": 0, "rng_seed": 11, "n_annotators": 8}"#).unwrap();
    let o = annosel(&["gen-annotators", "--config", s(&d.join("batch.json")), "--out", s(&d.join("a.json"))]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let batch: serde_json::Value = serde_json::from_str(&fs::read_to_string(d.join("a.json")).unwrap()).unwrap();
    assert_eq!(batch.as_array().unwrap().len(), 8);

    let config = serde_json::json!({
        "dataset_path": data("breast_cancer.csv"),
        "label_column": "diagnosis",
        "batch_files": ["a.json"],
        "modes": ["test1", "test4"],
        "max_annotations": 25,
        "n_trees": 5,
        "replications": 2,
    });
    fs::write(d.join("exp.json"), config.to_string()).unwrap();
    let out = d.join("out");
    let o = annosel(&["run", "--config", s(&d.join("exp.json")), "--modes", "test1,test3", "--out", s(&out)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let runs: Vec<String> = fs::read_dir(out.join("runs"))
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    assert_eq!(runs.len(), 4);
    assert!(runs.iter().all(|r| !r.ends_with("test4")));
    let manifest = annosel::dataio::read_manifest(&out).unwrap();
    manifest.verify(&out).unwrap();
    assert_eq!(manifest.dataset.unwrap().label_names.len(), 2);
    assert!(out.join("plots/uncertainty.csv").is_file());

    let again = d.join("again");
    let o = annosel(&["summarize", "--in", s(&out), "--out", s(&again)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(fs::read(out.join("summary.json")).unwrap(), fs::read(again.join("summary.json")).unwrap());

    let o = annosel(&["plot-data", "--in", s(&again), "--out", s(&d.join("plots")), "--window", "3"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(d.join("plots/f1.csv").is_file());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let out = d.join("out");

    let o = annosel(&["run", "--config", s(&d.join("missing.json")), "--out", s(&out)]);
    assert_eq!(code(&o), 2);

    fs::write(d.join("bad.json"), r#"{"dataset_path": "x.csv", "no_such_key": 1}"#).unwrap();
    let o = annosel(&["run", "--config", s(&d.join("bad.json")), "--out", s(&out)]);
    assert_eq!(code(&o), 2);

    let cfg = serde_json::json!({
        "dataset_path": data("breast_cancer.csv"),
        "label_column": "diagnosis",
        "batch_files": ["nowhere.json"],
    });
    fs::write(d.join("exp.json"), cfg.to_string()).unwrap();
    let o = annosel(&["run", "--config", s(&d.join("exp.json")), "--modes", "test9", "--out", s(&out)]);
    assert_eq!(code(&o), 2);
    let o = annosel(&["run", "--config", s(&d.join("exp.json")), "--out", s(&out)]);
    assert_eq!(code(&o), 3);

    let cfg = serde_json::json!({
        "dataset_path": data("breast_cancer.csv"),
        "label_column": "no_such_column",
        "batch_files": ["nowhere.json"],
    });
    fs::write(d.join("exp2.json"), cfg.to_string()).unwrap();
    let o = annosel(&["run", "--config", s(&d.join("exp2.json")), "--out", s(&out)]);
    assert_eq!(code(&o), 3);

    let o = annosel(&["run"]);
    assert_eq!(code(&o), 2);
}

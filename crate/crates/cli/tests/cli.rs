use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn sample(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../data/sample")
        .join(name)
}

fn semdex(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_semdex"))
        .arg("-q")
        .args(args)
        .env_remove("SEMDEX_CONFIG")
        .env_remove("SEMDEX_CORPUS")
        .env_remove("SEMDEX_INDEX")
        .env_remove("SEMDEX_MODEL")
        .env_remove("SEMDEX_VOCAB")
        .output()
        .expect("spawn semdex")
}

fn ok(args: &[&str]) -> Output {
    let out = semdex(args);
    assert!(
        out.status.success(),
        "semdex {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// build-index, train and classify into `dir`; returns the prediction file.
fn pipeline(dir: &Path, extra: &[&str]) -> PathBuf {
    let corpus = sample("corpus.jsonl");
    let vocab = sample("vocabulary.json");
    let index = dir.join("index.json");
    let model = dir.join("model.json");
    let preds = dir.join("predictions.jsonl");
    let common = ["--corpus", s(&corpus), "--vocab", s(&vocab), "--index", s(&index)];
    ok(&[&["build-index"], &common[..]].concat());
    ok(&[&["train", "--trees", "15", "--model", s(&model)], &common[..], extra].concat());
    ok(&[
        &[
            "classify",
            "--model",
            s(&model),
            "--index",
            s(&index),
            "--vocab",
            s(&vocab),
            "--input",
            s(&corpus),
            "--output",
            s(&preds),
            "--exclude-self",
        ][..],
        extra,
    ]
    .concat());
    preds
}

#[test]
fn classify_without_model_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = semdex(&[
        "classify",
        "--input",
        s(&sample("corpus.jsonl")),
        "--output",
        s(&dir.path().join("p.jsonl")),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--model"));
    assert!(!dir.path().join("p.jsonl").exists());
}

#[test]
fn unknown_subcommand_is_a_usage_error() {
    assert_eq!(semdex(&["reindex"]).status.code(), Some(2));
}

#[test]
fn invalid_parameters_are_rejected_before_reading_data() {
    let dir = tempfile::tempdir().unwrap();
    let index = dir.path().join("index.json");
    for bad in [
        ["--tau", "1.5"],
        ["--k", "0"],
        ["--alpha", "-1"],
        ["--algorithm", "svm"],
    ] {
        let out = semdex(
            &[
                &["build-index", "--corpus", "missing.jsonl", "--index", s(&index)][..],
                &bad[..],
            ]
            .concat(),
        );
        assert_eq!(out.status.code(), Some(2), "{bad:?}");
        assert!(!index.exists());
    }
}

#[test]
fn missing_input_file_fails_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let out = semdex(&[
        "build-index",
        "--corpus",
        "no-such.jsonl",
        "--index",
        s(&dir.path().join("i.json")),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("no-such.jsonl"));
}

#[test]
fn sample_pipeline_predicts_every_document_and_evaluates() {
    let dir = tempfile::tempdir().unwrap();
    let preds = pipeline(dir.path(), &[]);
    let text = fs::read_to_string(&preds).unwrap();
    let lines: Vec<serde_json::Value> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 200);
    assert_eq!(lines[0]["id"], "S0000");
    assert!(lines.iter().all(|l| l["labels"].is_array()));

    let report = dir.path().join("report.json");
    let out = ok(&[
        "evaluate",
        "--gold",
        s(&sample("corpus.jsonl")),
        "--predictions",
        s(&preds),
        "--output",
        s(&report),
    ]);
    assert!(String::from_utf8_lossy(&out.stdout).contains("EBF"));
    let r: serde_json::Value = serde_json::from_str(&fs::read_to_string(report).unwrap()).unwrap();
    assert_eq!(r["m"], 200);
    assert!(r["ebf"].as_f64().unwrap() > 0.5);
}

#[test]
fn reruns_are_byte_identical_across_thread_counts() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let first = fs::read(pipeline(a.path(), &["--threads", "1"])).unwrap();
    let second = fs::read(pipeline(b.path(), &["--threads", "4"])).unwrap();
    assert_eq!(first, second);
    assert_eq!(
        fs::read(a.path().join("model.json")).unwrap(),
        fs::read(b.path().join("model.json")).unwrap()
    );
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("semdex.conf");
    fs::write(
        &cfg,
        format!(
            "# shared paths\ncorpus = {}\nvocab = {}\nindex = {}\ntau = 0.9\n",
            s(&sample("corpus.jsonl")),
            s(&sample("vocabulary.json")),
            s(&dir.path().join("from-config.json")),
        ),
    )
    .unwrap();
    let flag_index = dir.path().join("from-flag.json");
    ok(&["--config", s(&cfg), "build-index", "--index", s(&flag_index)]);
    assert!(flag_index.exists());
    assert!(!dir.path().join("from-config.json").exists());

    ok(&["--config", s(&cfg), "build-index"]);
    assert!(dir.path().join("from-config.json").exists());

    fs::write(&cfg, "colour = blue\n").unwrap();
    assert_eq!(semdex(&["--config", s(&cfg), "build-index"]).status.code(), Some(2));
}

#[test]
fn association_classifier_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let assoc = dir.path().join("assoc.json");
    let preds = dir.path().join("esa.jsonl");
    ok(&[
        "esa-build",
        "--corpus",
        s(&sample("corpus.jsonl")),
        "--measure",
        "tficf",
        "--min-df",
        "2",
        "--output",
        s(&assoc),
    ]);
    ok(&[
        "esa-classify",
        "--assoc",
        s(&assoc),
        "--input",
        s(&sample("corpus.jsonl")),
        "--labels",
        "2",
        "--output",
        s(&preds),
    ]);
    let text = fs::read_to_string(&preds).unwrap();
    assert_eq!(text.lines().count(), 200);
    for line in text.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert!(v["labels"].as_array().unwrap().len() <= 2);
    }
    let bad = semdex(&[
        "esa-classify",
        "--assoc",
        s(&assoc),
        "--input",
        "x",
        "--output",
        "y",
        "--labels",
        "some",
    ]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn bench_writes_report_and_prediction_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = ok(&[
        "bench",
        "--suite",
        "synthetic",
        "--train-docs",
        "200",
        "--test-docs",
        "50",
        "--trees",
        "5",
        "--output-dir",
        s(dir.path()),
    ]);
    let stdout = String::from_utf8_lossy(&out.stdout);
    for heading in [
        "threshold selection",
        "avgsize selection",
        "cutoff selection",
        "ESA Jaccard",
        "information gain",
    ] {
        assert!(stdout.contains(heading), "missing {heading:?}");
    }
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(report["knn"].as_array().unwrap().len(), 9);
    assert_eq!(fs::read_dir(dir.path().join("predictions")).unwrap().count(), 11);
    assert_eq!(fs::read_to_string(dir.path().join("report.txt")).unwrap(), stdout);
}

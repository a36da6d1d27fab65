//! End-to-end checks of the command-line interface against the shipped
//! fixtures.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/fixtures")
}

fn bipos(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bipos")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn path(p: &Path) -> String {
    p.to_string_lossy().into_owned()
}

#[test]
fn train_eval_bddad_prints_pp_4() {
    let dir = tempfile::tempdir().unwrap();
    let fx = fixtures().join("bddad");
    let out = bipos(&[
        "train",
        "--corpus", &path(&fx.join("train.txt")),
        "--tagmap", &path(&fx.join("tagmap.tsv")),
        "--kind", "uniform",
        "--out", &path(dir.path()),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(dir.path().join("model.json").exists());

    let out = bipos(&[
        "eval",
        "--model", &path(&dir.path().join("model.json")),
        "--test", &path(&fx.join("test.txt")),
        "--tagmap", &path(&fx.join("tagmap.tsv")),
        "--out", &path(dir.path()),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("PP = 4"), "{text}");
    assert!(text.contains("LTP = -10"), "{text}");
    assert!(dir.path().join("eval.json").exists());
    assert!(dir.path().join("records.csv").exists());
}

#[test]
fn missing_tagmap_fails_naming_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let fx = fixtures().join("micro");
    let out = bipos(&[
        "train",
        "--corpus", &path(&fx.join("train.txt")),
        "--tagmap", "/no/such/map.tsv",
        "--out", &path(dir.path()),
    ]);
    assert!(!out.status.success());
    assert!(stderr(&out).contains("/no/such/map.tsv"));
}

#[test]
fn training_is_deterministic() {
    let fx = fixtures().join("micro");
    let mut models = Vec::new();
    for _ in 0..2 {
        let dir = tempfile::tempdir().unwrap();
        let out = bipos(&[
            "train",
            "--corpus", &path(&fx.join("train.txt")),
            "--tagmap", &path(&fx.join("tagmap.tsv")),
            "--seed", "7",
            "--out", &path(dir.path()),
        ]);
        assert!(out.status.success(), "{}", stderr(&out));
        models.push(std::fs::read(dir.path().join("model.json")).unwrap());
    }
    assert_eq!(models[0], models[1], "same config and seed give identical model files");
}

#[test]
fn eval_regimes_differ_on_unknown_rows() {
    let dir = tempfile::tempdir().unwrap();
    let fx = fixtures().join("micro");
    let out = bipos(&[
        "train",
        "--corpus", &path(&fx.join("train.txt")),
        "--tagmap", &path(&fx.join("tagmap.tsv")),
        "--out", &path(dir.path()),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let model = path(&dir.path().join("model.json"));

    let mut record_sets = Vec::new();
    for regime in ["m1", "new"] {
        let run = tempfile::tempdir().unwrap();
        let out = bipos(&[
            "eval",
            "--model", &model,
            "--test", &path(&fx.join("test.txt")),
            "--tagmap", &path(&fx.join("tagmap.tsv")),
            "--regime", regime,
            "--out", &path(run.path()),
        ]);
        assert!(out.status.success(), "{}", stderr(&out));
        let csv = std::fs::read_to_string(run.path().join("records.csv")).unwrap();
        let unknown_probs: Vec<String> = csv
            .lines()
            .filter(|l| l.contains(",unknown,"))
            .map(|l| l.rsplit(',').nth(1).unwrap().to_string())
            .collect();
        assert!(!unknown_probs.is_empty());
        record_sets.push(unknown_probs);
    }
    // Constant d2 under M1; context-dependent probabilities under NEW.
    let m1_distinct: std::collections::BTreeSet<_> = record_sets[0].iter().collect();
    let new_distinct: std::collections::BTreeSet<_> = record_sets[1].iter().collect();
    assert_eq!(m1_distinct.len(), 1);
    assert!(new_distinct.len() > 1);
}

#[test]
fn empty_test_file_fails() {
    let dir = tempfile::tempdir().unwrap();
    let fx = fixtures().join("bddad");
    let out = bipos(&[
        "train",
        "--corpus", &path(&fx.join("train.txt")),
        "--tagmap", &path(&fx.join("tagmap.tsv")),
        "--kind", "uniform",
        "--out", &path(dir.path()),
    ]);
    assert!(out.status.success());
    let empty = dir.path().join("empty.txt");
    std::fs::write(&empty, "").unwrap();
    let out = bipos(&[
        "eval",
        "--model", &path(&dir.path().join("model.json")),
        "--test", &path(&empty),
        "--tagmap", &path(&fx.join("tagmap.tsv")),
        "--out", &path(dir.path()),
    ]);
    assert!(!out.status.success());
}

#[test]
fn analyze_writes_all_reports() {
    let dir = tempfile::tempdir().unwrap();
    let fx = fixtures().join("micro");
    let out = bipos(&[
        "train",
        "--corpus", &path(&fx.join("train.txt")),
        "--tagmap", &path(&fx.join("tagmap.tsv")),
        "--out", &path(dir.path()),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let out = bipos(&[
        "analyze",
        "--model", &path(&dir.path().join("model.json")),
        "--test", &path(&fx.join("test.txt")),
        "--tagmap", &path(&fx.join("tagmap.tsv")),
        "--out", &path(dir.path()),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    for name in [
        "impact-prev-tag",
        "following-tag",
        "unknown-impact",
        "components",
        "word-given-tag",
        "zipf",
        "rare-words",
    ] {
        assert!(dir.path().join(format!("{name}.csv")).exists(), "{name}");
    }

    // The component shares sum to one.
    let comp = std::fs::read_to_string(dir.path().join("components.csv")).unwrap();
    let data: Vec<f64> = comp
        .lines()
        .filter(|l| !l.starts_with('#'))
        .nth(1)
        .unwrap()
        .split(',')
        .map(|x| x.parse().unwrap())
        .collect();
    let sum: f64 = data.iter().sum();
    assert!((sum - 1.0).abs() < 1e-9);

    // The zipf curve ends at (1, 1).
    let zipf = std::fs::read_to_string(dir.path().join("zipf.csv")).unwrap();
    let last = zipf.lines().filter(|l| !l.starts_with('#')).last().unwrap();
    assert_eq!(last, "1,1");

    let out = bipos(&[
        "analyze",
        "--model", &path(&dir.path().join("model.json")),
        "--test", &path(&fx.join("test.txt")),
        "--tagmap", &path(&fx.join("tagmap.tsv")),
        "--reports", "nope",
        "--out", &path(dir.path()),
    ]);
    assert!(!out.status.success());
    assert!(stderr(&out).contains("valid reports"));
}

#[test]
fn sweep_rows_and_fixed_vocab_identity() {
    let dir = tempfile::tempdir().unwrap();
    let fx = fixtures().join("micro");
    let out = bipos(&[
        "sweep",
        "--corpus", &path(&fx.join("corpus.txt")),
        "--tagmap", &path(&fx.join("tagmap.tsv")),
        "--n-train", "1600",
        "--sizes", "400,1600",
        "--fixed-vocab",
        "--out", &path(dir.path()),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let csv = std::fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    let rows: Vec<Vec<f64>> = csv
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with("size"))
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 2);
    for row in &rows {
        let (ltp, known, unseen, unknown) = (row[1], row[2], row[3], row[4]);
        assert!((ltp - (known + unseen + unknown)).abs() < 1e-9);
    }
    assert_eq!(rows[0][4], rows[1][4], "unknown part constant under fixed vocabulary");
}

#[test]
fn lambda_search_reports_best_value() {
    let dir = tempfile::tempdir().unwrap();
    let fx = fixtures().join("micro");
    let out = bipos(&[
        "train",
        "--corpus", &path(&fx.join("train.txt")),
        "--tagmap", &path(&fx.join("tagmap.tsv")),
        "--variable", "singular",
        "--out", &path(dir.path()),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let out = bipos(&[
        "lambda-search",
        "--model", &path(&dir.path().join("model.json")),
        "--test", &path(&fx.join("test.txt")),
        "--tagmap", &path(&fx.join("tagmap.tsv")),
        "--out", &path(dir.path()),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).contains("best lambda = 0."));
    assert!(dir.path().join("lambda.json").exists());
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let fx = fixtures().join("micro");
    let cfg = dir.path().join("run.conf");
    std::fs::write(
        &cfg,
        format!(
            "corpus = {}\ntagmap = {}\nc2 = 0.001\nseed = 3\n",
            path(&fx.join("train.txt")),
            path(&fx.join("tagmap.tsv")),
        ),
    )
    .unwrap();
    let out = bipos(&["train", "--config", &path(&cfg), "--c2", "0.0001", "--out", &path(dir.path())]);
    assert!(out.status.success(), "{}", stderr(&out));
    let model = std::fs::read_to_string(dir.path().join("model.json")).unwrap();
    let json: serde_json::Value = serde_json::from_str(&model).unwrap();
    // The flag beats the config entry.
    assert_eq!(json["metadata"]["c2"], "0.0001");
    assert_eq!(json["metadata"]["config.c2"], "0.001");
    assert_eq!(json["model"]["bipos"]["c2"], 0.0001);
}

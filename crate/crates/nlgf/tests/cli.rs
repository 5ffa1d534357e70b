//! End-to-end tests of the `nlgf` binary: stage piping, golden outputs,
//! exit codes, and report formatting.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(rel)
}

fn nlgf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nlgf"))
        .args(args)
        .output()
        .expect("failed to spawn nlgf")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("process terminated by signal")
}

fn path(p: &Path) -> String {
    p.to_str().unwrap().to_string()
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(code(&nlgf(&["--help"])), 0);
    assert_eq!(code(&nlgf(&["--version"])), 0);
    assert_eq!(code(&nlgf(&["analyze", "--help"])), 0);
}

#[test]
fn bad_usage_exits_one() {
    assert_eq!(code(&nlgf(&["--no-such-flag"])), 1);
    assert_eq!(code(&nlgf(&["frobnicate"])), 1);
    // Missing config file is a usage error too.
    let out = nlgf(&[
        "recognize",
        "--config",
        "/nonexistent/nlgf.toml",
        "--in",
        &path(&fixture("corpus6.jsonl")),
        "--out",
        "/dev/null",
    ]);
    assert_eq!(code(&out), 1);
}

#[test]
fn malformed_corpus_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("bad.jsonl");
    std::fs::write(&corpus, "this is not json\n{\"also\": \"missing fields\"}\n").unwrap();
    let out = nlgf(&[
        "recognize",
        "--config",
        &path(&fixture("nlgf.toml")),
        "--in",
        &path(&corpus),
        "--out",
        &path(&dir.path().join("out.jsonl")),
    ]);
    assert_eq!(code(&out), 2);
}

#[test]
fn missing_api_key_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    // Recognize first with the stub config so disambiguate has valid input.
    let mentions = dir.path().join("mentions.jsonl");
    let out = nlgf(&[
        "recognize",
        "--config",
        &path(&fixture("nlgf.toml")),
        "--in",
        &path(&fixture("corpus6.jsonl")),
        "--out",
        &path(&mentions),
    ]);
    assert_eq!(code(&out), 0);

    let config = dir.path().join("http.toml");
    std::fs::write(
        &config,
        format!(
            "counties = {:?}\nstates = {:?}\ncountries = {:?}\naliases = {:?}\n\
             backend = \"http\"\nendpoint = \"http://127.0.0.1:9/v1\"\n\
             llm_model = \"test-model\"\napi_key_env = \"NLGF_CLI_TEST_UNSET_KEY\"\n",
            path(&fixture("gazetteer/counties.geojson")),
            path(&fixture("gazetteer/states.geojson")),
            path(&fixture("gazetteer/countries.geojson")),
            path(&fixture("aliases.tsv")),
        ),
    )
    .unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_nlgf"))
        .args([
            "disambiguate",
            "--config",
            &path(&config),
            "--in",
            &path(&mentions),
            "--out",
            &path(&dir.path().join("resolved.jsonl")),
        ])
        .env_remove("NLGF_CLI_TEST_UNSET_KEY")
        .output()
        .unwrap();
    assert_eq!(code(&out), 3);
    let err = String::from_utf8_lossy(&out.stderr).into_owned();
    assert!(err.contains("NLGF_CLI_TEST_UNSET_KEY"), "stderr: {err}");
}

#[test]
fn staged_pipeline_matches_golden_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let config = path(&fixture("nlgf.toml"));
    let mentions = dir.path().join("mentions.jsonl");
    let resolved = dir.path().join("resolved.jsonl");
    let features = dir.path().join("features.csv");
    let model = dir.path().join("model.json");
    let results = dir.path().join("results.jsonl");

    let out = nlgf(&[
        "recognize",
        "--config",
        &config,
        "--in",
        &path(&fixture("corpus6.jsonl")),
        "--out",
        &path(&mentions),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));

    let out = nlgf(&[
        "disambiguate",
        "--config",
        &config,
        "--in",
        &path(&mentions),
        "--out",
        &path(&resolved),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));

    let out = nlgf(&["featurize", "--in", &path(&resolved), "--out", &path(&features)]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(
        std::fs::read_to_string(&features).unwrap(),
        std::fs::read_to_string(fixture("golden/features6.csv")).unwrap(),
        "staged featurize output differs from golden CSV"
    );

    let out = nlgf(&[
        "train",
        "--in",
        &path(&fixture("train_features.csv")),
        "--out-model",
        &path(&model),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout(&out).contains("selected:"));

    let out = nlgf(&[
        "analyze",
        "--config",
        &config,
        "--in",
        &path(&fixture("corpus6.jsonl")),
        "--out",
        &path(&results),
        "--model",
        &path(&model),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let first = std::fs::read(&results).unwrap();
    assert_eq!(
        first,
        std::fs::read(fixture("golden/analyze6.jsonl")).unwrap(),
        "analyze output differs from golden JSONL"
    );

    // Re-running the same analysis is byte-identical.
    let out = nlgf(&[
        "analyze",
        "--config",
        &config,
        "--in",
        &path(&fixture("corpus6.jsonl")),
        "--out",
        &path(&results),
        "--model",
        &path(&model),
    ]);
    assert_eq!(code(&out), 0);
    assert_eq!(std::fs::read(&results).unwrap(), first);

    // Evaluate against the gold labels carried in the corpus.
    let confusion = dir.path().join("confusion.csv");
    let out = nlgf(&[
        "evaluate",
        "--in",
        &path(&results),
        "--gold",
        &path(&fixture("corpus6.jsonl")),
        "--out",
        &path(&confusion),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    assert!(text.contains("macro"), "missing macro line: {text}");
    assert!(text.contains("1.0000"), "perfect fixture run should score 1.0: {text}");
    let matrix = std::fs::read_to_string(&confusion).unwrap();
    assert!(matrix.starts_with("gold\\pred,"));
}

#[test]
fn tune_alpha_reports_best_threshold() {
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("model.json");
    let out = nlgf(&[
        "train",
        "--in",
        &path(&fixture("train_features.csv")),
        "--out-model",
        &path(&model),
    ]);
    assert_eq!(code(&out), 0);

    let out = nlgf(&[
        "tune-alpha",
        "--config",
        &path(&fixture("nlgf.toml")),
        "--in",
        &path(&fixture("tune_dev.jsonl")),
        "--model",
        &path(&model),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    assert!(text.contains("best alpha: 0.25"), "unexpected sweep output: {text}");
}

#[test]
fn irr_reports_agreement() {
    let out = nlgf(&[
        "irr",
        "--in",
        &path(&fixture("annotations_level.csv")),
        "--task",
        "level",
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    assert!(text.contains("Cohen's kappa") && text.contains("0.5000"), "{text}");

    let out = nlgf(&[
        "irr",
        "--in",
        &path(&fixture("annotations_foci.csv")),
        "--task",
        "foci",
    ]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.contains("Jaccard") && text.contains("0.8372"), "{text}");
}

#[test]
fn benchmark_reports_per_class_metrics() {
    let out = nlgf(&[
        "benchmark",
        "--gold",
        &path(&fixture("benchmark_gold.jsonl")),
        "--in",
        &path(&fixture("benchmark_pred.jsonl")),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    assert!(text.contains("GPE") && text.contains("LOC"), "{text}");
}

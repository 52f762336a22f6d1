//! Integration tests driving the built binary.

use std::path::PathBuf;
use std::process::{Command, Output};

fn npproc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_npproc"))
        .args(args)
        .env_remove("NPPROC_SEED")
        .output()
        .expect("binary runs")
}

fn stdout_str(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn make_corpus(dir: &std::path::Path) -> (PathBuf, PathBuf) {
    let docword = dir.join("docword.txt");
    let vocab = dir.join("vocab.txt");
    // Two clean topics: the first half of the documents uses the first
    // half of the vocabulary, and vice versa.
    let mut body = String::new();
    let mut nnz = 0;
    for d in 1..=12u32 {
        let words = if d <= 6 { 1..=4u32 } else { 5..=8u32 };
        for w in words {
            body.push_str(&format!("{d} {w} {}\n", 2 + (d + w) % 3));
            nnz += 1;
        }
    }
    std::fs::write(&docword, format!("12\n8\n{nnz}\n{body}")).unwrap();
    let words: Vec<String> = (0..8).map(|i| format!("tok{i}")).collect();
    std::fs::write(&vocab, words.join("\n") + "\n").unwrap();
    (docword, vocab)
}

#[test]
fn crp_sampling_is_byte_deterministic() {
    let args = ["sample", "crp", "--n", "3", "--alpha", "1", "--draws", "2", "--seed", "7"];
    let a = npproc(&args);
    let b = npproc(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let text = stdout_str(&a);
    assert!(text.starts_with("# npproc"));
    assert_eq!(text.lines().count(), 3);
}

#[test]
fn missing_required_flag_exits_2_with_usage() {
    let out = npproc(&["sample", "crp", "--alpha", "1"]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.to_lowercase().contains("usage"), "stderr: {stderr}");
}

#[test]
fn runtime_failure_exits_1() {
    let out = npproc(&["score", "ibp", "--file", "/nonexistent/f.txt", "--alpha", "1"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn seed_env_var_is_a_fallback() {
    let explicit = npproc(&["sample", "crp", "--n", "4", "--alpha", "1", "--draws", "3", "--seed", "123"]);
    let via_env = Command::new(env!("CARGO_BIN_EXE_npproc"))
        .args(["sample", "crp", "--n", "4", "--alpha", "1", "--draws", "3"])
        .env("NPPROC_SEED", "123")
        .output()
        .unwrap();
    assert_eq!(stdout_str(&explicit).lines().skip(1).collect::<Vec<_>>(),
               stdout_str(&via_env).lines().skip(1).collect::<Vec<_>>());
}

#[test]
fn ibp_draws_round_trip_through_score() {
    let dir = tempfile::tempdir().unwrap();
    let draws = dir.path().join("draws.txt");
    let out = npproc(&[
        "sample", "ibp", "--n", "4", "--alpha", "2", "--draws", "5", "--seed", "3",
        "--out", draws.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let scored = npproc(&["score", "ibp", "--file", draws.to_str().unwrap(), "--alpha", "2"]);
    assert!(scored.status.success());
    let text = stdout_str(&scored);
    let lines: Vec<&str> = text
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.trim())
        .filter(|l| !l.is_empty())
        .collect();
    assert_eq!(lines.len(), 5);
    for l in lines {
        let lp: f64 = l.parse().unwrap();
        assert!(lp < 0.0, "log prob {lp} should be negative");
    }
}

#[test]
fn ibp_summary_reports_chains_and_pool() {
    let out = npproc(&[
        "sample", "ibp", "--n", "1", "--alpha", "2", "--draws", "2000", "--seed", "1",
        "--summary", "--chains", "3",
    ]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout_str(&out)).unwrap();
    assert_eq!(v["per_chain"].as_array().unwrap().len(), 3);
    let pooled = v["pooled"]["mean_k_plus"].as_f64().unwrap();
    let se = v["pooled"]["se_k_plus"].as_f64().unwrap();
    assert!((pooled - 2.0).abs() <= 4.0 * se, "pooled {pooled} +- {se}");
    assert_eq!(v["pooled"]["draws"].as_u64().unwrap(), 6000);
}

#[test]
fn fit_eval_compare_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let (docword, vocab) = make_corpus(dir.path());
    let model = dir.path().join("lda.json");
    let fit = npproc(&[
        "fit", "lda",
        "--docword", docword.to_str().unwrap(),
        "--vocab", vocab.to_str().unwrap(),
        "--topics", "2", "--iters", "20", "--burn-in", "5",
        "--seed", "9", "--out", model.to_str().unwrap(),
    ]);
    assert!(fit.status.success(), "{}", String::from_utf8_lossy(&fit.stderr));
    let report: serde_json::Value = serde_json::from_str(&stdout_str(&fit)).unwrap();
    assert_eq!(report["k_active"].as_u64().unwrap(), 2);

    let eval = npproc(&[
        "eval", "perplexity",
        "--model", model.to_str().unwrap(),
        "--heldout-docword", docword.to_str().unwrap(),
        "--heldout-vocab", vocab.to_str().unwrap(),
        "--seed", "4",
    ]);
    assert!(eval.status.success());
    let rec: serde_json::Value = serde_json::from_str(&stdout_str(&eval)).unwrap();
    for field in ["log_perplexity", "perplexity"] {
        assert!(rec[field].as_f64().unwrap() > 0.0);
    }
    assert!(rec["scored_tokens"].as_u64().unwrap() > 0);

    let cmp = npproc(&[
        "compare",
        "--models", model.to_str().unwrap(), model.to_str().unwrap(),
        "--heldout-docword", docword.to_str().unwrap(),
        "--heldout-vocab", vocab.to_str().unwrap(),
        "--seed", "4", "--uniform-baseline",
    ]);
    assert!(cmp.status.success());
    let text = stdout_str(&cmp);
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows[0], "name,k_active,log_perplexity,perplexity,scored_tokens");
    assert_eq!(rows[1], rows[2], "identical model files give identical rows");
    let uniform_row = rows[3];
    let log_pplx: f64 = uniform_row.split(',').nth(2).unwrap().parse().unwrap();
    assert!((log_pplx - (8.0_f64).ln()).abs() <= 1e-12);
    // Fitted LDA beats the uniform baseline on its own corpus.
    let lda_log: f64 = rows[1].split(',').nth(2).unwrap().parse().unwrap();
    assert!(lda_log < log_pplx);
}

#[test]
fn gp_commands_emit_csv() {
    let dir = tempfile::tempdir().unwrap();
    let train = dir.path().join("train.csv");
    std::fs::write(&train, "x,y\n0,0.0\n1,1.0\n2,0.0\n").unwrap();
    let out = npproc(&[
        "fit", "gp", "--train", train.to_str().unwrap(),
        "--test-points", "0,1,2", "--noise-variance", "0",
    ]);
    assert!(out.status.success());
    let text = stdout_str(&out);
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows[0], "x,mean,variance");
    // Noiseless interpolation at a training point.
    let fields: Vec<f64> = rows[2].split(',').map(|f| f.parse().unwrap()).collect();
    assert!((fields[1] - 1.0).abs() <= 1e-6);
    assert!(fields[2] <= 1e-6);

    let prior = npproc(&["sample", "gp-prior", "--points", "0,1", "--draws", "3", "--seed", "2"]);
    assert!(prior.status.success());
    let text = stdout_str(&prior);
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows[0], "x,draw_0,draw_1,draw_2");
    assert_eq!(rows.len(), 3);
}

//! End-to-end tests of the expomin binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_expomin")
}

fn run(args: &[&str], dir: &Path) -> Output {
    Command::new(bin())
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn run_ok(args: &[&str], dir: &Path) -> String {
    let out = run(args, dir);
    assert!(
        out.status.success(),
        "command {:?} failed:\n{}",
        args,
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn generate(dir: &Path, seed: &str) -> (PathBuf, PathBuf, PathBuf) {
    run_ok(
        &[
            "generate",
            "--model", "su",
            "--nodes", "1000",
            "--alpha", "0.05",
            "--beta-frac", "0.5",
            "--costs", "real",
            "--seed", seed,
            "--out-graph", "g.tsv",
            "--out-costs", "c.tsv",
            "--out-relevance", "r.tsv",
        ],
        dir,
    );
    (dir.join("g.tsv"), dir.join("c.tsv"), dir.join("r.tsv"))
}

fn json_field(text: &str, field: &str) -> serde_json::Value {
    let v: serde_json::Value = serde_json::from_str(text).expect("valid JSON");
    v[field].clone()
}

#[test]
fn pipeline_reduces_exposure_and_is_consistent() {
    let dir = tempfile::tempdir().unwrap();
    generate(dir.path(), "11");

    let rewire_out = run_ok(
        &[
            "rewire",
            "--algo", "gamine",
            "--budget", "5",
            "--graph", "g.tsv",
            "--costs", "c.tsv",
            "--out-trace", "trace.tsv",
            "--out-graph", "g2.tsv",
        ],
        dir.path(),
    );
    let f_initial = json_field(&rewire_out, "f_initial").as_f64().unwrap();
    let f_final = json_field(&rewire_out, "f_final").as_f64().unwrap();
    assert!(f_final < f_initial, "f did not decrease: {f_initial} -> {f_final}");

    // Evaluate on the saved pre/post graphs must reproduce the trace's
    // f ratio within 1e-6.
    let pre = run_ok(&["evaluate", "--graph", "g.tsv", "--costs", "c.tsv"], dir.path());
    let post = run_ok(&["evaluate", "--graph", "g2.tsv", "--costs", "c.tsv"], dir.path());
    let f_pre = json_field(&pre, "f_total").as_f64().unwrap();
    let f_post = json_field(&post, "f_total").as_f64().unwrap();
    let ratio_eval = f_post / f_pre;
    let ratio_trace = f_final / f_initial;
    assert!(
        (ratio_eval - ratio_trace).abs() < 1e-6,
        "ratios diverge: evaluate {ratio_eval} vs trace {ratio_trace}"
    );

    // The trace file carries provenance and one row per round.
    let trace = std::fs::read_to_string(dir.path().join("trace.tsv")).unwrap();
    assert!(trace.starts_with("#config_hash="));
    let rows = trace.lines().filter(|l| !l.starts_with('#') && !l.starts_with("round")).count();
    assert_eq!(rows, 5);
}

#[test]
fn quality_without_relevance_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    generate(dir.path(), "12");
    let out = run(
        &[
            "rewire",
            "--algo", "gamine",
            "--budget", "2",
            "--quality", "0.5",
            "--graph", "g.tsv",
            "--costs", "c.tsv",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn qrem_run_respects_quality_flagged_relevance() {
    let dir = tempfile::tempdir().unwrap();
    generate(dir.path(), "13");
    let out = run_ok(
        &[
            "rewire",
            "--algo", "gamine",
            "--budget", "3",
            "--quality", "0.9",
            "--graph", "g.tsv",
            "--costs", "c.tsv",
            "--relevance", "r.tsv",
        ],
        dir.path(),
    );
    let f_initial = json_field(&out, "f_initial").as_f64().unwrap();
    let f_final = json_field(&out, "f_final").as_f64().unwrap();
    assert!(f_final <= f_initial);
}

#[test]
fn malformed_graph_is_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("bad.tsv"),
        "#alpha=0.05\nsrc\tdst\tprob\na\tb\t0.5\nb\ta\t0.95\na\tc\t0.5\n",
    )
    .unwrap();
    std::fs::write(dir.path().join("c.tsv"), "a\t1.0\n").unwrap();
    let out = run(
        &["evaluate", "--graph", "bad.tsv", "--costs", "c.tsv"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn dense_reference_rejects_oversized_graphs() {
    let dir = tempfile::tempdir().unwrap();
    run_ok(
        &[
            "generate",
            "--nodes", "2100",
            "--out-graph", "g.tsv",
            "--out-costs", "c.tsv",
        ],
        dir.path(),
    );
    let out = run(
        &["rewire", "--algo", "exact", "--budget", "1", "--graph", "g.tsv", "--costs", "c.tsv"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn seeded_runs_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    generate(dir.path(), "14");
    for name in ["t1.tsv", "t2.tsv"] {
        run_ok(
            &[
                "rewire",
                "--algo", "bl1",
                "--budget", "4",
                "--seed", "99",
                "--graph", "g.tsv",
                "--costs", "c.tsv",
                "--out-trace", name,
            ],
            dir.path(),
        );
    }
    let a = std::fs::read_to_string(dir.path().join("t1.tsv")).unwrap();
    let b = std::fs::read_to_string(dir.path().join("t2.tsv")).unwrap();
    // Identical modulo wall-clock timing in the last column and the config
    // hash, which covers the (distinct) output path.
    let strip = |s: &str| -> Vec<String> {
        s.lines()
            .filter(|l| !l.starts_with("#config_hash="))
            .map(|l| l.rsplit_once('\t').map(|(head, _)| head.to_string()).unwrap_or(l.to_string()))
            .collect()
    };
    assert_eq!(strip(&a), strip(&b));
}

#[test]
fn config_file_merges_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    generate(dir.path(), "15");
    std::fs::write(
        dir.path().join("run.json"),
        serde_json::json!({
            "algo": "bl4",
            "budget": 2,
            "graph": "g.tsv",
            "costs": "c.tsv",
            "out_trace": "tc.tsv"
        })
        .to_string(),
    )
    .unwrap();
    let out = run_ok(&["rewire", "--config", "run.json", "--budget", "3"], dir.path());
    // The flag wins over the config file.
    assert_eq!(json_field(&out, "rounds").as_u64(), Some(3));
    assert_eq!(json_field(&out, "algo").as_str(), Some("bl4"));
    assert!(dir.path().join("tc.tsv").exists());
}

#[test]
fn bench_reports_rows_and_ratio() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_ok(
        &[
            "bench",
            "--sizes", "1000,10000",
            "--rounds", "10",
            "--out", "bench.json",
        ],
        dir.path(),
    );
    assert!(out.is_empty());
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("bench.json")).unwrap())
            .unwrap();
    let rows = report["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 2);
    let t0 = rows[0]["mean_secs_per_rewiring"].as_f64().unwrap();
    let t1 = rows[1]["mean_secs_per_rewiring"].as_f64().unwrap();
    let ratio = t1 / t0;
    assert!(
        (5.0..=20.0).contains(&ratio),
        "per-rewiring time ratio {ratio:.2} outside [5, 20] (t0 = {t0}, t1 = {t1})"
    );
    assert!(report["loglog_slope"]["gamine"].is_number());
}

#[test]
fn bench_single_size_has_no_fit() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_ok(&["bench", "--sizes", "2000", "--rounds", "3"], dir.path());
    let report: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(report["rows"].as_array().unwrap().len(), 1);
    assert!(report["loglog_slope"]["gamine"].is_null());
}

#[test]
fn alpha_override_rescales() {
    let dir = tempfile::tempdir().unwrap();
    generate(dir.path(), "16");
    let base = run_ok(&["evaluate", "--graph", "g.tsv", "--costs", "c.tsv"], dir.path());
    let over = run_ok(
        &["evaluate", "--graph", "g.tsv", "--costs", "c.tsv", "--alpha-override", "0.2"],
        dir.path(),
    );
    let f_base = json_field(&base, "f_total").as_f64().unwrap();
    let f_over = json_field(&over, "f_total").as_f64().unwrap();
    // Faster absorption means strictly less accumulated exposure.
    assert!(f_over < f_base, "{f_over} !< {f_base}");
}

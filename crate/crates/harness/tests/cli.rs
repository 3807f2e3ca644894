/*
Copyright 2026 The diradmm Authors

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
*/

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use diradmm::trace::ConvergenceTrace;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_diradmm"))
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("diradmm-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn ok(out: Output) -> serde_json::Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap_or(serde_json::Value::Null)
}

fn generate(dir: &Path) -> (PathBuf, PathBuf) {
    let g = dir.join("graph.txt");
    let o = dir.join("objective.json");
    let summary = ok(bin()
        .args(["gen-graph", "--n", "6", "--p", "0.4", "--seed", "2", "--strongly-connected", "--out"])
        .arg(&g)
        .output()
        .unwrap());
    assert_eq!(summary["strongly_connected"], true);
    ok(bin()
        .args(["gen-objective", "--n", "6", "--m", "2", "--p", "3", "--seed", "4", "--out"])
        .arg(&o)
        .output()
        .unwrap());
    (g, o)
}

#[test]
fn run_writes_parseable_trace_and_meta() {
    let dir = scratch("run");
    let (g, o) = generate(&dir);
    let csv = dir.join("admm.csv");
    let summary = ok(bin()
        .args(["run", "--alg", "admm", "--rho", "1", "--B", "2", "--tol", "1e-8", "--graph"])
        .arg(&g)
        .arg("--objective")
        .arg(&o)
        .arg("--out")
        .arg(&csv)
        .output()
        .unwrap());
    assert_eq!(summary["termination"], "converged");
    let text = std::fs::read_to_string(&csv).unwrap();
    let trace = ConvergenceTrace::from_csv(&text).unwrap();
    assert_eq!(trace.to_csv(), text);
    assert!(trace.rows.windows(2).all(|w| w[1].comm_rounds == w[0].comm_rounds + 2));
    let meta: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("admm.csv.meta.json")).unwrap()).unwrap();
    assert_eq!(meta["weights_hash"].as_str().unwrap().len(), 64);
    assert!(meta["rng"].as_str().unwrap().contains("ChaCha8"));
}

#[test]
fn build_weights_reports_assumptions() {
    let dir = scratch("weights");
    let (g, _) = generate(&dir);
    let out = dir.join("w.txt");
    let report = ok(bin().args(["build-weights", "--graph"]).arg(&g).arg("--out").arg(&out).output().unwrap());
    assert_eq!(report["all_pass"], true);
    let text = std::fs::read_to_string(out).unwrap();
    let m = diradmm::weights::matrix_from_text(&text).unwrap();
    assert_eq!(m.nrows(), 6);
}

#[test]
fn graph_output_is_deterministic() {
    let a = bin().args(["gen-graph", "--n", "7", "--p", "0.3", "--seed", "11"]).output().unwrap();
    let b = bin().args(["gen-graph", "--n", "7", "--p", "0.3", "--seed", "11"]).output().unwrap();
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert!(String::from_utf8(a.stdout).unwrap().starts_with('7'));
}

#[test]
fn errors_are_json_on_stderr() {
    let dir = scratch("errors");
    let (g, o) = generate(&dir);
    let out = bin()
        .args(["run", "--alg", "push-diging", "--graph"])
        .arg(&g)
        .arg("--objective")
        .arg(&o)
        .output()
        .unwrap();
    assert!(!out.status.success());
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"], "config");

    let cfg = dir.join("single.json");
    std::fs::write(
        &cfg,
        format!(
            r#"{{"graph": {{"kind": "file", "path": {g:?}}}, "objective": {{"kind": "file", "path": {o:?}}},
                "algorithms": [{{"algorithm": "admm", "rho": 1.0, "rounds": 1}}]}}"#
        ),
    )
    .unwrap();
    let out = bin().args(["compare", "--config"]).arg(&cfg).arg("--out-dir").arg(&dir).output().unwrap();
    assert!(!out.status.success());
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"], "comparison-too-small");

    let out = bin().args(["check-theory", "--mu", "0", "--L", "1", "--delta", "0.5"]).output().unwrap();
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"], "theory");
}

#[test]
fn check_theory_reports_interval() {
    let v = ok(bin()
        .args(["check-theory", "--mu", "2", "--L", "2", "--beta", "1000", "--lambda", "0.1", "--delta", "0.5"])
        .output()
        .unwrap());
    assert_eq!(v["lambda_feasible"], false);
    assert!(v["rho_interval"].is_null());
    let v = ok(bin()
        .args(["check-theory", "--mu", "1", "--L", "5", "--delta", "0.5"])
        .output()
        .unwrap());
    assert_eq!(v["lambda_feasible"], true);
    assert!(v["gain_product_at_b_min"].as_f64().unwrap() < 1.0);
}

#[test]
fn compare_and_diagnose_bundles() {
    let dir = scratch("bundle");
    let (g, o) = generate(&dir);
    let cfg = dir.join("cfg.json");
    std::fs::write(
        &cfg,
        format!(
            r#"{{"graph": {{"kind": "file", "path": {g:?}}}, "objective": {{"kind": "file", "path": {o:?}}},
                "algorithms": [{{"algorithm": "admm", "rho": 1.0}}, {{"algorithm": "push-diging", "step": 0.05}}],
                "max_iters": 5000}}"#
        ),
    )
    .unwrap();
    let out_dir = dir.join("cmp");
    let v = ok(bin().args(["compare", "--config"]).arg(&cfg).arg("--out-dir").arg(&out_dir).output().unwrap());
    let hash = v["instance_hash"].as_str().unwrap();
    for f in ["admm.csv", "admm_sweep.csv", "push-diging.csv", "comparison.svg", "meta.json", "summary.json"] {
        assert!(out_dir.join(f).exists(), "{f}");
    }
    let meta: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("meta.json")).unwrap()).unwrap();
    assert_eq!(meta["instance_hash"], hash);

    let diag = dir.join("diag");
    let v = ok(bin()
        .args(["diagnose", "--store-iterates", "--graph"])
        .arg(&g)
        .arg("--objective")
        .arg(&o)
        .arg("--out-dir")
        .arg(&diag)
        .output()
        .unwrap());
    assert_eq!(v["mode"], "certified");
    assert_eq!(v["arrows"]["arrow1_holds"], true);
    let arrows = std::fs::read_to_string(diag.join("arrows.csv")).unwrap();
    assert!(arrows.starts_with("K,norm_atilde_rdy,norm_xperp,norm_yperp\n"));
}

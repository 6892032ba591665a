use std::path::Path;
use std::process::{Command, Output};

use mvcorr::correlations::{assemble_numeric, cyclic_w23_model, residual_w23, WitnessW23};
use serde_json::Value;

fn mvcorr(args: &[&str]) -> Output {
    mvcorr_env(args, &[])
}

fn mvcorr_env(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_mvcorr"));
    cmd.args(args);
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn json_report(args: &[&str]) -> (i32, Value) {
    let mut all = args.to_vec();
    all.extend(["--format", "json"]);
    let o = mvcorr(&all);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap_or_else(|e| panic!("{e}: {}", stdout(&o)));
    (o.status.code().unwrap(), v)
}

#[test]
fn verify_three_input_exact() {
    let o = mvcorr(&["verify", "thm21", "--backend", "exact"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let out = stdout(&o);
    assert!(out.contains("result: PASS"));
    assert!(out.contains("√2/2"));
    let (code, v) = json_report(&["verify", "thm21", "--backend", "exact"]);
    assert_eq!(code, 0);
    assert_eq!(v["version"], mvcorr::VERSION);
    assert!(v["conventions"]["sign"].is_string());
    for c in v["report"]["checks"].as_array().unwrap() {
        assert_eq!(c["passed"], true);
        if c["name"].as_str().unwrap().starts_with("residual") {
            assert_eq!(c["actual"], "0");
        }
    }
}

#[test]
fn verify_three_outcome_prints_targets() {
    let (code, v) = json_report(&["verify", "thm33", "--backend", "exact"]);
    assert_eq!(code, 0);
    assert_eq!(v["report"]["n"], 4);
    let names: Vec<_> = v["report"]["matrices"].as_array().unwrap().iter().map(|m| m["name"].as_str().unwrap().to_string()).collect();
    assert_eq!(names, ["A★", "B★", "C", "D"]);
}

#[test]
fn verify_cyclic_envelope() {
    let (code, v) = json_report(&["verify", "thm21", "--backend", "cyclic", "--window", "8"]);
    assert_eq!(code, 0);
    let r = v["report"]["residual"].as_f64().unwrap();
    assert!(r > 0.0 && r <= 0.25, "{r}");
    for t in ["prop15", "lemma32", "thm33"] {
        assert_eq!(mvcorr(&["verify", t, "--backend", "cyclic", "--window", "8"]).status.code(), Some(0));
        assert_eq!(mvcorr(&["verify", t]).status.code(), Some(0));
    }
}

#[test]
fn verify_usage_errors() {
    assert_eq!(mvcorr(&["verify", "nope"]).status.code(), Some(2));
    assert_eq!(mvcorr(&["verify", "thm21", "--backend", "cyclic", "--window", "1"]).status.code(), Some(2));
    assert_eq!(mvcorr(&["verify", "thm21", "--backend", "fast"]).status.code(), Some(2));
    assert_eq!(mvcorr(&["verify", "thm21", "--window", "x"]).status.code(), Some(2));
    assert_eq!(mvcorr(&[]).status.code(), Some(2));
    assert_eq!(mvcorr(&["--help"]).status.code(), Some(0));
}

#[test]
fn embed_check() {
    let (code, v) = json_report(&["embed-check", "--length", "8", "--exp", "4"]);
    assert_eq!(code, 0);
    assert_eq!(v["report"]["collisions"], 0);
    let (code, v) = json_report(&["embed-check", "--length", "1", "--exp", "1"]);
    assert_eq!(code, 0);
    assert_eq!(v["report"]["words_checked"], 4);
    let o = mvcorr(&["embed-check", "--length", "0"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--length"));
}

fn export(dir: &Path, name: &str, args: &[&str]) -> String {
    let path = dir.join(name);
    let p = path.to_str().unwrap().to_string();
    let mut all = vec!["export"];
    all.extend(args);
    all.extend(["--out", &p]);
    assert_eq!(mvcorr(&all).status.code(), Some(0));
    p
}

#[test]
fn certificate_round_trip_exact() {
    let dir = tempfile::tempdir().unwrap();
    let p = export(dir.path(), "w32.json", &["--witness", "32"]);
    let (code, v) = json_report(&["certificate-check", &p, "--witness", "32"]);
    assert_eq!(code, 0);
    assert_eq!(v["report"]["total_symbolic"], "0");
    assert!(v["report"]["invariant_violations"].as_array().unwrap().is_empty());
    let p = export(dir.path(), "w23.json", &["--witness", "23"]);
    let (code, v) = json_report(&["certificate-check", &p, "--witness", "23"]);
    assert_eq!(code, 0);
    assert_eq!(v["report"]["total"], 0.0);
}

#[test]
fn certificate_detects_perturbation() {
    let dir = tempfile::tempdir().unwrap();
    let p = export(dir.path(), "w32.json", &["--witness", "32"]);
    let mut v: Value = serde_json::from_str(&std::fs::read_to_string(&p).unwrap()).unwrap();
    let entry = &mut v["entries"]["1,1,1,1"][0][0]["a"];
    let base: String = entry.as_str().unwrap().into();
    assert_eq!(base, "0/1");
    *entry = Value::String("1/10".into());
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, v.to_string()).unwrap();
    let o = mvcorr(&["certificate-check", bad.to_str().unwrap(), "--witness", "32"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("marginal depends on the other party's input"));
}

#[test]
fn certificate_cyclic_matches_library() {
    let dir = tempfile::tempdir().unwrap();
    let p = export(dir.path(), "c.json", &["--witness", "23", "--backend", "cyclic", "--window", "16"]);
    let (code, v) = json_report(&["certificate-check", &p, "--witness", "23"]);
    assert_eq!(code, 0);
    let table = assemble_numeric(&cyclic_w23_model(16).unwrap()).unwrap();
    let lib = residual_w23(&table, WitnessW23::derived().unwrap()).unwrap().total.re;
    let got = v["report"]["total"].as_f64().unwrap();
    assert!(got > 0.0);
    assert!((got - lib).abs() <= 1e-12 * lib.max(1e-300) + 1e-24, "{got} vs {lib}");
}

#[test]
fn certificate_parse_errors() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("broken.json");
    std::fs::write(&p, "{\"n\": 3,\n  \"m\": }").unwrap();
    let o = mvcorr(&["certificate-check", p.to_str().unwrap(), "--witness", "32"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 2"), "{}", stderr(&o));
    let o = mvcorr(&["certificate-check", "/nonexistent.json", "--witness", "32"]);
    assert_eq!(o.status.code(), Some(2));
    let w = export(dir.path(), "w.json", &["--witness", "32"]);
    assert_eq!(mvcorr(&["certificate-check", &w, "--witness", "99"]).status.code(), Some(2));
    // shape mismatch between table and witness
    assert_eq!(mvcorr(&["certificate-check", &w, "--witness", "23"]).status.code(), Some(2));
}

fn optimize_csv(dir: &Path, args: &[&str], env: &[(&str, &str)]) -> String {
    let mut all = vec!["optimize"];
    all.extend(args);
    all.extend(["--out", dir.to_str().unwrap()]);
    let o = mvcorr_env(&all, env);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    std::fs::read_to_string(dir.join("defects.csv")).unwrap()
}

#[test]
fn optimize_is_byte_deterministic() {
    let args = ["--witness", "32", "--dims", "2x2,3x3,4x4", "--restarts", "50", "--seed", "42"];
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let csv_a = optimize_csv(a.path(), &args, &[("MVCORR_THREADS", "1")]);
    let csv_b = optimize_csv(b.path(), &args, &[]);
    assert_eq!(csv_a, csv_b);
    let mut lines = csv_a.lines();
    assert_eq!(lines.next(), Some("witness,dA,dB,restart,seed,iterations,defect"));
    assert!(lines.all(|l| l.split(',').count() == 7));
    let summary: Value = serde_json::from_str(&std::fs::read_to_string(a.path().join("summary.json")).unwrap()).unwrap();
    let reports = summary["report"]["reports"].as_array().unwrap();
    assert_eq!(reports.len(), 3);
    for r in reports {
        let ckpt = r["checkpoint"].as_str().unwrap();
        assert!(a.path().join(ckpt).exists());
        let best = r["best_defect"].as_f64().unwrap();
        let min = r["runs"].as_array().unwrap().iter().map(|x| x["defect"].as_f64().unwrap()).fold(f64::INFINITY, f64::min);
        assert_eq!(best, min);
    }
}

#[test]
fn optimize_small_three_outcome() {
    let (code, v) = json_report(&["optimize", "--witness", "23", "--dims", "1x1", "--restarts", "5"]);
    assert_eq!(code, 0);
    let best = v["report"]["reports"][0]["best_defect"].as_f64().unwrap();
    assert!(best > 1.0, "{best}");
    assert_eq!(mvcorr(&["optimize", "--witness", "23", "--dims", "0x1"]).status.code(), Some(2));
    assert_eq!(mvcorr(&["optimize", "--dims", "1x1"]).status.code(), Some(2));
}

#[test]
fn config_file_and_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "command = \"embed-check\"\nlength = 1\nexp = 1\nformat = \"json\"\n").unwrap();
    let o = mvcorr(&["--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["report"]["words_checked"], 4);
    // a flag overrides the file
    let o = mvcorr(&["--config", cfg.to_str().unwrap(), "embed-check", "--length", "2"]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["report"]["max_syllables"], 2);
    assert_eq!(v["report"]["max_exponent"], 1);
    std::fs::write(&cfg, "command = \"embed-check\"\nlenght = 1\n").unwrap();
    let o = mvcorr(&["--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("lenght"));
}

#[test]
fn thread_variable_validated() {
    let o = mvcorr_env(&["verify", "thm21"], &[("MVCORR_THREADS", "zero")]);
    assert_eq!(o.status.code(), Some(2));
}

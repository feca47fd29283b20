use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ltl-workbench"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = run(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn formula_commands() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    let text = ok(d, &["classify", "a & X a"]);
    assert_eq!(text, "guarantee\ttrue\nsafety\ttrue\nfinitary\ttrue\nhorizon\t2\n");
    let text = ok(d, &["classify", "G F a"]);
    assert!(text.contains("guarantee\tfalse") && text.contains("finitary\tfalse"));
    assert!(!ok(d, &["witness", "G a"]).is_empty());
    assert!(!run(d, &["witness", "a & X a"]).status.success());
    assert!(ok(d, &["dump", "--kind", "dra", "F a"]).starts_with("dra\t2\t2\n"));
    assert!(ok(d, &["dump", "--kind", "dfa", "a & X a"]).starts_with("dfa\t"));
    assert!(ok(d, &["dump", "--kind", "nba", "a U b", "--atoms", "a,b"]).starts_with("nba\t"));
    assert!(!run(d, &["classify", "a &"]).status.success());
}

#[test]
fn model_pipeline() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    ok(d, &["gen", "simple", "--p", "0.1", "--out", "pair.json"]);
    assert!(d.join("pair_m1.json").exists() && d.join("pair_m2.json").exists());
    let v = ok(d, &["eval", "--model", "pair_m1.json", "--formula", "F h", "--policy-out", "best.json"]);
    assert_eq!(v.trim().parse::<f64>().unwrap(), 1.0);
    let v = ok(d, &["eval", "--model", "pair_m2.json", "--formula", "F h", "--policy", "best.json"]);
    assert!(v.trim().parse::<f64>().unwrap() < 0.2);

    let prod = ok(d, &["build", "--scheme", "multi-discount", "--model", "pair_m1.json", "--formula", "F h"]);
    let json: serde_json::Value = serde_json::from_str(&prod).unwrap();
    assert!(json["transitions"].as_array().unwrap().iter().all(|t| t.get("reward").is_some()));

    ok(d, &[
        "train", "--algo", "q", "--model", "pair_m1.json", "--formula", "F h", "--steps", "5000", "--seed", "2",
        "--out", "learned.json",
    ]);
    let v = ok(d, &["eval", "--model", "pair_m1.json", "--formula", "F h", "--policy", "learned.json"]);
    assert!((0.0..=1.0).contains(&v.trim().parse::<f64>().unwrap()));

    ok(d, &["gen", "gridworld", "--p", "0.5", "--out", "grid.json"]);
    let v = ok(d, &["eval", "--model", "grid.json", "--formula", "F goal"]);
    assert!(v.trim().parse::<f64>().unwrap() > 0.99);

    ok(d, &["gen", "witness-pair", "--formula", "G a", "--p", "0.2", "--out", "w.json"]);
    ok(d, &["gen", "counterexample", "--shape", "0,1,0,1,1,2", "--p", "0.2", "--out", "c.json"]);
    let v = ok(d, &["eval", "--model", "c_m1.json", "--formula", "F h0"]);
    assert_eq!(v.trim().parse::<f64>().unwrap(), 1.0);

    let out = run(d, &["finitary", "--model", "pair_m1.json", "--formula", "h & X h", "--out", "fin.json"]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("samples used"));
}

#[test]
fn sweep_pipeline() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    let args = [
        "sweep", "--env", "simple", "--scheme", "multi-discount", "--algo", "q", "--p", "0.3,0.1", "--budgets",
        "10,100,1000", "--target-se", "0.05", "--seed", "4", "--out",
    ];
    ok(d, &[&args[..], &["a.csv"]].concat());
    ok(d, &[&args[..], &["b.csv"]].concat());
    let a = std::fs::read(d.join("a.csv")).unwrap();
    assert_eq!(a, std::fs::read(d.join("b.csv")).unwrap());
    assert_eq!(String::from_utf8(a).unwrap().lines().count(), 7);

    ok(d, &["intercept", "--in", "a.csv", "--cutoff", "0.9", "--out", "i.csv"]);
    let report = ok(d, &["checkbound", "--in", "i.csv", "--delta", "0.1"]);
    assert!(report.starts_with("p\tintercept\tbound\tstatus\n"));

    ok(d, &["plot", "--in", "a.csv", "--out", "fig.svg"]);
    let svg = std::fs::read_to_string(d.join("fig.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.matches("<polyline").count() == 2);

    std::fs::write(
        d.join("bad.csv"),
        "environment,scheme,algo,p,cutoff,n_star\nsimple,multi-discount,q,0.01,0.9,50\n",
    )
    .unwrap();
    assert_eq!(run(d, &["checkbound", "--in", "bad.csv"]).status.code(), Some(2));
}

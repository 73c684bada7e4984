use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hankel-prior")).args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("spec.json");
    fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

const CURVE: &str = r#"{"dims":[16],"rank":2,"probs":[0.5,1.0],"sigma":0.1,"solvers":["admm","vanilla-convex"],"trials":3,"seed":4}"#;

#[test]
fn curve_writes_all_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), CURVE);
    let out = dir.path().join("out");
    let o = run(&["curve", "--config", &cfg, "--out", out.to_str().unwrap(), "--jobs", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(out.join("results.csv")).unwrap();
    assert!(csv.starts_with("prob,solver,success_rate,mean_err,trials"));
    assert_eq!(csv.lines().count(), 1 + 2 * 2);
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("results.json")).unwrap()).unwrap();
    assert_eq!(json["law"], "norep");
    assert_eq!(json["records"].as_array().unwrap().len(), 3 * 2 * 2);
    let trials: Vec<_> = fs::read_dir(out.join("trials")).unwrap().collect();
    assert_eq!(trials.len(), 3);
    for t in trials {
        let name = t.unwrap().file_name().into_string().unwrap();
        assert!(name.starts_with("trial-") && name.ends_with(".json"), "{name}");
    }
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), CURVE);
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    assert_eq!(run(&["curve", "--config", &cfg, "--out", a.to_str().unwrap(), "--jobs", "1"]).status.code(), Some(0));
    assert_eq!(run(&["curve", "--config", &cfg, "--out", b.to_str().unwrap(), "--jobs", "3"]).status.code(), Some(0));
    assert_eq!(fs::read(a.join("results.csv")).unwrap(), fs::read(b.join("results.csv")).unwrap());
}

#[test]
fn seed_and_trial_overrides_apply() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), CURVE);
    let out = dir.path().join("out");
    let o = run(&["curve", "--config", &cfg, "--out", out.to_str().unwrap(), "--seed", "99", "--trials", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("results.json")).unwrap()).unwrap();
    assert_eq!(json["spec"]["seed"], 99);
    assert_eq!(json["spec"]["trials"], 2);
    assert_eq!(fs::read_dir(out.join("trials")).unwrap().count(), 2);
}

#[test]
fn other_subcommands_complete() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        ("recover", r#"{"dims":[16],"rank":2,"ms":[10],"sigma":0.1,"seed":1}"#),
        ("phase", r#"{"dims":[6,6],"rank":1,"ms":[8,36],"sigma":0.1,"solvers":["admm"],"trials":2}"#),
        ("runtime", r#"{"dims":[16],"rank":2,"sizes":[[12],[16]],"probs":[0.5],"solvers":["admm","convex"],"trials":2}"#),
        ("diagnose", r#"{"dims":[16],"rank":2,"ms":[12],"sigma":0.1,"seed":3}"#),
    ];
    for (cmd, body) in cases {
        let sub = dir.path().join(cmd);
        fs::create_dir_all(&sub).unwrap();
        let cfg = write_config(&sub, body);
        let out = sub.join("out");
        let o = run(&[cmd, "--config", &cfg, "--out", out.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{cmd}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(out.join("results.csv").exists(), "{cmd}");
        assert!(out.join("results.json").exists(), "{cmd}");
    }
    let csv = fs::read_to_string(dir.path().join("runtime/out/results.csv")).unwrap();
    assert!(csv.starts_with("size,m,solver,median_wall_time,speedup_vs_convex"));
}

#[test]
fn config_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let out = out.to_str().unwrap();
    let bad = [
        r#"{"rank":2,"ms":[4]}"#,
        r#"{"dims":[16],"rank":0,"ms":[4]}"#,
        r#"{"dims":[16],"rank":2,"ms":[4],"trials":0}"#,
        r#"{"dims":[16],"rank":2,"ms":[40]}"#,
        "not json",
    ];
    for body in bad {
        let cfg = write_config(dir.path(), body);
        assert_eq!(run(&["curve", "--config", &cfg, "--out", out]).status.code(), Some(1), "{body}");
    }
    assert_eq!(run(&["curve", "--config", "/nonexistent/spec.json", "--out", out]).status.code(), Some(1));
    assert_eq!(run(&["bogus"]).status.code(), Some(1));
    assert_eq!(run(&["curve"]).status.code(), Some(1));
}

#[test]
fn divergence_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"dims":[16],"rank":2,"ms":[8],"lambda":1e308,"solvers":["admm"],"trials":2}"#,
    );
    let out = dir.path().join("out");
    let o = run(&["curve", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
    // Results are still written before the exit.
    assert!(out.join("results.json").exists());
}

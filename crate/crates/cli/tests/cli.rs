use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use sewn_core::metric::io::read_space_with_hash;

fn sewn(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sewn"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("run sewn")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn json(path: PathBuf) -> Value {
    serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap()
}

fn error_json(o: &Output) -> Value {
    let text = String::from_utf8_lossy(&o.stderr);
    serde_json::from_str(text.trim()).unwrap_or_else(|e| panic!("{e}: {text}"))
}

/// The hash recorded in a CSV metadata line.
fn csv_hash(path: PathBuf) -> String {
    let text = std::fs::read_to_string(path).unwrap();
    let meta = text.lines().next().unwrap().strip_prefix("# ").unwrap();
    let v: Value = serde_json::from_str(meta).unwrap();
    v["config_hash"].as_str().unwrap().to_string()
}

#[test]
fn tunnel_writes_valid_summary() {
    let dir = tempfile::tempdir().unwrap();
    let o = sewn(&["tunnel", "--K", "1", "--delta0", "0.01"], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let s = json(dir.path().join("summary.json"));
    assert!(s["min_scal"].as_f64().unwrap() > 0.0);
    assert_eq!(s["smooth"], Value::Bool(true));
    assert_eq!(s["checks"]["min_scal_positive"], Value::Bool(true));
    let hash = s["config_hash"].as_str().unwrap().to_string();
    assert_eq!(hash.len(), 64);
    assert_eq!(json(dir.path().join("profile.json"))["config_hash"], Value::String(hash.clone()));
    assert_eq!(csv_hash(dir.path().join("curve.csv")), hash);
}

#[test]
fn step_profile_is_flagged() {
    let dir = tempfile::tempdir().unwrap();
    let o = sewn(&["tunnel", "--delta0", "0.01", "--smooth-width", "0"], dir.path());
    assert_eq!(code(&o), 0);
    assert_eq!(json(dir.path().join("summary.json"))["smooth"], Value::Bool(false));
}

#[test]
fn bad_input_exits_with_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        vec!["tunnel", "--alpha-bend", "0.9"],
        vec!["tunnel", "--no-such-flag"],
        vec!["sew", "--n", "4", "--delta", "0.5", "--N", "500"],
        vec!["probe", "--space", "sphere", "--r", "0.3:0.2"],
        vec!["pull", "--K-set", "everything", "--N", "500"],
    ] {
        let o = sewn(&args, dir.path());
        assert_eq!(code(&o), 2, "{args:?}");
        let e = error_json(&o);
        assert_eq!(e["error"]["kind"], "validation", "{args:?}");
        assert_eq!(e["error"]["exit_code"], 2);
    }
}

#[test]
fn config_file_is_read_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "delta0 = 0.03\nalpha_bend = 0.31\n").unwrap();
    let out = dir.path().join("a");
    let o = sewn(&["tunnel", "--config", cfg.to_str().unwrap(), "--delta0", "0.01"], &out);
    assert_eq!(code(&o), 0);
    let c = &json(out.join("summary.json"))["config"];
    assert_eq!(c["delta0"].as_f64(), Some(0.01));
    assert_eq!(c["alpha_bend"].as_f64(), Some(0.31));

    std::fs::write(&cfg, "delta0 = 0.03\ncolour = 1\n").unwrap();
    let o = sewn(&["tunnel", "--config", cfg.to_str().unwrap()], &out);
    assert_eq!(code(&o), 2);

    let o = sewn(&["tunnel", "--config", "/nonexistent/run.toml"], &out);
    assert_eq!(code(&o), 2);
}

#[test]
fn sew_pull_probe_chain() {
    let dir = tempfile::tempdir().unwrap();
    let base = ["--N", "1500", "--seed", "3"];
    let sew_out = dir.path().join("sew");
    let mut args = vec!["sew", "--n", "2", "--delta", "0.2", "--rho-connect", "0.6"];
    args.extend(base);
    let o = sewn(&args, &sew_out);
    assert!(matches!(code(&o), 0 | 4), "{}", String::from_utf8_lossy(&o.stderr));
    let plan = json(sew_out.join("plan.json"));
    for key in ["n", "delta", "delta0", "h_delta", "centers", "shell_width", "H_delta"] {
        assert!(plan.get(key).is_some(), "plan.json lacks {key}");
    }
    let summary = json(sew_out.join("summary.json"));
    let (space, hash) = read_space_with_hash(&sew_out.join("sewn.bin")).unwrap();
    assert_eq!(hash.as_deref(), summary["config_hash"].as_str());
    assert!(space.n() > 1000);

    let pull_out = dir.path().join("pull");
    let mut args = vec!["pull", "--K-set", "geodesic", "--format", "json"];
    args.extend(base);
    let o = sewn(&args, &pull_out);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let pulled = pull_out.join("pulled.json");
    let (y, _) = read_space_with_hash(&pulled).unwrap();
    let s = json(pull_out.join("summary.json"));
    assert_eq!(s["checks"]["metric_axioms"], Value::Bool(true));
    assert_eq!(s["checks"]["mass_bookkeeping"], Value::Bool(true));

    let probe_out = dir.path().join("probe");
    let o = sewn(&["probe", "--space", pulled.to_str().unwrap(), "--at", "0", "--r", "1.0"], &probe_out);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let p = json(probe_out.join("summary.json"));
    assert!(p["config"]["source_hash"].is_string());
    assert_eq!(p["points"].as_u64(), Some(y.n() as u64));
    csv_hash(probe_out.join("probe.csv"));
}

#[test]
fn converge_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let o = sewn(
        &[
            "converge", "--N", "1500", "--schedule", "0.2:2,0.1:3", "--rho-connect", "0.6", "--r", "0.6",
        ],
        dir.path(),
    );
    assert!(matches!(code(&o), 0 | 4), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(dir.path().join("convergence.csv")).unwrap();
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().starts_with("# {"));
    assert_eq!(lines.next(), Some("j,delta,n,h,distortion,gh_upper,mass,neck_area"));
    assert_eq!(lines.count(), 2);
    let hash = csv_hash(dir.path().join("convergence.csv"));
    for j in 0..2 {
        assert_eq!(csv_hash(dir.path().join(format!("ball_{j}.csv"))), hash);
    }
    let s = json(dir.path().join("summary.json"));
    assert_eq!(s["config_hash"].as_str(), Some(hash.as_str()));
    if code(&o) == 4 {
        let e = error_json(&o);
        assert_eq!(e["error"]["kind"], "check");
        assert!(!e["error"]["failed"].as_array().unwrap().is_empty());
    }
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["probe", "--space", "sphere", "--N", "2000", "--seed", "9", "--r", "0.8:1.0:0.1"];
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert_eq!(code(&sewn(&args, &a)), 0);
    assert_eq!(code(&sewn(&args, &b)), 0);
    for f in ["probe.csv", "summary.json"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f}");
    }
    // A different seed changes the hash.
    let c = dir.path().join("c");
    let mut other = args.to_vec();
    other[6] = "10";
    assert_eq!(code(&sewn(&other, &c)), 0);
    assert_ne!(csv_hash(a.join("probe.csv")), csv_hash(c.join("probe.csv")));
}

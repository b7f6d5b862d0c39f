use std::path::Path;
use std::process::{Command, Output};

fn supersym(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_supersym"))
        .current_dir(dir)
        .env_remove("SUPERSYM_SEED")
        .args(args)
        .output()
        .expect("spawn supersym")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn report(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn verify_passes_and_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let o = supersym(dir.path(), &["verify", "--suite", "colorflavor", "--output", "r.json"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.lines().all(|l| l.starts_with("[PASS]")));
    let r = report(&dir.path().join("r.json"));
    assert_eq!(r["config"]["seed"], 42);
    assert!(!r["checks"].as_array().unwrap().is_empty());
}

#[test]
fn duality_dispatch_for_one_class() {
    let dir = tempfile::tempdir().unwrap();
    let o = supersym(dir.path(), &["verify", "--suite", "duality", "--beta", "4", "--n", "2", "--k", "1", "--output", "d.json"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = report(&dir.path().join("d.json"));
    let names: Vec<&str> = r["checks"].as_array().unwrap().iter().map(|c| c["name"].as_str().unwrap()).collect();
    assert!(names.iter().all(|n| n.ends_with("beta=4")), "{names:?}");
}

#[test]
fn injected_fault_fails_with_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let o = supersym(dir.path(), &["verify", "--suite", "algebra", "--inject-fault", "sdet-sign"]);
    assert_eq!(code(&o), 1);
    let stderr = String::from_utf8_lossy(&o.stderr);
    assert!(stderr.contains("sdet-multiplicativity"), "{stderr}");
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&supersym(dir.path(), &["verify", "--suite", "nope"])), 2);
    assert_eq!(code(&supersym(dir.path(), &["verify", "--beta", "3"])), 2);
    assert_eq!(code(&supersym(dir.path(), &["frobnicate"])), 2);
    assert_eq!(code(&supersym(dir.path(), &["pipeline", "crossover", "--t-grid", "1:0:0.5"])), 2);
    std::fs::write(dir.path().join("bad.toml"), "unknown_key = 1\n").unwrap();
    assert_eq!(code(&supersym(dir.path(), &["--config", "bad.toml", "dump-conventions"])), 2);
}

#[test]
fn oversized_request_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let o = supersym(dir.path(), &["pipeline", "density", "--n", "100000", "--samples", "100000"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn pipeline_reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["pipeline", "y2", "--n", "30", "--samples", "40", "--seed", "7"];
    for out in ["a", "b"] {
        let mut a = args.to_vec();
        a.extend(["--out-dir", out]);
        assert_eq!(code(&supersym(dir.path(), &a)), 0);
    }
    for f in ["y2.csv", "y2.json"] {
        let a = std::fs::read(dir.path().join("a").join(f)).unwrap();
        let b = std::fs::read(dir.path().join("b").join(f)).unwrap();
        assert_eq!(a, b, "{f}");
    }
    let csv = std::fs::read_to_string(dir.path().join("a/y2.csv")).unwrap();
    assert!(csv.starts_with("# config: {"));
    assert_eq!(csv.lines().nth(1), Some("x,value,stderr"));
    assert_eq!(csv.lines().count(), 2 + 30);
}

#[test]
fn seed_precedence() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("c.toml"), "seed = 11\n").unwrap();
    let seed_of = |args: &[&str], env: Option<&str>| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_supersym"));
        cmd.current_dir(dir.path()).env_remove("SUPERSYM_SEED");
        if let Some(e) = env {
            cmd.env("SUPERSYM_SEED", e);
        }
        let mut full = args.to_vec();
        full.extend(["verify", "--suite", "colorflavor", "--output", "s.json"]);
        let o = cmd.args(&full).output().unwrap();
        assert_eq!(code(&o), 0);
        report(&dir.path().join("s.json"))["config"]["seed"].as_u64().unwrap()
    };
    assert_eq!(seed_of(&[], None), 42);
    assert_eq!(seed_of(&[], Some("5")), 5);
    assert_eq!(seed_of(&["--config", "c.toml"], Some("5")), 11);
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_supersym"));
    let o = cmd
        .current_dir(dir.path())
        .env("SUPERSYM_SEED", "5")
        .args(["--config", "c.toml", "verify", "--suite", "colorflavor", "--seed", "3", "--output", "s.json"])
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    assert_eq!(report(&dir.path().join("s.json"))["config"]["seed"], 3);
}

#[test]
fn tolerance_override_from_config() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("t.toml"), "[tolerances]\ncolor-flavor-coefficients = -1.0\n").unwrap();
    let o = supersym(dir.path(), &["--config", "t.toml", "verify", "--suite", "colorflavor", "--output", "r.json"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("color-flavor-coefficients"));
}

#[test]
fn crossover_time_grid() {
    let dir = tempfile::tempdir().unwrap();
    let o = supersym(
        dir.path(),
        &["pipeline", "crossover", "--n", "8", "--samples", "10", "--t-grid", "0:0.3:0.1", "--format", "json"],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = report(&dir.path().join("crossover.json"));
    let t: Vec<f64> = r["table"]["t"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
    assert_eq!(t, vec![0.0, 0.1, 0.2, 0.3]);
    let tau = r["table"]["tau"].as_array().unwrap();
    assert!(tau[3].as_f64().unwrap() > tau[1].as_f64().unwrap());
}

#[test]
fn conventions_dump_is_json() {
    let dir = tempfile::tempdir().unwrap();
    let o = supersym(dir.path(), &["dump-conventions", "--format", "json"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v["berezin_normalization"].as_str().unwrap().starts_with("0.398942280401432"));
}

use std::path::Path;
use std::process::Command;

fn fedvi() -> Command {
    Command::new(env!("CARGO_BIN_EXE_fedvi"))
}

fn write_config(dir: &Path, body: &str) -> std::path::PathBuf {
    let path = dir.join("cfg.json");
    std::fs::write(&path, body).unwrap();
    path
}

const SWEEP: &str = r#"{
    "problem": {"kind": "affine", "dim": 2, "seed": 2},
    "algorithm": {"id": "lesgd", "eta": 0.2},
    "federation": {"clients": 2, "local_steps": 2, "rounds": 10},
    "sweep": {"rounds": [10, 20, 40, 80]}
}"#;

#[test]
fn run_then_fit() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SWEEP);
    let csv = dir.path().join("rows.csv");
    let out = fedvi()
        .arg("run")
        .arg(&cfg)
        .arg("--out")
        .arg(&csv)
        .args(["--workers", "2"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("algo,theorem_id,d,M,K,R,sigma"));

    let out = fedvi()
        .arg("fit")
        .arg(&csv)
        .args(["--x", "R", "--group", "algo,sigma"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let line = String::from_utf8(out.stdout).unwrap();
    let fit: serde_json::Value = serde_json::from_str(line.trim()).unwrap();
    let slope = fit["slope"].as_f64().unwrap();
    assert!((-1.3..-0.7).contains(&slope), "{slope}");
}

#[test]
fn run_to_stdout_with_seed_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SWEEP);
    let out = fedvi()
        .arg("run")
        .arg(&cfg)
        .args(["--seed-override", "9"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let seed_col = text
        .lines()
        .next()
        .unwrap()
        .split(',')
        .position(|c| c == "seed")
        .unwrap();
    assert!(text.lines().skip(1).all(|l| l.split(',').nth(seed_col) == Some("9")));
}

#[test]
fn config_rejection_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"problem": {"kind": "affine", "dim": 2, "typo": 1}}"#);
    let out = fedvi().arg("run").arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("problem"));

    let cfg = write_config(
        dir.path(),
        r#"{"problem": {"kind": "affine", "dim": 2}, "algorithm": {"id": "lesgd", "theorem": "T6"},
            "federation": {"clients": 1, "local_steps": 1, "rounds": 2}}"#,
    );
    let out = fedvi().arg("run").arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_passes_and_fails() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SWEEP);
    let out = fedvi().arg("verify").arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));

    let cfg = write_config(
        dir.path(),
        r#"{"problem": {"kind": "affine", "dim": 2, "constants": {"lipschitz": 0.1}},
            "algorithm": {"id": "lesgd", "eta": 0.2},
            "federation": {"clients": 1, "local_steps": 1, "rounds": 2}}"#,
    );
    let out = fedvi().arg("verify").arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAIL lipschitz"));
}

#[test]
fn matrix_file_is_resolved_next_to_config() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("m.txt"), "2\n0 1\n-1 0\n0.1 0.2\n").unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"problem": {"kind": "affine", "dim": 2, "matrix_file": "m.txt"},
            "algorithm": {"id": "lesgd", "eta": 0.2},
            "federation": {"clients": 1, "local_steps": 1, "rounds": 3}}"#,
    );
    let out = fedvi().arg("run").arg(&cfg).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

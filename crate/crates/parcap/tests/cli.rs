//! CLI-level flows: output files, exit codes, golden compare, determinism.

use parcap::harness::cli_run;

fn run(args: &[&str]) -> i32 {
    cli_run(args.iter().map(|s| s.to_string()))
}

#[test]
fn capacity_subcommand_writes_json_and_golden_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("a");
    let out_s = out.to_str().unwrap();
    let code = run(&[
        "parcap", "capacity", "--set", "interval", "--n", "1", "--q", "4", "--out", out_s,
    ]);
    assert_eq!(code, 0);
    let json_path = out.join("capacity.json");
    let text = std::fs::read_to_string(&json_path).unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert!(v["estimate"]["value"].as_f64().unwrap() > 0.0);

    // rerun comparing against the run's own output: determinism contract
    let out2 = dir.path().join("b");
    let code = run(&[
        "parcap",
        "capacity",
        "--set",
        "interval",
        "--n",
        "1",
        "--q",
        "4",
        "--out",
        out2.to_str().unwrap(),
        "--golden",
        json_path.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "identical rerun must pass the golden compare");

    // perturb one numeric field by 10x the tolerance: must fail naming it
    let mut doc: serde_json::Value = serde_json::from_str(&text).unwrap();
    let val = doc["estimate"]["value"].as_f64().unwrap();
    doc["estimate"]["value"] = serde_json::json!(val * (1.0 + 1e-5));
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, serde_json::to_string(&doc).unwrap()).unwrap();
    let code = run(&[
        "parcap",
        "capacity",
        "--set",
        "interval",
        "--n",
        "1",
        "--q",
        "4",
        "--out",
        out2.to_str().unwrap(),
        "--golden",
        bad.to_str().unwrap(),
    ]);
    assert_eq!(code, 2, "perturbed golden must fail");
}

#[test]
fn solve_subcommand_emits_probe_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("solve");
    let code = run(&[
        "parcap",
        "solve",
        "--data",
        "gaussian",
        "--q",
        "2",
        "--h",
        "0.05",
        "--t-end",
        "0.2",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let csv = std::fs::read_to_string(out.join("probes.csv")).unwrap();
    assert!(csv.starts_with("x,t,u,bound_OK1,slack"));
    assert!(csv.lines().count() > 5);
    assert!(out.join("final_snapshot.csv").exists());
}

#[test]
fn solve_csv_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for name in ["r1", "r2"] {
        let out = dir.path().join(name);
        let code = run(&[
            "parcap",
            "solve",
            "--data",
            "gaussian",
            "--q",
            "2",
            "--h",
            "0.05",
            "--t-end",
            "0.2",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(code, 0);
        outputs.push(std::fs::read(out.join("probes.csv")).unwrap());
    }
    assert_eq!(
        outputs[0], outputs[1],
        "same config must give identical bytes"
    );
}

#[test]
fn profile_subcommand_and_regime_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("prof");
    let code = run(&[
        "parcap",
        "profile",
        "--q",
        "2",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    assert!(out.join("profile.csv").exists());
    assert!(out.join("profile.svg").exists());

    // supercritical q has no profile: usage error
    let code = run(&[
        "parcap",
        "profile",
        "--q",
        "4",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 1);
}

#[test]
fn appendix_subcommand_reports() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("app");
    for lemma in ["kernel", "series"] {
        let code = run(&[
            "parcap",
            "appendix",
            "--lemma",
            lemma,
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(code, 0, "{lemma} sweep should pass");
        assert!(out.join(format!("appendix_{lemma}.json")).exists());
    }
    let code = run(&["parcap", "appendix", "--lemma", "nonsense"]);
    assert_eq!(code, 1);
}

#[test]
fn verify_subcommand_single_check() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("v");
    let code = run(&[
        "parcap",
        "verify",
        "--check",
        "spherical-integrals",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("verify.json")).unwrap()).unwrap();
    assert_eq!(report[0]["pass"], serde_json::json!(true));

    let code = run(&["parcap", "verify", "--check", "no-such-check"]);
    assert_eq!(code, 1);
}

#[test]
fn calibration_cache_file_roundtrip() {
    // PARCAP_CACHE-style sidecar: a fresh cache computes and persists, a
    // second instance reads the stored constant back
    use parcap::capacity::CalibrationCache;
    use parcap::domain::ProblemParams;
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cache.json");
    let params = ProblemParams::new(1, 4.0).unwrap();
    let first = CalibrationCache::at_path(Some(path.clone()));
    let a = first.unit_ball_constant(&params).unwrap();
    assert!(path.exists(), "sidecar must be written");
    let second = CalibrationCache::at_path(Some(path.clone()));
    let b = second.unit_ball_constant(&params).unwrap();
    assert_eq!(a, b, "persisted constant must be reused");
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.contains("1,4.000000"), "keyed by N,q: {text}");
}

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn asced(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_asced"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .expect("spawn asced")
}

fn configs() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn cfg(rel: &str) -> String {
    configs().join(rel).to_string_lossy().into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn build_code_reports_parameters() {
    let dir = TempDir::new().unwrap();
    let m = dir.path().join("m");
    let o = asced(&[
        "build-code",
        "--config",
        &cfg("codes/toric_2.json"),
        "--matrix-out",
        p(&m),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o).trim(), "n=8 k=2 rank=6 css=ok");
    let h = fs::read_to_string(m.join("H.txt")).unwrap();
    assert!(h.starts_with("8 16\n"), "{h}");
    assert!(m.join("HX.txt").exists() && m.join("HZ.txt").exists());

    let o = asced(&["build-code", "--config", &cfg("codes/toric_8.json")]);
    assert!(stdout(&o).starts_with("n=128 k=2 "), "{}", stdout(&o));
}

#[test]
fn wrong_expect_is_a_validation_error() {
    let dir = TempDir::new().unwrap();
    let spec = dir.path().join("bad.json");
    fs::write(
        &spec,
        r#"{"type":"gb","ell":23,"a":[0,5,8,12],"b":[0,1,5,7],"expect":{"n":46,"k":4}}"#,
    )
    .unwrap();
    let o = asced(&["build-code", "--config", p(&spec)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("mismatch"), "{}", stderr(&o));
}

#[test]
fn schema_errors_point_at_the_line() {
    let dir = TempDir::new().unwrap();
    let exp = dir.path().join("exp.json");
    fs::write(
        &exp,
        "{\n  \"code\": {\"type\": \"toric\", \"d\": 2},\n  \"decoder\": \"bp5\"\n}",
    )
    .unwrap();
    let o = asced(&["simulate", "--config", p(&exp), "--out", p(dir.path())]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));
}

#[test]
fn usage_errors_exit_1_and_help_exits_0() {
    assert_eq!(asced(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(asced(&["simulate", "--bogus"]).status.code(), Some(1));
    for (sub, flag) in [
        ("build-code", "--matrix-out"),
        ("gen-ensemble", "--seed"),
        ("verify-splitting", "--delta"),
        ("simulate", "--threads"),
        ("report", "--out"),
    ] {
        let o = asced(&[sub, "--help"]);
        assert_eq!(o.status.code(), Some(0));
        assert!(stdout(&o).contains(flag), "{sub} help lacks {flag}");
    }
}

#[test]
fn simulate_minimal_is_reproducible() {
    let dir = TempDir::new().unwrap();
    let cfg_path = cfg("experiments/toric2_bp4_minimal.json");
    let run = |out: &Path| {
        let o = asced(&["simulate", "--config", &cfg_path, "--out", p(out), "--no-timing"]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        fs::read_to_string(out.join("toric2_bp4_minimal.csv")).unwrap()
    };
    let a = run(&dir.path().join("a"));
    let b = run(&dir.path().join("b"));
    assert_eq!(a, b);
    let lines: Vec<&str> = a.lines().collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(
        lines[0],
        "p,trials,t1s,t2s,t1f,t2f,ler,ci_low,ci_high,t1f_fraction,seconds"
    );
    assert!(lines[1].starts_with("0.05,100,"), "{}", lines[1]);

    let sidecar: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("a/toric2_bp4_minimal.json")).unwrap()).unwrap();
    assert_eq!(sidecar["label"], "toric2_bp4_minimal");
    assert_eq!(sidecar["flags"]["no_timing"], true);
    assert_eq!(sidecar["ensemble_hash"].as_str().unwrap().len(), 64);
}

#[test]
fn resume_keeps_finished_points_and_refuses_other_configs() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("run");
    let cfg_path = cfg("experiments/toric2_bp4_minimal.json");
    let args = ["simulate", "--config", &cfg_path, "--out", p(&out), "--no-timing"];
    assert_eq!(asced(&args).status.code(), Some(0));
    let first = fs::read_to_string(out.join("toric2_bp4_minimal.csv")).unwrap();

    let mut resumed = args.to_vec();
    resumed.push("--resume");
    assert_eq!(asced(&resumed).status.code(), Some(0));
    assert_eq!(fs::read_to_string(out.join("toric2_bp4_minimal.csv")).unwrap(), first);

    resumed.extend(["--seed", "99"]);
    let o = asced(&resumed);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("cannot resume"), "{}", stderr(&o));
}

#[test]
fn stored_ensemble_gives_the_same_results() {
    let dir = TempDir::new().unwrap();
    let exp = dir.path().join("small.json");
    fs::write(
        &exp,
        r#"{"code": {"type": "toric", "d": 4}, "decoder": "bp4-asced",
            "ensemble": {"L": 2, "delta": 2, "splitter_weight": 3},
            "bp4": {"p0": 0.1, "i_max": 20}, "channel": {"p_list": [0.04, 0.08]},
            "mc": {"max_trials": 600, "target_errors": 1000, "seed": 7}}"#,
    )
    .unwrap();
    let ens = dir.path().join("ens.json");
    let o = asced(&[
        "gen-ensemble",
        "--config",
        p(&exp),
        "--out",
        p(&ens),
        "--matrix-out",
        p(&dir.path().join("m")),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("batches=2 paths=8"), "{}", stdout(&o));
    assert!(dir.path().join("m/batch_1.txt").exists());

    let a = dir.path().join("a");
    let b = dir.path().join("b");
    assert_eq!(
        asced(&["simulate", "--config", p(&exp), "--out", p(&a), "--no-timing"])
            .status
            .code(),
        Some(0)
    );
    let o = asced(&[
        "simulate",
        "--config",
        p(&exp),
        "--out",
        p(&b),
        "--no-timing",
        "--ensemble",
        p(&ens),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let read = |d: &Path| fs::read_to_string(d.join("small.csv")).unwrap();
    assert_eq!(read(&a), read(&b));
    assert_eq!(read(&a).lines().count(), 3);

    // a different seed means a different ensemble
    let o = asced(&[
        "simulate",
        "--config",
        p(&exp),
        "--out",
        p(&b),
        "--seed",
        "8",
        "--ensemble",
        p(&ens),
    ]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn verify_splitting_passes_on_toric_2_and_refuses_large_codes() {
    let o = asced(&[
        "verify-splitting",
        "--config",
        &cfg("codes/toric_2.json"),
        "--sets",
        "10",
        "--ids",
        "5",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o).trim(), "checked=50 failed=0");

    let o = asced(&[
        "verify-splitting",
        "--config",
        &cfg("codes/gb_46_2_9.json"),
        "--sets",
        "1",
        "--ids",
        "1",
    ]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
}

#[test]
fn report_merges_labeled_curves() {
    let dir = TempDir::new().unwrap();
    let one = dir.path().join("one.csv");
    let two = dir.path().join("two.csv");
    let body = "p,trials,t1s,t2s,t1f,t2f,ler,ci_low,ci_high,t1f_fraction,seconds\n\
                0.05,100,90,5,3,2,0.05,0.02,0.11,0.6,0\n\
                0.1,100,80,5,10,5,0.15,0.09,0.23,0.6666666666666666,0\n";
    fs::write(&one, body).unwrap();
    fs::write(&two, body.replace(",0.6,0\n", ",,0\n")).unwrap();

    let o = asced(&["report", p(&one)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "curve,p,ler,ci_low,ci_high,t1f_fraction");
    assert_eq!(lines[1], "one,0.05,0.05,0.02,0.11,0.6");
    assert_eq!(lines.len(), 3);

    let out = dir.path().join("merged.csv");
    assert_eq!(
        asced(&["report", p(&one), p(&two), "--out", p(&out)]).status.code(),
        Some(0)
    );
    let merged = fs::read_to_string(&out).unwrap();
    assert_eq!(merged.lines().filter(|l| l.starts_with("two,")).count(), 2);
    assert!(merged.contains("two,0.05,0.05,0.02,0.11,\n"), "{merged}");

    let bad = dir.path().join("bad.csv");
    fs::write(&bad, "p,ler\n0.1,0.2\n").unwrap();
    let o = asced(&["report", p(&one), p(&bad)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("bad.csv"), "{}", stderr(&o));
}

#[test]
fn report_takes_labels_from_sidecars() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("run");
    let o = asced(&[
        "simulate",
        "--config",
        &cfg("experiments/toric2_bp4_minimal.json"),
        "--out",
        p(&out),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let csv = out.join("toric2_bp4_minimal.csv");
    let sidecar = out.join("toric2_bp4_minimal.json");
    let mut v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&sidecar).unwrap()).unwrap();
    v["label"] = "relabeled".into();
    fs::write(&sidecar, v.to_string()).unwrap();
    let o = asced(&["report", p(&csv)]);
    assert!(
        stdout(&o).lines().nth(1).unwrap().starts_with("relabeled,0.05,"),
        "{}",
        stdout(&o)
    );
}

use std::path::Path;
use std::process::{Command, Output};

fn tscd(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tscd"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

#[test]
fn benchmark_csv_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let args = |out: &'static str| {
        vec![
            "benchmark",
            "--nodes",
            "4",
            "--rho",
            "0.7",
            "--trials",
            "3",
            "--seed",
            "17",
            "--delta",
            "0.2",
            "--max-samples",
            "3000",
            "--stride",
            "10",
            "--out",
            out,
        ]
    };
    for out in ["a.csv", "b.csv"] {
        let o = tscd(&args(out), dir.path());
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let a = std::fs::read(dir.path().join("a.csv")).unwrap();
    let b = std::fs::read(dir.path().join("b.csv")).unwrap();
    assert!(a.len() > 100);
    assert_eq!(a, b);
    let text = String::from_utf8(a).unwrap();
    assert!(text.starts_with("# tscd-trace v1\ntrial,t,samples,arm,d_t,shd,terminated\n"));
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("a.json")).unwrap()).unwrap();
    assert_eq!(summary["trials"], 3);
}

#[test]
fn generate_then_run_from_files() {
    let dir = tempfile::tempdir().unwrap();
    let o = tscd(
        &[
            "generate", "--nodes", "3", "--rho", "1", "--seed", "4", "--out", "inst",
        ],
        dir.path(),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["net.bif", "dag.txt", "cpdag.txt", "targets.json"] {
        assert!(dir.path().join("inst").join(f).exists(), "{f} missing");
    }
    let o = tscd(
        &[
            "run",
            "--bif",
            "inst/net.bif",
            "--targets",
            "inst/targets.json",
            "--delta",
            "0.1",
            "--max-samples",
            "50000",
            "--candidates",
            "cand.json",
            "--out",
            "result.json",
        ],
        dir.path(),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let result: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("result.json")).unwrap())
            .unwrap();
    assert_eq!(result["mode"], "practical");
    assert!(result["stopping_time"].as_u64().is_some());
    let cand: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("cand.json")).unwrap())
            .unwrap();
    assert!(cand.as_array().is_some());
}

#[test]
fn config_file_and_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("cfg.json"),
        r#"{"nodes": 3, "rho": 1.0, "trials": 1, "max_samples": 200, "algorithm": "random-baseline"}"#,
    )
    .unwrap();
    let o = tscd(
        &[
            "benchmark",
            "--config",
            "cfg.json",
            "--seed",
            "2",
            "--out",
            "t.csv",
        ],
        dir.path(),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(dir.path().join("t.csv")).unwrap();
    assert_eq!(text.lines().count(), 2 + 200);
    let summary = std::fs::read_to_string(dir.path().join("t.json")).unwrap();
    assert!(summary.contains("\"seed\": 2"));
}

#[test]
fn bad_input_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let o = tscd(&["run", "--delta", "1.5"], dir.path());
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("delta"));

    std::fs::write(
        dir.path().join("bad.bif"),
        "network x {\nvariable A { type discrete [ 2 ] { a b } \n",
    )
    .unwrap();
    let o = tscd(&["run", "--bif", "bad.bif"], dir.path());
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("BIF"));

    let o = tscd(&["run", "--bif", "missing.bif"], dir.path());
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("missing.bif"));
}

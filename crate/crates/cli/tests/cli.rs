use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn golden(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)
}

fn heavytail(args: &[&str], seed_env: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_heavytail"));
    cmd.args(args).env_remove("HEAVYTAIL_SEED").env("RUST_LOG", "error");
    if let Some(s) = seed_env {
        cmd.env("HEAVYTAIL_SEED", s);
    }
    cmd.output().expect("binary runs")
}

fn write_config(dir: &Path, json: &str) -> String {
    let path = dir.join("config.json");
    std::fs::write(&path, json).unwrap();
    path.to_str().unwrap().to_owned()
}

#[test]
fn csv_matches_golden_files() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["small", "small_ld"] {
        let config = golden(&format!("{name}.json"));
        let want = std::fs::read(golden(&format!("{name}.csv"))).unwrap();
        for threads in ["1", "3"] {
            let out = dir.path().join(format!("{name}-{threads}.csv"));
            let res = heavytail(
                &[
                    "--config",
                    config.to_str().unwrap(),
                    "--seed",
                    "11",
                    "--threads",
                    threads,
                    "--no-timing",
                    "--out",
                    out.to_str().unwrap(),
                ],
                None,
            );
            assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
            let got = std::fs::read(&out).unwrap();
            assert!(got == want, "{name} with {threads} threads:\n{}", String::from_utf8_lossy(&got));
        }
    }
}

#[test]
fn seed_falls_back_to_environment() {
    let dir = tempfile::tempdir().unwrap();
    let config = golden("small_ld.json");
    let out = dir.path().join("env.csv");
    let res = heavytail(
        &["--config", config.to_str().unwrap(), "--no-timing", "--out", out.to_str().unwrap()],
        Some("11"),
    );
    assert!(res.status.success());
    assert_eq!(std::fs::read(&out).unwrap(), std::fs::read(golden("small_ld.csv")).unwrap());
    // the flag wins over the environment
    let res = heavytail(
        &["--config", config.to_str().unwrap(), "--seed", "12", "--no-timing", "--out", out.to_str().unwrap()],
        Some("11"),
    );
    assert!(res.status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.lines().skip(1).all(|l| l.ends_with(",12,")), "{text}");
}

#[test]
fn empty_grid_is_a_config_error_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("never.csv");
    for json in [
        r#"{"experiment": "level_crossing", "model": {"kind": "queue", "service_alpha": 2.5, "load": 0.5}, "b": []}"#,
        r#"{"experiment": "large_deviation", "model": {"kind": "lambda_laplace", "alpha": 4}, "n": [], "b_per_n": 1}"#,
        r#"{"experiment": "table3", "r": []}"#,
    ] {
        let config = write_config(dir.path(), json);
        let res = heavytail(&["--config", &config, "--out", out.to_str().unwrap()], None);
        assert_eq!(res.status.code(), Some(2), "{json}");
        assert!(String::from_utf8_lossy(&res.stderr).contains("empty grid"));
        assert!(!out.exists());
    }
}

#[test]
fn exit_codes_separate_failure_kinds() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o.csv");
    let out_s = out.to_str().unwrap();

    let bad_json = write_config(dir.path(), r#"{"experiment": "level_crossing", "b": [1,"#);
    assert_eq!(heavytail(&["--config", &bad_json, "--out", out_s], None).status.code(), Some(2));
    assert_eq!(heavytail(&["--preset", "table7", "--out", out_s], None).status.code(), Some(2));
    assert_eq!(heavytail(&["--out", out_s], None).status.code(), Some(2));

    let impossible = write_config(
        dir.path(),
        r#"{"experiment": "level_crossing", "model": {"kind": "pareto_centered", "alpha": 1.4},
            "mu": 1, "b": [100], "regime": {"kind": "strong_efficiency"}}"#,
    );
    let res = heavytail(&["--config", &impossible, "--out", out_s], None);
    assert_eq!(res.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&res.stderr).contains("impossibility result"));
    assert!(!out.exists());

    let fine = golden("small_ld.json");
    let unwritable = dir.path().join("missing-dir/o.csv");
    let res = heavytail(&["--config", fine.to_str().unwrap(), "--out", unwritable.to_str().unwrap()], None);
    assert_eq!(res.status.code(), Some(4));
}

#[test]
fn infinite_work_warning_reaches_stderr() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        r#"{"experiment": "level_crossing", "model": {"kind": "pareto_centered", "alpha": 1.75},
            "mu": 1, "b": [50], "replications": 20}"#,
    );
    let out = dir.path().join("o.csv");
    let res = Command::new(env!("CARGO_BIN_EXE_heavytail"))
        .args(["--config", &config, "--out", out.to_str().unwrap()])
        .env("RUST_LOG", "warn")
        .output()
        .unwrap();
    assert!(res.status.success());
    assert!(String::from_utf8_lossy(&res.stderr).contains("expected termination time is infinite"));
}

#[test]
fn plots_are_written() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o.csv");
    let plots = dir.path().join("plots");
    let config = golden("small.json");
    let res = heavytail(
        &[
            "--config",
            config.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
            "--emit-plots",
            plots.to_str().unwrap(),
        ],
        None,
    );
    assert!(res.status.success());
    for f in ["estimate.svg", "cv.svg"] {
        let svg = std::fs::read_to_string(plots.join(f)).unwrap();
        assert!(svg.starts_with("<svg") && svg.contains("polyline"));
    }
}

#[test]
fn property_suite_preset_passes() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), r#"{"experiment": "property_suite", "property_draws": 500}"#);
    let out = dir.path().join("p.csv");
    let res = heavytail(&["--config", &config, "--out", out.to_str().unwrap(), "--no-timing"], None);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stdout));
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().count(), 8);
    assert!(text.lines().skip(1).all(|l| l.contains(",1.0,")));
}

use std::process::{Command, Output};

fn qgan(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qgan"))
        .args(args)
        .output()
        .unwrap()
}

#[test]
fn runs_and_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("bloch.csv");
    let res = qgan(&[
        "--experiment",
        "bloch-limit-cycle",
        "--turns",
        "3",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(
        res.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&res.stderr)
    );
    let csv = std::fs::read_to_string(&out).unwrap();
    assert_eq!(csv.lines().count(), 4);
    let summary = String::from_utf8(res.stdout).unwrap();
    assert!(summary.starts_with("label,seed,"));
    assert_eq!(summary.lines().count(), 2);
}

#[test]
fn config_file_with_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    std::fs::write(
        &cfg,
        "experiment = \"mixed-omd\"\nturns = 2\nseeds = [0, 1]\n",
    )
    .unwrap();
    let out = dir.path().join("o.csv");
    let res = qgan(&[
        "--config",
        cfg.to_str().unwrap(),
        "--seed",
        "4",
        "--purity",
        "0.625",
        "--optimizer",
        "gda",
        "--lr-d",
        "0.2",
        "--lr-g",
        "0.1",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(res.status.code(), Some(0));
    let csv = std::fs::read_to_string(&out).unwrap();
    assert_eq!(csv.lines().count(), 3);
    assert!(csv.lines().skip(1).all(|l| l.ends_with(",4,gda/P=0.625")));
}

#[test]
fn configuration_errors_exit_one() {
    assert_eq!(qgan(&["--experiment", "fig-9"]).status.code(), Some(1));
    assert_eq!(
        qgan(&["--experiment", "mixed-omd", "--optimizer", "sgd"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        qgan(&["--experiment", "mixed-omd", "--turns", "0"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(qgan(&["--bogus-flag"]).status.code(), Some(1));
}

#[test]
fn io_errors_exit_two() {
    let res = qgan(&[
        "--experiment",
        "bloch-limit-cycle",
        "--turns",
        "2",
        "--out",
        "/nonexistent-dir/sub/out.csv",
    ]);
    assert_eq!(res.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&res.stderr).contains("/nonexistent-dir/sub/out.csv"));
    assert_eq!(
        qgan(&["--config", "/nonexistent/c.toml"]).status.code(),
        Some(2)
    );
}

#[test]
fn help_exits_zero() {
    assert_eq!(qgan(&["--help"]).status.code(), Some(0));
}

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn qmc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qmc")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

const UNI: [&str; 10] = ["--p", "13", "--m", "1", "--s", "6", "--k", "12", "--A-size", "12"];

fn encode(dir: &Path, msg: &str) -> String {
    let m = dir.join("msg.txt");
    let c = dir.join("cw.txt");
    fs::write(&m, msg).unwrap();
    let mut args = vec!["encode"];
    args.extend(UNI);
    args.extend(["--in", m.to_str().unwrap(), "--out", c.to_str().unwrap()]);
    assert!(qmc(&args).status.success());
    c.to_str().unwrap().to_string()
}

#[test]
fn params_reports_thresholds() {
    let mut args = vec!["params"];
    args.extend(UNI);
    let o = qmc(&args);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("r=2 d=16 T_min=6 T_stated=7"), "{out}");
    assert!(out.contains("dimension=12 rate=1/6"), "{out}");
}

#[test]
fn regime_violation_exits_2() {
    let o = qmc(&["params", "--p", "13", "--m", "1", "--s", "14", "--k", "3", "--A-size", "3"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn malformed_input_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.txt");
    fs::write(&bad, "not a codeword").unwrap();
    let o = qmc(&["decode", "--in", bad.to_str().unwrap(), "--r", "2"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn zero_errors_is_identity() {
    let dir = tempfile::tempdir().unwrap();
    let c = encode(dir.path(), "m=1; 1@0; 2@1; 5@7");
    let o = qmc(&["corrupt", "--in", &c, "--errors", "0", "--seed", "9"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), fs::read_to_string(&c).unwrap());
}

#[test]
fn encode_decode_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let msg = "m=1; 1@0; 2@1; 5@7";
    let c = encode(dir.path(), msg);
    let o = qmc(&["decode", "--in", &c, "--r", "2"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains(&format!("12: {msg}")), "{}", stdout(&o));

    let w = dir.path().join("w.txt");
    let w = w.to_str().unwrap();
    assert!(qmc(&["corrupt", "--in", &c, "--errors", "5", "--seed", "3", "--out", w]).status.success());
    let o = qmc(&["decode", "--in", w, "--r", "2"]);
    assert!(stdout(&o).contains(&format!("7: {msg}")), "{}", stdout(&o));
}

#[test]
fn experiment_is_deterministic() {
    let run = || {
        let mut args = vec!["experiment"];
        args.extend(UNI);
        args.extend(["--r", "2", "--errors", "5", "--trials", "8", "--seed", "42"]);
        let o = qmc(&args);
        assert!(o.status.success());
        stdout(&o)
    };
    let a = run();
    assert_eq!(a, run());
    assert!(a.starts_with("trial,seed,errors,agreement,dim,listed,deg_z,success\n"));
    assert!(a.contains("success_rate=1.0000"), "{a}");
}

#[test]
fn multivariate_experiment_succeeds() {
    let o = qmc(&[
        "experiment", "--p", "13", "--m", "2", "--s", "6", "--k", "4", "--A-size", "4", "--r", "2",
        "--errors", "4", "--trials", "3", "--seed", "5",
    ]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("successes=3"), "{}", stdout(&o));
}

#[test]
fn selftest_passes() {
    let o = qmc(&["selftest", "--seed", "3"]);
    assert!(o.status.success());
    assert!(!stdout(&o).contains("FAIL"));
}

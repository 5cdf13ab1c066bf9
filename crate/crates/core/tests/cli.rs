use std::path::PathBuf;
use std::process::Command;

use qpullback::borcherds::QPReport;
use qpullback::qexp::VVForm;
use qpullback::rational::{big_int, q};
use serde_json::Value;

fn scenario(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(name)
}

fn run(args: &[&str], config: &PathBuf, out: &std::path::Path) -> i32 {
    Command::new(env!("CARGO_BIN_EXE_qpullback"))
        .args(args)
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
        .status
        .code()
        .expect("exit code")
}

fn read(path: PathBuf) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn lattice_info_reports() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(&["lattice-info"], &scenario("e8_info.json"), dir.path()), 0);
    let v = read(dir.path().join("lattice_info.json"));
    assert_eq!(v["order"], 1);
    assert_eq!(run(&["lattice-info"], &scenario("a1_theta.json"), dir.path()), 0);
    let v = read(dir.path().join("lattice_info.json"));
    assert_eq!((v["order"].as_u64(), v["sigma"].as_u64(), v["level"].as_u64()), (Some(2), Some(1), Some(4)));
}

#[test]
fn malformed_input_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"lattices":[{"name":"X","gram":[[1,0],[0,2]]}],"lattice":"X"}"#).unwrap();
    assert_eq!(run(&["lattice-info"], &bad, dir.path()), 2);
    std::fs::write(&bad, r#"{"lattice":"scale(E8, -1)"}"#).unwrap();
    assert_eq!(run(&["theta"], &bad, dir.path()), 2);
    std::fs::write(&bad, "not json").unwrap();
    assert_eq!(run(&["induce"], &bad, dir.path()), 2);
    assert_eq!(run(&["lattice-info"], &dir.path().join("missing.json"), dir.path()), 2);
}

#[test]
fn theta_of_e8() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(&["theta"], &scenario("e8_theta.json"), dir.path()), 0);
    let th = VVForm::from_json(&read(dir.path().join("theta.json"))).unwrap();
    for (n, c) in [(0, 1), (1, 240), (2, 2160), (3, 6720)] {
        assert_eq!(th.coeff(0, q(n, 1)), big_int(c));
    }
}

#[test]
fn verifier_scenarios() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(&["qp-verify"], &scenario("root_glued.json"), dir.path()), 0);
    let report = QPReport::from_json(&read(dir.path().join("report.json"))).unwrap();
    assert!(report.verdict);
    assert_eq!(report.lifted_weight, Some(q(13, 1)));
    assert_eq!(run(&["qp-verify"], &scenario("root_glued_fault.json"), dir.path()), 1);
    assert!(!QPReport::from_json(&read(dir.path().join("report.json"))).unwrap().verdict);
    assert_eq!(run(&["qp-verify"], &scenario("glued_small.json"), dir.path()), 2);
    assert_eq!(run(&["qp-verify", "--assert-witt"], &scenario("glued_small.json"), dir.path()), 0);
}

#[test]
fn induce_scenarios() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(&["induce"], &scenario("pull_push.json"), dir.path()), 0);
    let f = VVForm::from_json(&read(dir.path().join("induced.json"))).unwrap();
    assert_eq!(f.weight(), q(1, 2));
    assert_eq!(run(&["induce"], &scenario("two_elementary.json"), dir.path()), 0);
    let f = VVForm::from_json(&read(dir.path().join("induced.json"))).unwrap();
    assert!(f.is_integral_principal_part().unwrap());
    assert_eq!(run(&["induce"], &scenario("wrong_character.json"), dir.path()), 1);
}

#[test]
fn outputs_are_deterministic() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for (cmd, file, out) in [("induce", "two_elementary.json", "induced.json"), ("qp-verify", "root_glued.json", "report.json")] {
        assert_eq!(run(&[cmd, "--seed", "3"], &scenario(file), a.path()), 0);
        assert_eq!(run(&[cmd, "--seed", "3"], &scenario(file), b.path()), 0);
        let x = std::fs::read(a.path().join(out)).unwrap();
        assert_eq!(x, std::fs::read(b.path().join(out)).unwrap());
    }
}

#[test]
fn nmax_flag_overrides_scenario() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(&["theta", "--nmax", "1"], &scenario("e8_theta.json"), dir.path()), 0);
    let th = VVForm::from_json(&read(dir.path().join("theta.json"))).unwrap();
    assert_eq!(th.trunc(), q(1, 1));
    assert_eq!(run(&["theta", "--nmax", "-1"], &scenario("e8_theta.json"), dir.path()), 2);
}

//! The `hnoether` executable: exit codes, output formats and determinism.

use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hnoether")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["check", "--example", "example1"]).status.code(), Some(0));
    assert_eq!(run(&["check", "--example", "coulomb"]).status.code(), Some(1));
    assert_eq!(run(&["integral", "X2", "--example", "coulomb"]).status.code(), Some(1));
    assert_eq!(run(&["verify", "--example", "example1", "q1"]).status.code(), Some(1));
    assert_eq!(run(&["verify", "--example", "example1", "q1 +"]).status.code(), Some(2));
    assert_eq!(run(&["check", "--example", "nope"]).status.code(), Some(2));
    assert_eq!(run(&["check"]).status.code(), Some(2));
    assert_eq!(run(&["bogus"]).status.code(), Some(2));
    let h0 = run(&["simulate", "--example", "example1", "--state", "1,0", "--h", "0"]);
    assert_eq!(h0.status.code(), Some(2));
    let singular = run(&["simulate", "--example", "coulomb", "--state", "0,1"]);
    assert_eq!(singular.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&singular.stderr).contains("t = 0"));
    assert_eq!(run(&["identity-check", "--n", "1", "--degree", "0"]).status.code(), Some(0));
    assert_eq!(run(&["identity-check", "--n", "1", "--corrupt"]).status.code(), Some(1));
}

#[test]
fn integral_is_printed() {
    let o = run(&["integral", "X2", "--example", "example1"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("integral: -t*(1/q1^2 + p1^2) + q1*p1"), "{}", stdout(&o));
    let forced = run(&["integral", "X2", "--example", "coulomb", "--force"]);
    assert!(stdout(&forced).contains("integral:"));
}

#[test]
fn json_on_failure_and_determinism() {
    let args = ["check", "--example", "kepler2", "--json", "--seed", "11"];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.stdout, b.stdout);
    let v: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["seed"], 11);

    let failing = run(&["check", "--example", "coulomb", "--json"]);
    let v: serde_json::Value = serde_json::from_slice(&failing.stdout).unwrap();
    assert_eq!(v["symmetries"][1]["theorem1"]["status"], "nonzero");
    let error = run(&["simulate", "--example", "coulomb", "--state", "0,1", "--json"]);
    let v: serde_json::Value = serde_json::from_slice(&error.stdout).unwrap();
    assert!(v["error"].as_str().unwrap().contains("singular"));
}

#[test]
fn csv_dump_and_file_source() {
    let dir = std::env::temp_dir().join(format!("hnoether-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let csv = dir.join("traj.csv");
    let o = run(&[
        "simulate", "--example", "kepler2", "--state", "1,0,0,1", "--h", "0.01", "--t1", "0.1",
        "--csv", csv.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,q1,q2,p1,p2"));
    assert_eq!(lines.count(), 11);

    let file = dir.join("free.toml");
    std::fs::write(&file, "[system]\nn = 1\nhamiltonian = \"p1^2/2\"\n\n[[symmetry]]\nname = \"shift\"\nxi = \"0\"\neta = [\"1\"]\nzeta = [\"0\"]\n").unwrap();
    let o = run(&["check", "--file", file.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("integral: p1"));
    let bad = dir.join("bad.toml");
    std::fs::write(&bad, "[system]\nn = 1\nhamiltonian = \"p1^^2\"\n").unwrap();
    assert_eq!(run(&["check", "--file", bad.to_str().unwrap()]).status.code(), Some(2));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn examples_are_listed() {
    let o = run(&["examples"]);
    for name in ["example1", "coulomb", "oscillator", "kepler2", "kepler3"] {
        assert!(stdout(&o).contains(name));
    }
}

use std::path::PathBuf;
use std::process::{Command, Output};

fn flatfiber(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_flatfiber")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn temp_file(name: &str, body: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("flatfiber-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

#[test]
fn arith_table_csv() {
    let out = flatfiber(&["arith", "table", "--dmin", "2", "--dmax", "3", "--format", "csv"]);
    assert!(out.status.success());
    let s = stdout(&out);
    let lines: Vec<&str> = s.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[0].starts_with("degree,cone_count,degenerate_count,square_count"));
    assert!(lines[2].starts_with("3,3,7,16,-6,2,1,7/4,45/16,58/27"));
}

#[test]
fn origami_info_json() {
    let p = temp_file("l.txt", "n=3 unit=1\nh=(0,1,2)\nv=(1,2)\n");
    let out = flatfiber(&["origami", "info", p.to_str().unwrap()]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["genus"], 2);
    assert_eq!(v["euler_char"], -2);
}

#[test]
fn cover_build_then_orbit() {
    let out = flatfiber(&["cover", "build", "--degree", "3", "--a", "1", "--branch", "1/2,1/2", "--format", "text"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.starts_with("n=12 unit=1/2"));
    let p = temp_file("s.txt", &text);
    let out = flatfiber(&["orbit", p.to_str().unwrap()]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["size"], 48);
    assert_eq!(v["complete"], true);
}

#[test]
fn count_csv_columns() {
    let p = temp_file("mt.txt", "n=4 unit=1/2\nh=(0,1)(2,3)\nv=(0,2)(1,3)\nmarks=0,1\n");
    let out = flatfiber(&[
        "count",
        "saddles",
        p.to_str().unwrap(),
        "--tmax",
        "20",
        "--samples",
        "4",
        "--formula",
        "8/3",
        "--format",
        "csv",
    ]);
    assert!(out.status.success());
    let s = stdout(&out);
    assert_eq!(s.lines().next(), Some("T,N,normalized,formula,rel_err"));
    assert_eq!(s.lines().count(), 5);
}

#[test]
fn output_is_deterministic() {
    let args = ["cover", "dsym", "--degree", "3", "--denominator", "2"];
    let a = stdout(&flatfiber(&args));
    let b = stdout(&flatfiber(&["--threads", "1", "cover", "dsym", "--degree", "3", "--denominator", "2"]));
    assert_eq!(a, b);
}

#[test]
fn fiber_verify_and_accept_arith() {
    let out = flatfiber(&["fiber", "verify", "--degree", "3"]);
    assert!(out.status.success());
    let out = flatfiber(&["accept", "--scope", "arith", "--format", "text"]);
    assert!(out.status.success());
    assert!(stdout(&out).starts_with("PASS A1"));
}

#[test]
fn bad_input_fails() {
    let p = temp_file("bad.txt", "n=2\nh=(0,1\n");
    let out = flatfiber(&["origami", "info", p.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());
}

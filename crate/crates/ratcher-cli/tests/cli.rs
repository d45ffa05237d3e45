use std::path::Path;
use std::process::{Command, Output};

fn ratcher(cache: Option<&Path>, args: &[&str]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_ratcher"));
    match cache {
        Some(dir) => cmd.arg("--cache-dir").arg(dir),
        None => cmd.arg("--no-cache"),
    };
    cmd.args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn dims_reports_the_total() {
    let o = ratcher(None, &["dims", "--type", "G2", "--slope", "1/2"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["total"], 9);
    assert_eq!(v["n_clans"], 4);

    let o = ratcher(None, &["dims", "--type", "G", "--rank", "2", "--slope", "2", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().count(), 2);
}

#[test]
fn bad_input_exits_with_two() {
    for args in [
        &["dims", "--type", "A2", "--slope", "1/2"][..],
        &["dims", "--type", "G2", "--slope", "0/2"],
        &["dims", "--type", "X9", "--slope", "1/2"],
        &["apartment-svg", "--type", "F4", "--slope", "1/12"],
    ] {
        assert_eq!(ratcher(None, args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn tables_are_reproducible_with_and_without_the_cache() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["table", "--type", "G2,C2,3D4"];
    let cold = ratcher(Some(dir.path()), &args);
    let warm = ratcher(Some(dir.path()), &args);
    let none = ratcher(None, &args);
    assert_eq!(cold.status.code(), Some(0));
    assert_eq!(stdout(&cold), stdout(&warm));
    assert_eq!(stdout(&cold), stdout(&none));
    assert!(std::fs::read_dir(dir.path()).unwrap().count() > 0);
    let first = stdout(&cold).lines().next().unwrap().to_string();
    assert!(first.starts_with("type,rank,e,d,m,elliptic,total"));

    let empty = ratcher(None, &["table"]);
    assert_eq!(stdout(&empty).lines().count(), 1);
}

#[test]
fn check_reports_mismatches() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("good.csv");
    let bad = dir.path().join("bad.csv");
    let header = "type,e,m1,expected,provenance,feasibility\n";
    std::fs::write(&good, format!("{header}G2,1,2,9,x,feasible\nC2,1,2,4,x,feasible\n")).unwrap();
    std::fs::write(&bad, format!("{header}G2,1,2,10,x,feasible\n")).unwrap();

    let o = ratcher(None, &["check", "--table", good.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).matches("PASS").count(), 2);

    let o = ratcher(None, &["check", "--table", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAIL"));
}

#[test]
fn svg_goes_to_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("g2.svg");
    let o = ratcher(None, &["apartment-svg", "--type", "G2", "--slope", "1/2", "--out", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let svg = std::fs::read_to_string(path).unwrap();
    assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
}

#[test]
fn rootsys_lists_regular_numbers() {
    let o = ratcher(None, &["rootsys", "--type", "3D4"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["relative_type"], "G2");
    assert_eq!(v["h_theta"], 12);
}

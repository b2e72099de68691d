use std::process::{Command, Output};

fn reglat(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_reglat"))
        .args(args)
        .env_remove("REGLAT_CACHE")
        .output()
        .expect("spawn reglat")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_str(stdout(o).trim()).expect("json output")
}

#[test]
fn refuted_lattice_exits_one() {
    let o = reglat(&["regular", "--lattice", "2,3,9,36"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("26"));
}

#[test]
fn confirmed_lattice_exits_zero() {
    let o = reglat(&["--json", "--bound", "20000", "regular", "--lattice", "1,1,1,1"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json(&o)["kind"], "ConfirmedUpTo");
}

#[test]
fn bad_input_exits_two() {
    assert_eq!(reglat(&["regular", "--lattice", "1,0,2"]).status.code(), Some(2));
    assert_eq!(reglat(&["asets", "--prime", "9"]).status.code(), Some(2));
    assert_eq!(reglat(&["verify-paper", "--only", "nope"]).status.code(), Some(2));
}

#[test]
fn lambda_json() {
    let o = reglat(&["--json", "lambda", "--lattice", "1,1,1,4", "--prime", "2"]);
    assert!(o.status.success());
    assert_eq!(json(&o)["lambda"], serde_json::json!([1, 1, 1, 1]));
}

#[test]
fn local_set_json() {
    let o = reglat(&["--json", "local-set", "--lattice", "1,1,1", "--prime", "2"]);
    assert!(o.status.success());
    let v = json(&o);
    let missing: Vec<_> = v["classes"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["member"] == false)
        .map(|c| (c["e"].as_u64().unwrap(), c["u"].as_u64().unwrap()))
        .collect();
    assert_eq!(missing, [(0, 7), (2, 7), (4, 7)]);
}

#[test]
fn redundancy_exit_code_tracks_answer() {
    let o = reglat(&["--json", "redundant", "--lattice", "1,1,1", "--n", "3"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(json(&o)["redundant"], false);
    let o = reglat(&["--json", "redundant", "--lattice", "1,1,1,1", "--n", "2"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn t_value_table() {
    let o = reglat(&["table", "--which", "2"]);
    assert!(o.status.success());
    let v = json(&o);
    let ts: Vec<u64> = v.as_array().unwrap().iter().map(|r| r["t"].as_u64().unwrap()).collect();
    assert_eq!(ts, [77, 69, 161, 473, 23, 17]);
}

#[test]
fn minimalize_drops_redundant_square() {
    let o = reglat(&["minimalize", "--lattice", "1,1,1,1,2"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim(), "<1,1,1,1>");
}

#[test]
fn verify_subset_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.json");
    let o = reglat(&[
        "verify-paper",
        "--only",
        "s-sequence",
        "--only",
        "prime-sets",
        "--report",
        report.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(v["passed"], 2);
    assert_eq!(v["checks"][0]["status"], "PASS");
}

#[test]
fn cache_dir_is_populated() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let args = ["--cache-dir", d, "--bound", "5000", "regular", "--lattice", "1,1,1,2"];
    assert_eq!(reglat(&args).status.code(), Some(0));
    let files = std::fs::read_dir(dir.path()).unwrap().count();
    assert!(files > 0);
    assert_eq!(reglat(&args).status.code(), Some(0));
}

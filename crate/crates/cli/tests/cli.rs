use std::process::{Command, Output};

use serde_json::Value;

fn moyal(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_moyal")).args(args).env_remove("MOYAL_TRUNCATION").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn rows(o: &Output) -> Vec<csv::StringRecord> {
    let mut r = csv::Reader::from_reader(o.stdout.as_slice());
    r.records().map(Result::unwrap).collect()
}

fn num(s: &str) -> f64 {
    s.parse().unwrap_or_else(|_| panic!("not a number: {s:?}"))
}

fn metric<'a>(rs: &'a [csv::StringRecord], name: &str) -> &'a csv::StringRecord {
    rs.iter().find(|r| &r[0] == name).unwrap_or_else(|| panic!("no row {name}"))
}

#[test]
fn spectrum_rows_match_levels() {
    let o = moyal(&["spectrum", "--levels", "3", "--truncation", "40"]);
    assert_eq!(o.status.code(), Some(0));
    let rs = rows(&o);
    assert_eq!(rs.len(), 3);
    assert!((num(&rs[0][1]) - 2f64.sqrt()).abs() < 1e-11);
    assert!((num(&rs[0][2]) - 2f64.sqrt()).abs() < 1e-5);
    assert!((num(&rs[2][2]) - 10f64.sqrt()).abs() < 1e-5);
}

#[test]
fn spectrum_zero_levels_is_empty() {
    let o = moyal(&["spectrum", "--levels", "0"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().count(), 1);
    assert!(rows(&o).is_empty());
}

#[test]
fn compare_ground_and_first_level() {
    let o = moyal(&["compare", "eig:0", "eig:1"]);
    assert_eq!(o.status.code(), Some(0));
    let rs = rows(&o);
    assert!((num(&metric(&rs, "d_D")[2]) - 0.5f64.sqrt()).abs() < 1e-4);
    assert!((num(&metric(&rs, "d'_L")[2]) - (3f64.sqrt() - 1.0)).abs() < 1e-4);
    assert!((num(&metric(&rs, "ratio")[2]) - 0.9659).abs() < 1e-4);
    assert!((num(&metric(&rs, "d_D_solver")[2]) - 0.5f64.sqrt()).abs() < 1e-6);
}

#[test]
fn compare_state_with_itself() {
    let o = moyal(&["compare", "eig:0", "eig:0"]);
    assert_eq!(o.status.code(), Some(0));
    let rs = rows(&o);
    assert!((num(&metric(&rs, "d_L2")[2]) - 2.0).abs() < 1e-10);
    assert!((num(&metric(&rs, "d_L")[2]) - 2f64.sqrt()).abs() < 1e-6);
    for name in ["d'_L", "d_D", "d_D_solver", "d_D'_same"] {
        assert_eq!(num(&metric(&rs, name)[2]), 0.0, "{name}");
    }
    assert_eq!(&metric(&rs, "ratio")[1], "undefined");
}

#[test]
fn compare_far_translates() {
    let o = moyal(&["compare", "coh:0:1,0", "coh:0:4,4"]);
    assert_eq!(o.status.code(), Some(0));
    let rs = rows(&o);
    assert!((num(&metric(&rs, "d_D")[2]) - 5.0).abs() < 1e-12);
    assert!((num(&metric(&rs, "d'_L")[2]) - 5.0).abs() < 1e-12);
    assert!((num(&metric(&rs, "d_D'_cross")[2]) - 27f64.sqrt()).abs() < 1e-10);
}

#[test]
fn compare_marks_solver_only_pairs() {
    let o = moyal(&["compare", "sph:0,1:0,0,1", "vec:0.6,0.8"]);
    assert_eq!(o.status.code(), Some(0));
    let rs = rows(&o);
    assert_eq!(&metric(&rs, "d_D")[1], "solver-only");
    assert!(num(&metric(&rs, "d_D_solver")[2]) > 0.0);
}

#[test]
fn compare_marks_bounds_only_pairs() {
    let o = moyal(&["compare", "coh:0:0.3,0", "coh:1:0,0.2"]);
    let rs = rows(&o);
    let r = metric(&rs, "d_D");
    assert_eq!(&r[1], "bounds-only");
    assert!(num(&r[10]) <= num(&r[11]));
}

#[test]
fn ratio_series_drops_below_one_percent() {
    let o = moyal(&["ratio", "--m", "0", "--n-max", "50", "--expect-below", "0.01"]);
    assert_eq!(o.status.code(), Some(0));
    let rs = rows(&o);
    assert_eq!(rs.len(), 50);
    assert!(num(&rs.last().unwrap()[6]) < 0.01);
}

#[test]
fn ratio_check_failure_sets_exit_code() {
    let o = moyal(&["ratio", "--m", "0", "--n-max", "5", "--expect-below", "0.01"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn geodesic_reports_all_elements() {
    let o = moyal(&["geodesic", "--truncation", "32"]);
    let rs = rows(&o);
    let l0 = rs.iter().find(|r| &r[0] == "l0" && &r[1] == "geodesic_residual").unwrap();
    assert!(num(&l0[2]) < 1e-10);
    let shift = rs.iter().find(|r| &r[1] == "shift_deviation").unwrap();
    assert!(num(&shift[2]) < 1e-12);
    for el in ["l2", "l3"] {
        assert!(num(&metric(&rs, el)[2]) > 0.01, "{el}");
    }
    // l1 sits below the 0.01 threshold, so the run reports a failed check
    let l1 = num(&metric(&rs, "l1")[2]);
    assert_eq!(o.status.code(), Some(if l1 > 0.01 { 0 } else { 1 }));
}

#[test]
fn double_fixes_lambda_and_passes() {
    let o = moyal(&["double", "--m", "0"]);
    assert_eq!(o.status.code(), Some(0));
    let rs = rows(&o);
    assert!(!rs.is_empty());
    for r in &rs {
        assert!((num(&r[2]) - 0.5f64.sqrt()).abs() < 1e-12);
        assert_eq!(&r[11], "true");
    }
}

#[test]
fn star_default_checks_pass() {
    let o = moyal(&["star"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let checks: Vec<String> = rows(&o).iter().map(|r| r[0].to_string()).collect();
    for c in ["associativity", "projector", "limit", "tracial"] {
        assert!(checks.iter().any(|x| x == c), "{c}");
    }
}

#[test]
fn star_grid_output_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fg.csv");
    let o = moyal(&["star", "--check", "tracial", "--resolution", "64", "--grid-out", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("x1,x2,re,im"));
    assert_eq!(text.lines().count(), 1 + 64 * 64);
}

#[test]
fn csv_output_is_deterministic() {
    let a = moyal(&["compare", "coh:0:0.3,-0.1", "coh:0:-0.2,0.4"]);
    let b = moyal(&["compare", "coh:0:0.3,-0.1", "coh:0:-0.2,0.4"]);
    assert_eq!(a.stdout, b.stdout);
    // twelve significant digits per float
    let rs = rows(&a);
    let v = &metric(&rs, "d_D")[2];
    assert_eq!(v.split('e').next().unwrap().replace(['.', '-'], "").len(), 12);
}

#[test]
fn json_mirrors_distance_report() {
    let o = moyal(&["--format", "json", "compare", "eig:0", "eig:1"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["passed"], Value::Bool(true));
    let rows = v["metrics"].as_array().unwrap();
    let d_l2 = rows.iter().find(|r| r["metric"] == "d_L2").unwrap();
    for key in ["value", "method", "analytic", "operator", "truncation", "residual", "converged", "per_truncation"] {
        assert!(d_l2["report"].get(key).is_some(), "{key}");
    }
}

#[test]
fn usage_errors_emit_a_record() {
    let o = moyal(&["spectrum", "--levels", "x"]);
    assert_eq!(o.status.code(), Some(2));
    let rs = rows(&o);
    assert_eq!(&rs[0][0], "error");
    assert_eq!(&rs[0][1], "usage");

    let o = moyal(&["--format", "json", "compare", "eig:a", "eig:0"]);
    assert_eq!(o.status.code(), Some(2));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["status"], "error");
    assert_eq!(v["kind"], "parse");
}

#[test]
fn domain_errors_are_nonzero() {
    let o = moyal(&["star", "--resolution", "100"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(&rows(&o)[0][1], "domain");
    let o = moyal(&["ratio", "--sphere-z", "0"]);
    assert_eq!(&rows(&o)[0][1], "undefined-limit");
}

#[test]
fn env_var_sets_default_truncation() {
    let o = Command::new(env!("CARGO_BIN_EXE_moyal"))
        .args(["--format", "json", "spectrum", "--levels", "1"])
        .env("MOYAL_TRUNCATION", "12")
        .output()
        .unwrap();
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["truncation"], 12);
    assert_eq!(v["rows"][0]["multiplicity"], 11);
}

#[test]
fn out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("spectrum.csv");
    let o = moyal(&["spectrum", "--levels", "2", "--out", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().count(), 3);
}

#[test]
fn solver_trace_is_written() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("trace.csv");
    let o = moyal(&[
        "compare",
        "eig:0",
        "eig:2",
        "--solver",
        "projected-ascent",
        "--solver-truncation",
        "8",
        "--solver-trace",
        path.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("iteration,objective"));
    assert!(text.lines().count() > 2);
}

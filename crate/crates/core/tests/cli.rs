use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn genbayes(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_genbayes"))
        .args(args)
        .current_dir(dir)
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn simulate(dir: &Path) {
    let o = genbayes(dir, &["simulate", "regression-wrong", "--n", "50", "--sigma", "0.25", "--seed", "7", "--out", "d.csv"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn simulate_writes_half_zero_rows() {
    let dir = tempfile::tempdir().unwrap();
    simulate(dir.path());
    let text = fs::read_to_string(dir.path().join("d.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "x,y");
    assert_eq!(lines.len(), 51);
    let zeros = lines.iter().filter(|l| **l == "0,0").count();
    assert!((10..=40).contains(&zeros), "{zeros} zero rows");
    let first = fs::read(dir.path().join("d.csv")).unwrap();
    simulate(dir.path());
    assert_eq!(first, fs::read(dir.path().join("d.csv")).unwrap());
    let o = genbayes(dir.path(), &["simulate", "regression-wrong", "--n", "0", "--out", "e.csv"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn classification_header_lists_covariates() {
    let dir = tempfile::tempdir().unwrap();
    let o = genbayes(dir.path(), &["simulate", "classification-wrong", "--n", "5", "--p", "3", "--out", "c.csv"]);
    assert_eq!(code(&o), 0);
    let text = fs::read_to_string(dir.path().join("c.csv")).unwrap();
    assert!(text.starts_with("x1,x2,x3,y\n"));
}

#[test]
fn fit_and_predvar() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    simulate(d);
    let o = genbayes(d, &["fit", "blasso", "--data", "d.csv", "--eta", "0.25", "--k", "11", "--iters", "300", "--burnin", "100", "--out-prefix", "f"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let draws = fs::read_to_string(d.join("f_draws.csv")).unwrap();
    assert_eq!(draws.lines().count(), 201);
    assert!(draws.lines().next().unwrap().ends_with("beta_11,sigma2,lambda2"));
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(d.join("f_summary.json")).unwrap()).unwrap();
    for key in ["command", "config", "seed", "results", "wall_time_s", "version"] {
        assert!(summary.get(key).is_some(), "missing {key}");
    }
    assert_eq!(summary["results"]["beta_mean"].as_array().unwrap().len(), 11);

    let o = genbayes(d, &["predvar", "--samples", "f", "--out", "pv.csv"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let pv = fs::read_to_string(d.join("pv.csv")).unwrap();
    let rows: Vec<&str> = pv.lines().collect();
    assert_eq!(rows[0], "x,variance");
    assert_eq!(rows.len(), 202);
    assert!(rows[1].starts_with("-1,"));

    assert_eq!(code(&genbayes(d, &["predvar", "--samples", "f", "--step", "0", "--out", "p.csv"])), 2);
    assert_eq!(code(&genbayes(d, &["predvar", "--samples", "missing", "--out", "p.csv"])), 3);
    assert_eq!(code(&genbayes(d, &["fit", "blasso", "--data", "d.csv", "--eta", "0", "--out-prefix", "g"])), 2);
    assert_eq!(code(&genbayes(d, &["fit", "blasso", "--data", "nope.csv", "--out-prefix", "g"])), 3);
}

#[test]
fn ingestion_errors_name_the_row() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("bad.csv"), "x,y\n0.1,1\n0.2,2\n").unwrap();
    let o = genbayes(d, &["fit", "blogistic", "--data", "bad.csv", "--out-prefix", "g"]);
    assert_eq!(code(&o), 3);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("row 2") && err.contains("column 2"), "{err}");
    fs::write(d.join("text.csv"), "x,y\n0.1,1\n0.2,abc\n").unwrap();
    let o = genbayes(d, &["fit", "blasso", "--data", "text.csv", "--out-prefix", "g"]);
    assert_eq!(code(&o), 3);
}

#[test]
fn safebayes_grids() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    simulate(d);
    let base = ["safebayes", "--data", "d.csv", "--k", "5", "--draws-per-step", "5", "--burn-per-step", "5", "--out", "sb.json"];
    let mut args = base.to_vec();
    args.extend(["--grid", "dyadic:1,3"]);
    assert_eq!(code(&genbayes(d, &args)), 0);
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(d.join("sb.json")).unwrap()).unwrap();
    assert_eq!(v["results"]["grid"], serde_json::json!([1.0, 0.5, 0.25, 0.125]));
    assert_eq!(v["results"]["s"].as_object().unwrap().len(), 4);
    let mut args = base.to_vec();
    args.extend(["--grid", "list:"]);
    assert_eq!(code(&genbayes(d, &args)), 2);
}

#[test]
fn risk_with_one_replication_warns() {
    let dir = tempfile::tempdir().unwrap();
    let o = genbayes(
        dir.path(),
        &["risk", "--methods", "blasso@1,horseshoe", "--n-list", "10", "--replications", "1", "--k", "5", "--iters", "50", "--burnin", "10", "--test-points", "20", "--out", "r.csv"],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stderr).contains("warning"));
    let text = fs::read_to_string(dir.path().join("r.csv")).unwrap();
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows[0], "n,method,risk,se");
    assert_eq!(rows.len(), 3);
    assert!(rows[1].starts_with("10,blasso@1,") && rows[1].ends_with(",0"));
    let o = genbayes(dir.path(), &["risk", "--methods", "blasso@1,blogistic@1", "--n-list", "10", "--out", "r.csv"]);
    assert_eq!(code(&o), 5);
}

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn dyadnet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dyadnet"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = dyadnet(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn data_rows(csv: &str) -> Vec<&str> {
    csv.lines().filter(|l| !l.starts_with('#')).skip(1).collect()
}

fn json(args: &[&str]) -> Value {
    serde_json::from_str(&stdout(args)).unwrap()
}

#[test]
fn gen_row_counts() {
    assert_eq!(data_rows(&stdout(&["gen", "--net", "van-der-corput", "--s", "4"])).len(), 16);
    let csv = stdout(&["gen", "--net", "sobol", "--n", "3", "--s", "8", "--count", "200"]);
    let rows = data_rows(&csv);
    assert_eq!(rows.len(), 200);
    for r in rows {
        let xs: Vec<f64> = r.split(',').map(|v| v.parse().unwrap()).collect();
        assert_eq!(xs.len(), 3);
        assert!(xs.iter().all(|&x| (0.0..1.0).contains(&x)));
    }
}

#[test]
fn gen_count_picks_resolution() {
    let doc = json(&["gen", "--net", "sobol", "--n", "2", "--count", "100", "--format", "json"]);
    assert_eq!(doc["result"]["s"], 7);
    assert_eq!(doc["result"]["count"], 100);
}

#[test]
fn gen_exact_and_shift() {
    let plain = stdout(&["gen", "--s", "3", "--exact"]);
    let shifted = stdout(&["gen", "--s", "3", "--exact", "--shift-seed", "5"]);
    assert!(data_rows(&plain).iter().all(|r| r.split(',').all(|v| v.ends_with("/8"))));
    assert_ne!(data_rows(&plain), data_rows(&shifted));
    assert!(shifted.contains("# seeds: seed=0 shift_seed=5"));
    assert_eq!(shifted, stdout(&["gen", "--s", "3", "--exact", "--shift-seed", "5"]));
}

#[test]
fn provenance_header() {
    let csv = stdout(&["norms", "--s", "3", "--samples", "2000"]);
    let header: Vec<&str> = csv.lines().take_while(|l| l.starts_with('#')).collect();
    assert!(header[0].starts_with("# artifact: dyadnet "));
    assert!(header.contains(&"# mode: float"));
    let cfg: Value = serde_json::from_str(header.iter().find_map(|l| l.strip_prefix("# config: ")).unwrap()).unwrap();
    assert_eq!(cfg["command"], "norms");
    assert_eq!(cfg["samples"], 2000);
    assert_eq!(csv.lines().nth(header.len()).unwrap(), "function,q,estimate,stderr,normalized");
}

#[test]
fn certify_reports() {
    let r = &json(&["certify", "--net", "van-der-corput", "--s", "6"])["result"];
    assert_eq!(r["deficiency"], 0);
    assert_eq!(r["exhaustive"], true);
    assert_eq!(r["box_counts"], true);
    let r = &json(&["certify", "--net", "sobol", "--n", "4", "--s", "5"])["result"];
    assert!(r["deficiency"].as_u64().unwrap() >= 1);
    // above the cap: lower bound, not an error
    let r = &json(&["certify", "--net", "sobol", "--n", "3", "--s", "6", "--cap", "2"])["result"];
    assert!(r["deficiency"].is_u64());
}

#[test]
fn malformed_matrix_file_is_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.txt");
    std::fs::write(&path, "2 2\n10\n0x\n\n01\n10\n").unwrap();
    let out = dyadnet(&["certify", "--net", &format!("file:{}", path.display())]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
}

#[test]
fn matrix_file_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("vdc.txt");
    let gens = dyadic_nets::GeneratorSet::van_der_corput(5).unwrap();
    std::fs::write(&path, dyadic_nets::nets::write_matrix_file(&gens)).unwrap();
    let net = format!("file:{}", path.display());
    assert_eq!(
        data_rows(&stdout(&["gen", "--net", &net])),
        data_rows(&stdout(&["gen", "--s", "5"]))
    );
}

#[test]
fn input_errors_exit_two() {
    for args in [
        &["gen", "--net", "halton", "--s", "3"][..],
        &["gen", "--net", "sobol", "--n", "3", "--s", "12"],
        &["gen", "--net", "sobol", "--n", "5", "--s", "4"],
        &["gen", "--s", "4", "--count", "3"],
        &["norms", "--s", "3", "--samples", "0"],
        &["norms", "--s", "3", "--q-grid", "2,x"],
        &["sweep", "--s-min", "6", "--s-max", "5"],
        &["certify", "--net", "file:/nonexistent/matrix.txt"],
    ] {
        assert_eq!(dyadnet(args).status.code(), Some(2), "{args:?}");
    }
    // explicit opt-in lifts the desk limit
    assert!(dyadnet(&["gen", "--net", "sobol", "--n", "2", "--s", "11", "--large"]).status.success());
}

#[test]
fn verify_default_suite_passes() {
    for s in ["1", "2", "3", "4"] {
        let doc = json(&["verify", "--s", s, "--shift-seed", "11"]);
        let results = doc["result"]["results"].as_array().unwrap();
        assert!(results.iter().all(|r| r["status"] != "fail"), "{doc}");
        assert!(results.iter().all(|r| !r["anchor"].as_str().unwrap().is_empty()));
    }
}

#[test]
fn verify_corrupted_dual_exits_three_with_witness() {
    let out = dyadnet(&["verify", "--s", "3", "--corrupt-dual"]);
    assert_eq!(out.status.code(), Some(3));
    let doc: Value = serde_json::from_slice(&out.stdout).unwrap();
    let poisson = doc["result"]["results"]
        .as_array()
        .unwrap()
        .iter()
        .find(|r| r["name"] == "poisson-summation")
        .unwrap()
        .clone();
    assert_eq!(poisson["status"], "fail");
    assert!(poisson["witness"].as_str().unwrap().starts_with("L = "));
}

#[test]
fn norms_trivial_net_is_zero() {
    let csv = stdout(&["norms", "--net", "sobol", "--n", "1", "--s", "5", "--samples", "2000"]);
    for r in data_rows(&csv).into_iter().filter(|r| r.starts_with("approximation")) {
        let est: f64 = r.split(',').nth(2).unwrap().parse().unwrap();
        assert_eq!(est, 0.0, "{r}");
    }
}

#[test]
fn norms_match_exact_l2() {
    let doc = json(&["norms", "--s", "3", "--q-grid", "2", "--samples", "100000", "--format", "json"]);
    let r = &doc["result"];
    let exact = r["approximation_l2_exact"]["norm"].as_f64().unwrap();
    let e = &r["approximation"]["estimates"][0];
    let (est, se) = (e["estimate"].as_f64().unwrap(), e["stderr"].as_f64().unwrap());
    assert!((est - exact).abs() <= 3.0 * se, "{est} ± {se} vs {exact}");
}

#[test]
fn sweep_single_resolution_and_file_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep.csv");
    let o = dyadnet(&[
        "sweep", "--s-min", "5", "--s-max", "5", "--shifts", "2", "--samples", "2000", "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    let csv = std::fs::read_to_string(Path::new(&out)).unwrap();
    let rows = data_rows(&csv);
    assert_eq!(rows.iter().filter(|r| r.starts_with("row,")).count(), 2 * 3);
    assert_eq!(rows.iter().filter(|r| r.starts_with("summary,")).count(), 3);
    assert!(rows.iter().all(|r| r.split(',').nth(1) == Some("5")));
}

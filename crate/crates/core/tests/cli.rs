use std::path::Path;
use std::process::Command;

fn logconcave(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_logconcave")).args(args).output().expect("binary runs")
}

fn bundle(dir: &Path) -> Vec<Vec<u8>> {
    ["report.json", "profile.csv", "env.json"].iter().map(|f| std::fs::read(dir.join(f)).unwrap()).collect()
}

#[test]
fn single_suite_bundle_is_byte_stable() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for dir in [&a, &b] {
        let out = logconcave(&["verify", "--suite", "inclusion", "--fn", "gaussian", "--dim", "2", "--seed", "3", "--out", dir.to_str().unwrap()]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    assert_eq!(bundle(&a), bundle(&b));
    let report: serde_json::Value = serde_json::from_slice(&std::fs::read(a.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["pass"], true);
    assert_eq!(report["suites"].as_array().unwrap().len(), 1);
    let env: serde_json::Value = serde_json::from_slice(&std::fs::read(a.join("env.json")).unwrap()).unwrap();
    assert_eq!(env["seed"], 3);
}

#[test]
fn zero_tolerance_exits_nonzero() {
    let out = logconcave(&["verify", "--suite", "isotropization", "--dim", "1", "--tol", "0"]);
    assert_eq!(out.status.code(), Some(1));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["pass"], false);
    assert!(report["asserted_failures"].as_u64().unwrap() > 0);
}

#[test]
fn transformed_grid_feeds_back_as_a_function() {
    let tmp = tempfile::tempdir().unwrap();
    let file = tmp.path().join("legendre_cube.json");
    let out = logconcave(&["transform", "--fn", "exp_euclidean_norm", "--grid-points", "65", "--out", file.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    // ℒ|x| is the indicator of [-1, 1], which covers itself once
    let out = logconcave(&["cover", "--fn", file.to_str().unwrap(), "--against", file.to_str().unwrap(), "--format", "csv"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert!((row[1].parse::<f64>().unwrap() - 1.0).abs() < 1e-6, "{text}");
}

#[test]
fn bad_input_is_reported() {
    let out = logconcave(&["cover", "--fn", "no_such_function"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown function"));
    let out = logconcave(&["profile", "--t-list", "0.5"]);
    assert_eq!(out.status.code(), Some(2));
}

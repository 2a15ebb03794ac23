use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn adenet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_adenet")).args(args).env("ADENET_THREADS", "1").output().unwrap()
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

// y = 3 x1 - 2 x2 plus small noise; x3 is pure noise.
const SMALL: &str = "y,x1,x2,x3
-0.1580,0.2889,0.5196,-0.8121
6.3570,1.2014,-1.3225,0.1327
-4.1342,-0.9934,0.6082,-0.1437
2.4105,0.7318,0.0154,0.5524
-1.3023,-0.1200,0.4818,1.0920
3.9741,0.6020,-1.0650,-0.4412
-5.5730,-1.4011,0.6843,0.3010
0.8562,-0.2147,-0.7416,-1.2280
1.7764,0.9930,0.5966,0.7101
-3.0120,-0.4002,0.9049,-0.0355
";

#[test]
fn fit_writes_json_report() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "d.csv", SMALL);
    let out = dir.path().join("r.json");
    let o = adenet(&["fit", "--input", &input, "--method", "lasso", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report: Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(report["method"], "Lasso");
    assert_eq!(report["p"], 3);
    assert!(report["active_set"].as_array().unwrap().len() <= 3);
    let coefs = report["coefficients"].as_array().unwrap();
    let names: Vec<&str> = coefs.iter().map(|c| c["name"].as_str().unwrap()).collect();
    assert_eq!(names, ["x1", "x2", "x3"]);
    assert!(coefs[0]["value"].as_f64().unwrap() > 2.0);
    assert!(coefs[1]["value"].as_f64().unwrap() < -1.0);
    assert!(report["converged"].as_bool().unwrap());
}

#[test]
fn every_method_runs_on_small_data() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "d.csv", SMALL);
    for method in ["lasso", "enet", "alasso", "aenet", "scad"] {
        let o = adenet(&["fit", "--input", &input, "--method", method, "--gamma", "2", "--zero-mode", "exclude"]);
        assert!(o.status.success(), "{method}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(String::from_utf8_lossy(&o.stdout).contains("active"));
    }
}

#[test]
fn standardized_fit_reports_original_scale() {
    let dir = tempfile::tempdir().unwrap();
    // same data with x1 multiplied by 10
    let scaled: String = SMALL
        .lines()
        .enumerate()
        .map(|(i, line)| {
            if i == 0 {
                return format!("{line}\n");
            }
            let mut f: Vec<String> = line.split(',').map(str::to_string).collect();
            f[1] = format!("{}", f[1].parse::<f64>().unwrap() * 10.0);
            f.join(",") + "\n"
        })
        .collect();
    let a = write(dir.path(), "a.csv", SMALL);
    let b = write(dir.path(), "b.csv", &scaled);
    let (ra, rb) = (dir.path().join("a.json"), dir.path().join("b.json"));
    for (input, out) in [(&a, &ra), (&b, &rb)] {
        let o = adenet(&["fit", "--input", input, "--method", "enet", "--standardize", "--out", out.to_str().unwrap()]);
        assert!(o.status.success());
    }
    let coef = |p: &Path| -> f64 {
        let v: Value = serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap();
        v["coefficients"][0]["value"].as_f64().unwrap()
    };
    assert!((coef(&ra) - 10.0 * coef(&rb)).abs() < 1e-6 * coef(&ra).abs().max(1.0));
}

#[test]
fn zero_response_warns_and_returns_zeros() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "z.csv", "y,a,b\n0,1,2\n0,3,1\n0,2,2\n0,5,0\n");
    let out = dir.path().join("z.json");
    let o = adenet(&["fit", "--input", &input, "--method", "aenet", "--gamma", "1", "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("warning"));
    let report: Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert!(report["coefficients"].as_array().unwrap().iter().all(|c| c["value"] == 0.0));
}

#[test]
fn text_cell_is_an_input_error_naming_line_and_column() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "bad.csv", "y,a,b\n1,2,3\n2,4,x\n");
    let o = adenet(&["fit", "--input", &input, "--method", "lasso"]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 3") && err.contains("column 3"), "{err}");
}

#[test]
fn ragged_rows_and_missing_files_are_input_errors() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "ragged.csv", "y,a\n1,2\n3\n");
    assert_eq!(adenet(&["fit", "--input", &input, "--method", "enet"]).status.code(), Some(2));
    let missing = dir.path().join("nope.csv");
    assert_eq!(adenet(&["fit", "--input", missing.to_str().unwrap(), "--method", "enet"]).status.code(), Some(2));
}

#[test]
fn constant_column_under_standardize_is_degenerate() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "c.csv", "y,a,b\n1,2,7\n2,4,7\n0,1,7\n");
    let o = adenet(&["fit", "--input", &input, "--method", "lasso", "--standardize"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn reproduce_table3_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    for out in [&a, &b] {
        let o = adenet(&["reproduce", "--table", "3", "--reps", "2", "--seed", "5", "--out", out.to_str().unwrap()]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let text = fs::read(&a).unwrap();
    assert_eq!(text, fs::read(&b).unwrap());
    let text = String::from_utf8(text).unwrap();
    assert!(!text.contains('\r'));
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[0].contains("method,mse_mean,mse_se,c_mean,ic_mean,exact_support_rate"));
    assert!(lines[1].contains(",Truth,") && lines[1].contains(",992.0000,"));
    assert!(lines.iter().any(|l| l.contains("SIS + AEnet")));
    assert!(lines.iter().any(|l| l.contains("SIS + SCAD")));
}

#[test]
fn reproduce_table1_desk_has_every_cell() {
    let o = adenet(&["reproduce", "--table", "1", "--reps", "2", "--seed", "3"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    // header plus 4 cells of Truth and five methods
    assert_eq!(text.lines().count(), 1 + 4 * 6);
    for cell in ["0.5000,100,35,9", "0.5000,200,51,15", "0.7500,100,35,9", "0.7500,200,51,15"] {
        assert_eq!(text.lines().filter(|l| l.starts_with(cell)).count(), 6, "{cell}");
    }
}

#[test]
fn bad_arguments_are_rejected() {
    assert_eq!(adenet(&["reproduce", "--table", "4"]).status.code(), Some(2));
    assert_eq!(adenet(&["reproduce", "--table", "1", "--reps", "0"]).status.code(), Some(2));
    let o = Command::new(env!("CARGO_BIN_EXE_adenet"))
        .args(["reproduce", "--table", "3", "--reps", "1"])
        .env("ADENET_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

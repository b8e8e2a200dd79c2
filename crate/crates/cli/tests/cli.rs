use std::process::{Command, Output};

fn fctk(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fctk"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = fctk(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_owned).collect())
        .collect()
}

#[test]
fn poly_coefficients_are_exact() {
    let text = stdout(&["poly", "--r", "2", "--nu", "0,1", "--n", "3"]);
    assert_eq!(text, "k,coeff\n0,1\n1,-3/2\n2,1/4\n3,-1/144\n");
}

#[test]
fn poly_json_round_trips_through_serde() {
    let text = stdout(&[
        "--format", "json", "poly", "--r", "1", "--nu", "0", "--n", "2",
    ]);
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["coeffs"].as_array().unwrap().len(), 3);
}

#[test]
fn zeros_are_sorted_and_positive() {
    let text = stdout(&["zeros", "--r", "1", "--nu", "0", "--n", "8"]);
    let mids: Vec<f64> = rows(&text).iter().map(|r| r[3].parse().unwrap()).collect();
    assert_eq!(mids.len(), 8);
    assert!(mids[0] > 0.0);
    assert!(mids.windows(2).all(|w| w[0] < w[1]));
}

#[test]
fn fc_moment_matches_catalan() {
    let text = stdout(&["fc", "moment", "--r", "1", "--k", "4"]);
    let row = &rows(&text)[0];
    assert_eq!(row[1], "14");
    assert!((row[2].parse::<f64>().unwrap() - 14.0).abs() < 1e-9);
}

#[test]
fn sampling_is_deterministic() {
    let args = ["fc", "sample", "--r", "2", "--count", "50", "--seed", "9"];
    let a = stdout(&args);
    assert_eq!(a, stdout(&args));
    assert_eq!(a.lines().count(), 50);
    assert_ne!(
        a,
        stdout(&["fc", "sample", "--r", "2", "--count", "50", "--seed", "10"])
    );
}

#[test]
fn oracle_reports_json() {
    let text = stdout(&["oracle", "hmax", "--r", "2", "--phi", "0.4"]);
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["within_cell"], true);
    let text = stdout(&[
        "oracle", "contour", "--r", "1", "--nu", "1", "--n", "4", "--x", "2",
    ]);
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert!(v.is_object());
}

#[test]
fn fig1_improves_with_n() {
    let dev = |n: &str| {
        rows(&stdout(&["fig1", "--n", n]))
            .iter()
            .map(|r| (r[1].parse::<f64>().unwrap() - r[2].parse::<f64>().unwrap()).abs())
            .fold(0.0, f64::max)
    };
    assert!(dev("300") < dev("150"));
}

#[test]
fn rmt_summary_is_reproducible() {
    let args = [
        "--format", "json", "rmt", "--r", "1", "--nu", "0", "--n", "30", "--trials", "5", "--seed",
        "4",
    ];
    let a = stdout(&args);
    assert_eq!(a, stdout(&args));
    let v: serde_json::Value = serde_json::from_str(&a).unwrap();
    assert!(v["ks"].as_f64().unwrap() < 0.2);
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(
        fctk(&["poly", "--r", "2", "--nu", "0", "--n", "3"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        fctk(&["fc", "quantile", "--r", "1", "--p", "1.5"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(fctk(&["no-such-command"]).status.code(), Some(2));
}

#[test]
fn errors_are_reported_as_json() {
    let out = fctk(&["fc", "density", "--r", "0", "--x", "1"]);
    assert!(!out.status.success());
    let v: serde_json::Value =
        serde_json::from_str(String::from_utf8_lossy(&out.stderr).trim()).unwrap();
    assert!(v["error"].is_string() && v["message"].is_string());
}

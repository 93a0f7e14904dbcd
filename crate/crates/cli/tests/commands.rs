//! End-to-end runs of the `theta-maslov` binary.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::Command;

use nalgebra::DMatrix;
use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_theta-maslov"))
}

fn golden(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)
}

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn run(args: &[&str]) -> Run {
    let out = bin().args(args).output().expect("binary runs");
    Run {
        code: out.status.code().unwrap_or(-1),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

fn write_config(dir: &Path, body: &str) -> PathBuf {
    let p = dir.join("run.json");
    std::fs::write(&p, body).unwrap();
    p
}

/// Rows of a CSV body without the header, split into fields.
fn rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines().skip(1).map(|l| l.split(',').map(str::to_owned).collect()).collect()
}

fn column(csv: &str, i: usize) -> Vec<f64> {
    rows(csv).iter().map(|r| r[i].parse().unwrap()).collect()
}

/// Eigenvalues of `-d²/dx² + a cos x` with θ-periodic conditions on
/// `[0, 2π]`, from the Bloch-Fourier Galerkin matrix: diagonal
/// `(k + θ/2π)²`, off-diagonals `a/2`.
fn hill(a: f64, theta: f64) -> Vec<f64> {
    let modes = 60i64;
    let dim = (2 * modes + 1) as usize;
    let q = theta / (2.0 * PI);
    let m = DMatrix::from_fn(dim, dim, |i, j| {
        if i == j {
            let k = i as i64 - modes;
            (k as f64 + q).powi(2)
        } else if i.abs_diff(j) == 1 {
            a / 2.0
        } else {
            0.0
        }
    });
    let mut v: Vec<f64> = m.symmetric_eigen().eigenvalues.iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

#[test]
fn free_spectrum_rows() {
    let r = run(&["spectrum", "--theta", &(PI / 2.0).to_string(), "--cutoff", "2"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert!(r.stdout.starts_with("index,lambda,multiplicity,method\n"));
    let lambdas = column(&r.stdout, 1);
    let expected = [0.0625, 0.5625, 1.5625];
    assert_eq!(lambdas.len(), expected.len());
    for (l, e) in lambdas.iter().zip(expected) {
        assert!((l - e).abs() < 1e-9, "{l} vs {e}");
    }
}

#[test]
fn two_channel_constant_interleaves_channels() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{ "potential": { "preset": "constant", "matrix": [[0.0, 0.0], [0.0, 10.0]], "interval": [0.0, 6.283185307179586] } }"#,
    );
    let r = run(&["--config", cfg.to_str().unwrap(), "spectrum", "--theta", "1.0", "--cutoff", "11"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let q = 1.0 / (2.0 * PI);
    let mut expected: Vec<f64> = (-4..=4)
        .flat_map(|k: i32| {
            let l = (k as f64 + q).powi(2);
            [l, l + 10.0]
        })
        .filter(|&l| l < 11.0)
        .collect();
    expected.sort_by(f64::total_cmp);
    let got = column(&r.stdout, 1);
    assert_eq!(got.len(), expected.len(), "{}", r.stdout);
    for (g, e) in got.iter().zip(&expected) {
        assert!((g - e).abs() < 1e-8, "{g} vs {e}");
    }
}

#[test]
fn golden_mathieu_spectrum() {
    let cfg = golden("mathieu.json");
    let r = run(&["--config", cfg.to_str().unwrap(), "spectrum", "--theta", "0.7", "--cutoff", "10"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let expected = std::fs::read_to_string(golden("mathieu_spectrum.csv")).unwrap();
    assert_eq!(r.stdout, expected);
    let reference = hill(2.0, 0.7);
    for (i, l) in column(&expected, 1).iter().enumerate() {
        assert!((l - reference[i]).abs() < 1e-9, "level {i}: {l} vs {}", reference[i]);
    }
    assert!(reference[column(&expected, 1).len()] > 10.0);
}

#[test]
fn maslov_edge_and_closed_rectangle() {
    let (t1, t2) = ((PI / 4.0).to_string(), (PI / 2.0).to_string());
    let r = run(&["maslov", "--theta1", &t1, "--theta2", &t2, "--r", "0.6"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let v: Value = serde_json::from_str(&r.stdout).unwrap();
    assert_eq!(v["index"], 2);
    assert_eq!(v["half_index"], 1.0);
    assert_eq!(v["agree"], true);
    let crossings = v["crossings"].as_array().unwrap();
    assert_eq!(crossings.len(), 1);
    // (1 - θ/2π)² = 0.6 on the branch k = -1.
    let theta_star = 2.0 * PI * (1.0 - 0.6f64.sqrt());
    let at = crossings[0]["params"]["theta"].as_f64().unwrap();
    assert!((at - theta_star).abs() < 1e-7, "{at} vs {theta_star}");

    let r = run(&["maslov", "--theta1", &t1, "--theta2", &t2, "--r", "0.6", "--closed"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let v: Value = serde_json::from_str(&r.stdout).unwrap();
    assert_eq!(v["index"], 0);
    for b in v["backends"].as_array().unwrap() {
        assert_eq!(b["index"], 0);
        assert_eq!(b["segments"].as_array().unwrap().len(), 4);
    }
}

#[test]
fn single_backend_selection() {
    let r = run(&["--backend", "spectral-flow", "maslov", "--theta1", "0.5", "--theta2", "2.0", "--r", "1.3"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let v: Value = serde_json::from_str(&r.stdout).unwrap();
    let backends = v["backends"].as_array().unwrap();
    assert_eq!(backends.len(), 1);
    assert_eq!(backends[0]["backend"], "spectral-flow");
}

#[test]
fn free_bands_touch_and_mathieu_gap_opens() {
    let r = run(&["bands", "--k-max", "4"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let (alpha, beta) = (column(&r.stdout, 1), column(&r.stdout, 2));
    for k in 0..4 {
        assert!((alpha[k] - (k as f64 / 2.0).powi(2)).abs() < 1e-9);
        assert!((beta[k] - ((k + 1) as f64 / 2.0).powi(2)).abs() < 1e-9);
    }
    for k in 0..3 {
        assert!((beta[k] - alpha[k + 1]).abs() < 1e-7, "band {k} should touch the next");
    }

    let cfg = golden("mathieu.json");
    let r = run(&["--config", cfg.to_str().unwrap(), "bands", "--k-max", "3"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let (alpha, beta) = (column(&r.stdout, 1), column(&r.stdout, 2));
    let (periodic, anti) = (hill(2.0, 0.0), hill(2.0, PI));
    assert!((alpha[0] - periodic[0]).abs() < 1e-8);
    assert!((beta[0] - anti[0]).abs() < 1e-8);
    assert!((alpha[1] - anti[1]).abs() < 1e-8);
    assert!(alpha[1] - beta[0] > 0.1, "first gap should be open");
}

#[test]
fn free_curves_and_slopes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("curves.csv");
    let r = run(&["--out", out.to_str().unwrap(), "curves", "--k", "0,1", "--theta-steps", "8"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert!(r.stdout.is_empty());
    let csv = std::fs::read_to_string(&out).unwrap();
    assert!(csv.starts_with("theta,k,lambda,dlambda_dtheta\n"));
    let rows = rows(&csv);
    assert_eq!(rows.len(), 18);
    for row in rows {
        let theta: f64 = row[0].parse().unwrap();
        let k: usize = row[1].parse().unwrap();
        let (lambda, slope): (f64, f64) = (row[2].parse().unwrap(), row[3].parse().unwrap());
        // On (0, π): branch 0 is (θ/2π)², branch 1 is (1 - θ/2π)².
        let q = theta / (2.0 * PI);
        let (l, d) = if k == 0 { (q * q, q / PI) } else { ((1.0 - q).powi(2), -(1.0 - q) / PI) };
        assert!((lambda - l).abs() < 1e-9, "λ_{k}({theta})");
        assert!((slope - d).abs() < 1e-8 * d.abs().max(1.0), "λ'_{k}({theta}): {slope} vs {d}");
    }
    let svg = std::fs::read_to_string(out.with_extension("svg")).unwrap();
    assert_eq!(svg.matches("<polyline").count(), 2);
}

#[test]
fn square_well_rescaling() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{ "potential": { "preset": "constant", "matrix": [[-5.0]], "interval": [-3.141592653589793, 3.141592653589793] } }"#);
    let r = run(&["--config", cfg.to_str().unwrap(), "rescale", "--tau", "0.3"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let v: Value = serde_json::from_str(&r.stdout).unwrap();
    assert_eq!(v["count_difference"], v["half_maslov"]);
    assert_eq!(v["morse"]["mor_diff"], 4.0);
    let points = v["morse"]["conjugate_points"].as_array().unwrap();
    let expected = [1.0 / 5f64.sqrt(), 2.0 / 5f64.sqrt()];
    assert_eq!(points.len(), 2);
    for (p, e) in points.iter().zip(expected) {
        assert!((p["t"].as_f64().unwrap() - e).abs() < 1e-6);
        assert_eq!(p["complex_dim"], 2);
        assert!(p["form_eigenvalues"].as_array().unwrap().iter().all(|x| x.as_f64().unwrap() < 0.0));
    }

    let r = run(&["--config", cfg.to_str().unwrap(), "rescale", "--tau", "1"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let v: Value = serde_json::from_str(&r.stdout).unwrap();
    assert_eq!(v["count_difference"], 0.0);
    assert_eq!(v["morse"]["mor_diff"], 0.0);
}

#[test]
fn verify_free_suite() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let r = run(&["--out", out.to_str().unwrap(), "verify", "--suite", "free"]);
    assert_eq!(r.code, 0, "{}{}", r.stdout, r.stderr);
    assert!(r.stdout.lines().any(|l| l.starts_with("PASS")));
    assert!(!r.stdout.lines().any(|l| l.starts_with("FAIL")));
    let report: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert!(report["reports"].as_array().unwrap().iter().all(|r| r["pass"] == true));
}

#[test]
fn bad_input_exits_two_without_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("spectrum.csv");
    let cases: [&str; 3] = [
        r#"{ "potential": { "preset": "free", "n": 1, "interval": [0.0, 1.0] }, "rank_tol": 2.0 }"#,
        r#"{ "potential": { "preset": "free", "n": 1, "interval": [1.0, 0.0] } }"#,
        r#"{ "potential": { "preset": "free", "n": 1, "interval": [0.0, 1.0] }, "colour": "blue" }"#,
    ];
    for body in cases {
        let cfg = write_config(dir.path(), body);
        let r = run(&["--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "spectrum", "--theta", "1", "--cutoff", "5"]);
        assert_eq!(r.code, 2, "{body}: {}", r.stderr);
        assert!(r.stderr.starts_with("error:"));
    }
    assert_eq!(run(&["verify", "--suite", "everything"]).code, 2);
    assert_eq!(run(&["spectrum", "--theta", "1"]).code, 2);
    let leftovers: Vec<_> = std::fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    assert_eq!(leftovers, vec![std::ffi::OsString::from("run.json")]);
}

#[test]
fn outputs_are_byte_deterministic() {
    let cfg = golden("mathieu.json");
    let args = ["--config", cfg.to_str().unwrap(), "curves", "--k", "0,1,2", "--theta-steps", "7"];
    let (a, b) = (run(&args), run(&args));
    assert_eq!(a.code, 0, "{}", a.stderr);
    assert_eq!(a.stdout, b.stdout);
    let args = ["maslov", "--theta1", "0.3", "--theta2", "2.9", "--r", "1.5", "--closed"];
    assert_eq!(run(&args).stdout, run(&args).stdout);
}

#[test]
fn thread_count_comes_from_the_environment() {
    let out = bin().env("MASLOV_THREADS", "zero").args(["bands"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = bin().env("MASLOV_THREADS", "1").args(["curves", "--theta-steps", "3"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
}

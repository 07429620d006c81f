use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn pshrink(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pshrink"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    let mut all: Vec<&str> = args.to_vec();
    let out = dir.to_str().unwrap();
    all.extend(["--out", out]);
    pshrink(&all)
}

/// Data rows of a CSV written by the tool: skips the config comment and
/// the header.
fn rows(path: &Path) -> Vec<Vec<String>> {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    lines.next().expect("header row");
    lines
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn risk_curve_starts_at_origin_value() {
    let d = TempDir::new().unwrap();
    let o = run_in(d.path(), &["risk-curve", "--gamma-min", "1e-6"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = rows(&d.path().join("risk_curve.csv"));
    assert_eq!(r.len(), 200);
    let first: f64 = r[0][1].parse().unwrap();
    assert!((first - 4.0 / 3.0).abs() < 1e-3, "{first}");
    for f in ["risk_curve.json", "risk_curve.svg", "manifest.json"] {
        assert!(d.path().join(f).exists(), "{f}");
    }
    let m = json(&d.path().join("manifest.json"));
    assert_eq!(m["command"], "risk-curve");
    assert_eq!(m["config"]["p"], 9);
}

#[test]
fn risk_curve_default_grid_is_below_minimax() {
    let d = TempDir::new().unwrap();
    let o = run_in(d.path(), &["risk-curve", "--format", "csv"]);
    assert_eq!(code(&o), 0);
    let r = rows(&d.path().join("risk_curve.csv"));
    let risk: Vec<f64> = r.iter().map(|row| row[1].parse().unwrap()).collect();
    assert!(risk.windows(2).all(|w| w[1] >= w[0]));
    assert!(risk.iter().all(|&v| v < 12.0));
    assert!(!d.path().join("risk_curve.svg").exists());
}

#[test]
fn cz_curve_below_two() {
    let d = TempDir::new().unwrap();
    let o = run_in(
        d.path(),
        &["risk-curve", "--estimator", "cz", "--c", "0", "--p", "2"],
    );
    assert_eq!(code(&o), 0);
    let r = rows(&d.path().join("risk_curve.csv"));
    assert!(r.iter().all(|row| row[1].parse::<f64>().unwrap() < 2.0));
}

#[test]
fn malformed_grid_is_usage_error() {
    let d = TempDir::new().unwrap();
    let o = run_in(
        d.path(),
        &["risk-curve", "--gamma-min", "5", "--gamma-max", "1"],
    );
    assert_eq!(code(&o), 2);
    let o = run_in(d.path(), &["risk-curve", "--estimator", "nope"]);
    assert_eq!(code(&o), 2);
    assert_eq!(code(&pshrink(&["risk-curve", "--no-such-flag"])), 2);
}

#[test]
fn mc_curve_needs_seed_and_is_reproducible() {
    let d = TempDir::new().unwrap();
    assert_eq!(
        code(&run_in(d.path(), &["risk-curve", "--method", "mc"])),
        2
    );
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    let args = [
        "risk-curve",
        "--method",
        "mc",
        "--n",
        "5000",
        "--gamma-points",
        "4",
        "--seed",
        "9",
    ];
    assert_eq!(code(&run_in(a.path(), &args)), 0);
    assert_eq!(code(&run_in(b.path(), &args)), 0);
    for f in [
        "risk_curve.csv",
        "risk_curve.json",
        "risk_curve.svg",
        "manifest.json",
    ] {
        assert_eq!(
            fs::read(a.path().join(f)).unwrap(),
            fs::read(b.path().join(f)).unwrap(),
            "{f}"
        );
    }
}

#[test]
fn config_file_then_flags() {
    let d = TempDir::new().unwrap();
    let cfg = d.path().join("cfg.json");
    fs::write(&cfg, r#"{"p": 5, "c": 1.0, "gamma_points": 10}"#).unwrap();
    let out = d.path().join("o");
    let o = pshrink(&[
        "risk-curve",
        "--config",
        cfg.to_str().unwrap(),
        "--c",
        "2",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let m = json(&out.join("manifest.json"));
    assert_eq!(m["config"]["p"], 5);
    assert_eq!(m["config"]["c"], 2.0);
    assert_eq!(m["config"]["gamma_points"], 10);
    let csv = fs::read_to_string(out.join("risk_curve.csv")).unwrap();
    assert!(csv.starts_with("# config {\"p\":5,\"c\":2.0,"));
    fs::write(&cfg, r#"{"nonsense": 1}"#).unwrap();
    let o = pshrink(&[
        "risk-curve",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 2);
}

#[test]
fn dominance_sweep_passes() {
    let d = TempDir::new().unwrap();
    let o = run_in(d.path(), &["dominance-scan", "--mode", "theorem2"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    assert_eq!(rows(&d.path().join("dominance.csv")).len(), 24);
}

#[test]
fn cz_outside_robustness_window_fails() {
    let d = TempDir::new().unwrap();
    let o = run_in(
        d.path(),
        &[
            "dominance-scan",
            "--mode",
            "theorem2",
            "--estimator",
            "cz",
            "--c",
            "2",
        ],
    );
    assert_eq!(code(&o), 1);
    let o = run_in(
        d.path(),
        &["dominance-scan", "--estimator", "cz", "--c", "0,0.5,1"],
    );
    assert_eq!(code(&o), 0);
}

#[test]
fn quad_variants() {
    let d = TempDir::new().unwrap();
    assert_eq!(
        code(&run_in(d.path(), &["dominance-scan", "--mode", "quad"])),
        0
    );
    let o = run_in(
        d.path(),
        &["dominance-scan", "--mode", "quad", "--variant", "N-leq-1"],
    );
    assert_eq!(code(&o), 1);
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("y = [2, 0, 0]"), "{stdout}");
    let o = run_in(
        d.path(),
        &[
            "dominance-scan",
            "--mode",
            "quad",
            "--p",
            "9",
            "--y-max",
            "10",
        ],
    );
    assert_eq!(code(&o), 2);
}

#[test]
fn estimate_rows() {
    let d = TempDir::new().unwrap();
    let input = d.path().join("y.csv");
    fs::write(&input, "y1,y2,y3,y4,y5,y6,y7,y8,y9\n1,1,1,1,1,1,1,1,1\n").unwrap();
    let o = run_in(
        d.path(),
        &[
            "estimate",
            "--input",
            input.to_str().unwrap(),
            "--estimator",
            "delta_c",
            "--c",
            "3",
        ],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let path = d.path().join("estimates.csv");
    let text = fs::read_to_string(&path).unwrap();
    assert!(text
        .lines()
        .next()
        .unwrap()
        .contains(r#""spec":{"kind":"delta_c","c":3.0}"#));
    let r = rows(&path);
    for cell in &r[0][..9] {
        assert!((cell.parse::<f64>().unwrap() - 9.0 / 11.0).abs() < 1e-15);
    }
    assert!((r[0][9].parse::<f64>().unwrap() - 81.0 / 11.0).abs() < 1e-12);
}

#[test]
fn estimate_rejects_bad_input() {
    let d = TempDir::new().unwrap();
    for (name, body) in [
        ("empty", ""),
        ("ragged", "1,2\n3\n"),
        ("negative", "1,-2\n"),
        ("fraction", "1,2.5\n"),
    ] {
        let input = d.path().join(format!("{name}.csv"));
        fs::write(&input, body).unwrap();
        let o = run_in(d.path(), &["estimate", "--input", input.to_str().unwrap()]);
        assert_eq!(code(&o), 2, "{name}");
    }
}

#[test]
fn estimate_matrix_mode_reports_sums() {
    let d = TempDir::new().unwrap();
    let input = d.path().join("m.csv");
    fs::write(&input, "1,2,3,4,5,6\n").unwrap();
    let spec = d.path().join("spec.json");
    fs::write(&spec, r#"{"kind":"matrix","c":0,"cols":3}"#).unwrap();
    let o = run_in(
        d.path(),
        &[
            "estimate",
            "--input",
            input.to_str().unwrap(),
            "--spec",
            spec.to_str().unwrap(),
        ],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = rows(&d.path().join("estimates.csv"));
    let v: Vec<f64> = r[0].iter().map(|s| s.parse().unwrap()).collect();
    assert_eq!(v.len(), 6 + 1 + 2 + 3);
    // Row and column sums add up to the total.
    assert!((v[7] + v[8] - v[6]).abs() < 1e-12);
    assert!((v[9] + v[10] + v[11] - v[6]).abs() < 1e-12);
    // Matches the library directly.
    let y = poisson_shrink::CountMatrix::from_rows(vec![vec![1, 2, 3], vec![4, 5, 6]]).unwrap();
    let m = poisson_shrink::matrix_shrinker(&y, 0.0).unwrap();
    assert_eq!(v[0], *m.get(0, 0));
    assert_eq!(v[5], *m.get(1, 2));
}

#[test]
fn eb_demo_reproducible_and_improves() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    let args = ["eb-demo", "--seed", "11"];
    assert_eq!(code(&run_in(a.path(), &args)), 0);
    assert_eq!(code(&run_in(b.path(), &args)), 0);
    for f in [
        "eb_scatter.csv",
        "eb_summary.json",
        "eb_scatter.svg",
        "manifest.json",
    ] {
        assert_eq!(
            fs::read(a.path().join(f)).unwrap(),
            fs::read(b.path().join(f)).unwrap(),
            "{f}"
        );
    }
    let s = json(&a.path().join("eb_summary.json"));
    let diff = &s["summary"]["eb_minus_raw"];
    assert!(diff["mean"].as_f64().unwrap() <= -3.0 * diff["se"].as_f64().unwrap());
    assert_eq!(rows(&a.path().join("eb_scatter.csv")).len(), 50);
}

#[test]
fn eb_demo_flat_regression_and_errors() {
    let d = TempDir::new().unwrap();
    let o = run_in(
        d.path(),
        &[
            "eb-demo",
            "--seed",
            "1",
            "--gamma1",
            "0",
            "--replications",
            "3",
        ],
    );
    assert_eq!(code(&o), 0);
    let r = rows(&d.path().join("eb_scatter.csv"));
    assert!(r.iter().all(|row| row[2] == r[0][2]));
    assert_eq!(code(&run_in(d.path(), &["eb-demo"])), 2);
    assert_eq!(
        code(&run_in(
            d.path(),
            &["eb-demo", "--seed", "1", "--beta", "-1"]
        )),
        2
    );
}

#[test]
fn sample_model_symmetric_covariance_vanishes() {
    // α₀ = pα makes the θ_i independent.
    let d = TempDir::new().unwrap();
    let o = run_in(
        d.path(),
        &[
            "sample-model",
            "--seed",
            "5",
            "--n",
            "100000",
            "--p",
            "4",
            "--alpha",
            "2",
            "--alpha0",
            "8",
            "--beta0",
            "1",
        ],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let m = json(&d.path().join("moments.json"));
    let e = &m["moments"]["empirical"];
    let (cov, se) = (
        e["cov_y"]["estimate"].as_f64().unwrap(),
        e["cov_y"]["se"].as_f64().unwrap(),
    );
    assert!(cov.abs() < 3.0 * se, "cov {cov} se {se}");
    let t = &m["moments"]["theory"];
    assert!(t["rho"].as_f64().unwrap().abs() < 1e-15);
    assert!(t["corr_y"].is_number());
    assert_eq!(rows(&d.path().join("samples.csv")).len(), 100_000);
}

#[test]
fn sample_model_edge_cases() {
    let d = TempDir::new().unwrap();
    assert_eq!(
        code(&run_in(
            d.path(),
            &["sample-model", "--seed", "5", "--n", "0"]
        )),
        0
    );
    let text = fs::read_to_string(d.path().join("samples.csv")).unwrap();
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 1);
    let prior = d.path().join("flat.json");
    fs::write(&prior, r#"{"sum_law":{"kind":"flat"},"alpha":[1,1,1]}"#).unwrap();
    let o = run_in(
        d.path(),
        &[
            "sample-model",
            "--seed",
            "5",
            "--prior",
            prior.to_str().unwrap(),
        ],
    );
    assert_eq!(code(&o), 2);
    assert_eq!(code(&run_in(d.path(), &["sample-model"])), 2);
}

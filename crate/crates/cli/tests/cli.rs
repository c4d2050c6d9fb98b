//! End-to-end runs of the binary: artifact layout, schemas, and exit codes.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn quantdesign(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_quantdesign"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn read(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join(name)).unwrap_or_else(|e| panic!("missing {name}: {e}"))
}

#[test]
fn design_uniform_alm_writes_expected_codebook() {
    let dir = tempfile::tempdir().unwrap();
    let out = quantdesign(&[
        "design",
        "--density",
        "uniform",
        "--scheme",
        "alm",
        "--k",
        "3",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{out:?}");

    let cb: serde_json::Value =
        serde_json::from_str(&read(dir.path(), "codebook_alm_k3.json")).unwrap();
    assert_eq!(cb["scheme"], "alm");
    assert_eq!(cb["k"], 3);
    let levels: Vec<f64> = cb["levels"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect();
    let expect = [0.0, 1.0 / 6.0, 0.5, 5.0 / 6.0, 1.0];
    for (a, b) in levels.iter().zip(expect) {
        assert!((a - b).abs() < 1e-8, "levels {levels:?}");
    }
    let boundaries: Vec<f64> = cb["boundaries"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect();
    assert_eq!(boundaries.len(), 4);

    let trace = read(dir.path(), "trace_alm_k3.csv");
    assert!(trace.starts_with("iter,level_0"));
    assert!(trace.contains("# converged=true"));
}

#[test]
fn design_rejects_invalid_inputs_with_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let out = quantdesign(&[
        "design",
        "--density",
        "uniform",
        "--k",
        "0",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1), "{out:?}");

    let out = quantdesign(&[
        "design",
        "--density",
        "gaussian:0,1",
        "--k",
        "4",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    let msg = String::from_utf8_lossy(&out.stderr);
    assert!(msg.contains("known families"), "{msg}");
}

#[test]
fn design_exhausted_budget_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = quantdesign(&[
        "design",
        "--density",
        "beta:2,4",
        "--scheme",
        "aeq",
        "--k",
        "8",
        "--max-iter",
        "3",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2), "{out:?}");
    // Artifacts are still produced for inspection.
    assert!(dir.path().join("codebook_aeq_k8.json").exists());
}

#[test]
fn mse_curve_matches_closed_form_for_uniform() {
    let dir = tempfile::tempdir().unwrap();
    let out = quantdesign(&[
        "mse-curve",
        "--density",
        "uniform",
        "--k",
        "2,4,8",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{out:?}");
    let text = read(dir.path(), "mse_curve.csv");
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "k,bits,mse_alm,mse_aeq,mse_exact_lm,mse_exact_env"
    );
    for line in lines {
        let f: Vec<f64> = line.split(',').map(|s| s.parse().unwrap()).collect();
        let k = f[0];
        assert!((f[1] - k.log2()).abs() < 1e-12);
        let expect_alm = 1.0 / (12.0 * k * k);
        assert!((f[2] - expect_alm).abs() < 1e-9, "{line}");
        // The envelope constraint can only cost more.
        assert!(f[3] >= f[2]);
        let expect_env = 1.0 / (3.0 * k * k);
        assert!((f[5] - expect_env).abs() < 1e-9);
    }
}

#[test]
fn convergence_writes_footer_per_k() {
    let dir = tempfile::tempdir().unwrap();
    let out = quantdesign(&[
        "convergence",
        "--density",
        "beta:2,4",
        "--scheme",
        "aeq",
        "--k",
        "4,8",
        "--max-iter",
        "2000",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{out:?}");
    for k in [4, 8] {
        let text = read(dir.path(), &format!("convergence_aeq_k{k}.csv"));
        assert!(text.starts_with("iter,cost,linf_change"));
        assert!(text.contains("# converged=true iterations="), "{text}");
    }
}

#[test]
fn spectral_uniform_reports_one_third_eigenvalue() {
    let dir = tempfile::tempdir().unwrap();
    let out = quantdesign(&[
        "spectral",
        "--density",
        "uniform",
        "--scheme",
        "alm",
        "--k",
        "3",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{out:?}");
    let report: serde_json::Value =
        serde_json::from_str(&read(dir.path(), "spectral_report.json")).unwrap();
    assert!((report["second_eigenvalue_modulus"].as_f64().unwrap() - 1.0 / 3.0).abs() < 1e-9);
    for check in report["properties"]["checks"].as_array().unwrap() {
        assert_eq!(check["pass"], true, "{check}");
    }
    assert_eq!(report["product_limit"]["numerical_rank"], 2);
    assert!(report["product_limit"]["converged"].as_bool().unwrap());

    // Matrices parse as square CSV.
    for name in ["sweep_matrix.csv", "limit_matrix.csv"] {
        let text = read(dir.path(), name);
        let rows: Vec<&str> = text.lines().collect();
        assert_eq!(rows.len(), 5);
        assert_eq!(rows[0].split(',').count(), 5);
    }
}

#[test]
fn compare_time_single_repeat_writes_row() {
    let dir = tempfile::tempdir().unwrap();
    let out = quantdesign(&[
        "compare-time",
        "--density",
        "beta:4,2",
        "--k",
        "8",
        "--repeats",
        "1",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{out:?}");
    let text = read(dir.path(), "timing.csv");
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "k,t_alm,t_exact,speedup");
    let row: Vec<f64> = lines
        .next()
        .unwrap()
        .split(',')
        .map(|s| s.parse().unwrap())
        .collect();
    assert_eq!(row[0], 8.0);
    assert!(row[1] > 0.0 && row[2] > 0.0 && row[3] > 0.0);
}

#[test]
fn encode_round_trip_via_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = quantdesign(&[
        "design",
        "--density",
        "uniform",
        "--scheme",
        "aeq",
        "--k",
        "4",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let samples_path = dir.path().join("samples.txt");
    fs::write(&samples_path, "0.1\n0.26\n0.25\n0.99\n").unwrap();
    let out = quantdesign(&[
        "encode",
        "--codebook",
        dir.path().join("codebook_aeq_k4.json").to_str().unwrap(),
        "--input",
        samples_path.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{out:?}");
    let text = read(dir.path(), "encoded.csv");
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "x,index,level");
    assert_eq!(lines.len(), 5);
    // Envelope rule: the level never falls below the sample.
    for line in &lines[1..] {
        let f: Vec<f64> = line.split(',').map(|s| s.parse().unwrap()).collect();
        assert!(f[2] >= f[0]);
    }
    // 0.26 rounds up to 0.5; 0.25 maps to its own level.
    assert!(lines[2].ends_with("0.5"));
    assert!(lines[3].ends_with("0.25"));
}

#[test]
fn mse_curve_decreases_with_k_for_beta() {
    let dir = tempfile::tempdir().unwrap();
    let out = quantdesign(&[
        "mse-curve",
        "--density",
        "beta:2,4",
        "--k",
        "2,4,8",
        "--max-iter",
        "2000",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{out:?}");
    let text = read(dir.path(), "mse_curve.csv");
    let rows: Vec<Vec<f64>> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|s| s.parse().unwrap()).collect())
        .collect();
    for pair in rows.windows(2) {
        // Columns: k, bits, mse_alm, mse_aeq, mse_exact_lm, mse_exact_env.
        for col in 2..6 {
            assert!(pair[1][col] < pair[0][col], "column {col} not decreasing");
        }
    }
    for row in &rows {
        assert!(row[3] >= row[2], "envelope cheaper than unconstrained");
    }
}

#[test]
fn runs_are_deterministic() {
    let run_once = || {
        let dir = tempfile::tempdir().unwrap();
        let out = quantdesign(&[
            "design",
            "--density",
            "beta:2,4",
            "--scheme",
            "aeq",
            "--k",
            "6",
            "--max-iter",
            "2000",
            "--seed",
            "7",
            "--out",
            dir.path().to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{out:?}");
        (
            read(dir.path(), "codebook_aeq_k6.json"),
            read(dir.path(), "trace_aeq_k6.csv"),
        )
    };
    let (cb1, tr1) = run_once();
    let (cb2, tr2) = run_once();
    assert_eq!(cb1, cb2);
    assert_eq!(tr1, tr2);
}

#[test]
fn explicit_init_file_is_honored() {
    let dir = tempfile::tempdir().unwrap();
    let init_path = dir.path().join("init.json");
    fs::write(&init_path, "[0.0, 0.1, 0.2, 0.3, 1.0]").unwrap();
    let out = quantdesign(&[
        "design",
        "--density",
        "uniform",
        "--scheme",
        "alm",
        "--k",
        "3",
        "--init",
        init_path.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{out:?}");
    let trace = read(dir.path(), "trace_alm_k3.csv");
    let init_row = trace.lines().nth(1).unwrap();
    assert!(init_row.starts_with("0,0,0.1,0.2,0.3,1"), "{init_row}");

    // Bad explicit vector: exit 1.
    fs::write(&init_path, "[0.0, 0.5, 0.2, 0.3, 1.0]").unwrap();
    let out = quantdesign(&[
        "design",
        "--density",
        "uniform",
        "--scheme",
        "alm",
        "--k",
        "3",
        "--init",
        init_path.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
}

//! Implementations of the subcommands: each one runs the requested designs,
//! writes its artifacts under the output directory, and re-parses every file
//! it wrote as a schema self-check.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use quantdesign::oracle::{self, OracleConfig, QuadratureGrid};
use quantdesign::quantizer::{self, Codebook, InitScheme, RunConfig, RunTrace, StopRule};
use quantdesign::spectral::{self, MatrixKind, UpdateMatrix};
use quantdesign::{codec, Density, Scheme};

use crate::tables::parse_numeric_csv;
use crate::{AppError, MatrixOrder, SchemeArg};

pub struct RunOutcome {
    /// True when every fixed-point run converged; drives the exit code.
    pub all_converged: bool,
}

fn ensure_out_dir(dir: &Path) -> Result<(), AppError> {
    fs::create_dir_all(dir)
        .map_err(|e| AppError::Invalid(format!("cannot create output directory {dir:?}: {e}")))
}

fn write_file(path: &PathBuf, content: &str) -> Result<(), AppError> {
    fs::write(path, content).map_err(|e| AppError::Runtime(format!("writing {path:?}: {e}")))?;
    println!("wrote {}", path.display());
    Ok(())
}

fn read_back(path: &PathBuf) -> Result<String, AppError> {
    fs::read_to_string(path).map_err(|e| AppError::Runtime(format!("re-reading {path:?}: {e}")))
}

fn schemes_of(arg: SchemeArg) -> Vec<Scheme> {
    match arg {
        SchemeArg::Alm => vec![Scheme::Alm],
        SchemeArg::Aeq => vec![Scheme::Aeq],
        SchemeArg::Both => vec![Scheme::Alm, Scheme::Aeq],
    }
}

fn single_scheme(arg: SchemeArg) -> Result<Scheme, AppError> {
    match arg {
        SchemeArg::Alm => Ok(Scheme::Alm),
        SchemeArg::Aeq => Ok(Scheme::Aeq),
        SchemeArg::Both => Err(AppError::Invalid(
            "this command needs a single scheme (alm or aeq)".into(),
        )),
    }
}

fn run_design(
    d: &Density,
    scheme: Scheme,
    k: usize,
    threshold: f64,
    max_iter: usize,
    init: &InitScheme,
) -> Result<(Codebook, RunTrace), AppError> {
    let cfg = RunConfig {
        scheme,
        k,
        max_iter,
        threshold,
        init: init.clone(),
    };
    quantizer::run(&cfg, d).map_err(|e| AppError::Invalid(e.to_string()))
}

#[allow(clippy::too_many_arguments)]
pub fn design(
    out: &Path,
    d: &Density,
    scheme_arg: SchemeArg,
    k_list: &[usize],
    threshold: f64,
    max_iter: usize,
    init: &InitScheme,
) -> Result<RunOutcome, AppError> {
    ensure_out_dir(out)?;
    let mut all_converged = true;
    for scheme in schemes_of(scheme_arg) {
        for &k in k_list {
            let (cb, trace) = run_design(d, scheme, k, threshold, max_iter, init)?;
            all_converged &= trace.converged;

            let cb_path = out.join(format!("codebook_{}_k{k}.json", scheme.as_str()));
            write_file(&cb_path, &cb.to_json())?;
            let parsed = Codebook::from_json(&read_back(&cb_path)?)
                .map_err(|e| AppError::Runtime(format!("codebook self-check: {e}")))?;
            if parsed.levels() != cb.levels() {
                return Err(AppError::Runtime("codebook round-trip drifted".into()));
            }

            let trace_path = out.join(format!("trace_{}_k{k}.csv", scheme.as_str()));
            write_file(&trace_path, &trace.to_csv())?;
            let parsed = RunTrace::from_csv(&read_back(&trace_path)?)
                .map_err(|e| AppError::Runtime(format!("trace self-check: {e}")))?;
            if parsed.iterations_used() != trace.iterations_used() {
                return Err(AppError::Runtime("trace round-trip drifted".into()));
            }

            println!(
                "design {} K={k}: {} after {} iterations, final cost {:.6e}",
                scheme.as_str(),
                if trace.converged {
                    "converged"
                } else {
                    "hit the iteration cap"
                },
                trace.iterations_used(),
                trace.iterations.last().map_or(f64::NAN, |it| it.cost),
            );
        }
    }
    Ok(RunOutcome { all_converged })
}

pub const MSE_CURVE_HEADER: &str = "k,bits,mse_alm,mse_aeq,mse_exact_lm,mse_exact_env";

pub fn mse_curve(
    out: &Path,
    d: &Density,
    k_list: &[usize],
    threshold: f64,
    max_iter: usize,
) -> Result<RunOutcome, AppError> {
    ensure_out_dir(out)?;
    let grid = QuadratureGrid::default();
    let mut all_converged = true;
    let mut csv = String::from(MSE_CURVE_HEADER);
    csv.push('\n');
    for &k in k_list {
        let (alm, alm_tr) = run_design(
            d,
            Scheme::Alm,
            k,
            threshold,
            max_iter,
            &InitScheme::Equispaced,
        )?;
        let (aeq, aeq_tr) = run_design(
            d,
            Scheme::Aeq,
            k,
            threshold,
            max_iter,
            &InitScheme::Equispaced,
        )?;
        let ocfg = OracleConfig {
            max_iter,
            stop: StopRule::LevelChange(threshold),
            ..OracleConfig::default()
        };
        let exact_lm =
            oracle::exact_lloyd_max(d, k, &ocfg).map_err(|e| AppError::Runtime(e.to_string()))?;
        let exact_env =
            oracle::exact_envelope(d, k, &ocfg).map_err(|e| AppError::Runtime(e.to_string()))?;
        all_converged &=
            alm_tr.converged && aeq_tr.converged && exact_lm.converged && exact_env.converged;
        csv.push_str(&format!(
            "{k},{},{},{},{},{}\n",
            (k as f64).log2(),
            oracle::cost(&alm, d, &grid),
            oracle::cost(&aeq, d, &grid),
            exact_lm.final_cost,
            exact_env.final_cost,
        ));
    }
    let path = out.join("mse_curve.csv");
    write_file(&path, &csv)?;
    parse_numeric_csv(&read_back(&path)?, MSE_CURVE_HEADER)
        .map_err(|e| AppError::Runtime(format!("mse curve self-check: {e}")))?;
    Ok(RunOutcome { all_converged })
}

pub const CONVERGENCE_HEADER: &str = "iter,cost,linf_change";

pub fn convergence(
    out: &Path,
    d: &Density,
    scheme_arg: SchemeArg,
    k_list: &[usize],
    threshold: f64,
    max_iter: usize,
) -> Result<RunOutcome, AppError> {
    ensure_out_dir(out)?;
    let scheme = single_scheme(scheme_arg)?;
    let mut all_converged = true;
    for &k in k_list {
        let (_, trace) = run_design(d, scheme, k, threshold, max_iter, &InitScheme::Equispaced)?;
        all_converged &= trace.converged;
        let mut csv = String::from(CONVERGENCE_HEADER);
        csv.push('\n');
        for (i, it) in trace.iterations.iter().enumerate() {
            csv.push_str(&format!("{},{},{}\n", i + 1, it.cost, it.linf_change));
        }
        csv.push_str(&format!(
            "# converged={} iterations={}\n",
            trace.converged,
            trace.iterations_used()
        ));
        let path = out.join(format!("convergence_{}_k{k}.csv", scheme.as_str()));
        write_file(&path, &csv)?;
        let (rows, footers) = parse_numeric_csv(&read_back(&path)?, CONVERGENCE_HEADER)
            .map_err(|e| AppError::Runtime(format!("convergence self-check: {e}")))?;
        if rows.len() != trace.iterations_used() || footers.is_empty() {
            return Err(AppError::Runtime("convergence round-trip drifted".into()));
        }
    }
    Ok(RunOutcome { all_converged })
}

pub const TIMING_HEADER: &str = "k,t_alm,t_exact,speedup";

/// Wall-clock protocol: each algorithm runs until its cost is within 1% of
/// its own converged optimum (the chord-based fixed point sits measurably
/// above the exact optimum at small K, so a shared target would starve).
pub fn compare_time(
    out: &Path,
    d: &Density,
    k_list: &[usize],
    repeats: usize,
    max_iter: usize,
) -> Result<RunOutcome, AppError> {
    ensure_out_dir(out)?;
    if repeats == 0 {
        return Err(AppError::Invalid("repeats must be at least 1".into()));
    }
    let grid = QuadratureGrid::default();
    let mut csv = String::from(TIMING_HEADER);
    csv.push('\n');
    for &k in k_list {
        // The reference optima need tight convergence whatever budget the
        // timed runs get.
        let ref_iter = max_iter.max(20_000);
        let (alm_cb, alm_tr) =
            run_design(d, Scheme::Alm, k, 1e-11, ref_iter, &InitScheme::Equispaced)?;
        let tight = OracleConfig {
            max_iter: ref_iter,
            stop: StopRule::LevelChange(1e-11),
            ..OracleConfig::default()
        };
        let exact_opt =
            oracle::exact_lloyd_max(d, k, &tight).map_err(|e| AppError::Runtime(e.to_string()))?;
        if !(alm_tr.converged && exact_opt.converged) {
            return Err(AppError::NonConvergence(format!(
                "reference optima for K={k} did not converge within {ref_iter} iterations"
            )));
        }
        let alm_target = 1.01 * oracle::cost(&alm_cb, d, &grid);
        let exact_target = 1.01 * exact_opt.final_cost;

        let mut t_alm = Vec::with_capacity(repeats);
        let mut t_exact = Vec::with_capacity(repeats);
        for _ in 0..repeats {
            let cfg = RunConfig::new(Scheme::Alm, k).with_max_iter(max_iter);
            let start = Instant::now();
            let (_, tr) = quantizer::run_with_stop(&cfg, d, StopRule::CostBelow(alm_target))
                .map_err(|e| AppError::Runtime(e.to_string()))?;
            t_alm.push(start.elapsed().as_secs_f64());
            let ocfg = OracleConfig {
                max_iter,
                stop: StopRule::CostBelow(exact_target),
                ..OracleConfig::default()
            };
            let start = Instant::now();
            let run = oracle::exact_lloyd_max(d, k, &ocfg)
                .map_err(|e| AppError::Runtime(e.to_string()))?;
            t_exact.push(start.elapsed().as_secs_f64());
            if !(tr.converged && run.converged) {
                return Err(AppError::NonConvergence(format!(
                    "timed run for K={k} missed its 1% target"
                )));
            }
        }
        t_alm.sort_by(|a, b| a.partial_cmp(b).unwrap());
        t_exact.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let (alm_med, exact_med) = (t_alm[repeats / 2], t_exact[repeats / 2]);
        csv.push_str(&format!(
            "{k},{alm_med},{exact_med},{}\n",
            exact_med / alm_med
        ));
    }
    let path = out.join("timing.csv");
    write_file(&path, &csv)?;
    parse_numeric_csv(&read_back(&path)?, TIMING_HEADER)
        .map_err(|e| AppError::Runtime(format!("timing self-check: {e}")))?;
    Ok(RunOutcome {
        all_converged: true,
    })
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ProductDiagnostics {
    pub factors_used: usize,
    pub interior_max: f64,
    pub converged: bool,
    pub numerical_rank: usize,
    pub ones_residual: f64,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SpectralReportFile {
    pub scheme: Scheme,
    pub k: usize,
    pub order: String,
    pub second_eigenvalue_modulus: f64,
    pub properties: spectral::PropertyReport,
    pub product_limit: ProductDiagnostics,
}

pub fn spectral_cmd(
    out: &Path,
    d: &Density,
    scheme_arg: SchemeArg,
    k: usize,
    threshold: f64,
    max_iter: usize,
    order: MatrixOrder,
) -> Result<RunOutcome, AppError> {
    ensure_out_dir(out)?;
    let scheme = single_scheme(scheme_arg)?;
    let (_, trace) = run_design(d, scheme, k, threshold, max_iter, &InitScheme::Equispaced)?;
    if trace.iterations.is_empty() {
        return Err(AppError::Invalid(
            "run produced no iterations; nothing to analyze".into(),
        ));
    }
    let dim = trace.initial_levels.len();
    let mats: Vec<UpdateMatrix> = match order {
        MatrixOrder::EvenOdd => spectral::sweep_matrices_from_trace(&trace)
            .map_err(|e| AppError::Runtime(e.to_string()))?,
        MatrixOrder::OddEven => trace
            .iterations
            .iter()
            .map(|rec| {
                let odd = spectral::build_half_matrix(&rec.thetas, quantdesign::Parity::Odd, dim)?;
                let even =
                    spectral::build_half_matrix(&rec.thetas, quantdesign::Parity::Even, dim)?;
                spectral::compose(&even, &odd)
            })
            .collect::<quantdesign::Result<_>>()
            .map_err(|e| AppError::Runtime(e.to_string()))?,
    };
    let late = mats.last().unwrap();
    let properties = spectral::verify_uniform_properties(late);
    let cap = (2 * mats.len()).max(400);
    let limit =
        spectral::product_limit(&mats, cap, 1e-12).map_err(|e| AppError::Runtime(e.to_string()))?;

    let report = SpectralReportFile {
        scheme,
        k,
        order: order.as_str().to_string(),
        second_eigenvalue_modulus: properties.second_eigenvalue_modulus,
        properties,
        product_limit: ProductDiagnostics {
            factors_used: limit.factors_used,
            interior_max: limit.interior_max,
            converged: limit.converged,
            numerical_rank: limit.numerical_rank,
            ones_residual: limit.ones_residual,
        },
    };
    let report_path = out.join("spectral_report.json");
    write_file(
        &report_path,
        &serde_json::to_string_pretty(&report).expect("report serializes"),
    )?;
    serde_json::from_str::<SpectralReportFile>(&read_back(&report_path)?)
        .map_err(|e| AppError::Runtime(format!("report self-check: {e}")))?;

    let sweep_path = out.join("sweep_matrix.csv");
    write_file(&sweep_path, &late.to_csv())?;
    UpdateMatrix::from_csv(MatrixKind::FullSweep, &read_back(&sweep_path)?)
        .map_err(|e| AppError::Runtime(format!("sweep matrix self-check: {e}")))?;

    let limit_path = out.join("limit_matrix.csv");
    write_file(&limit_path, &limit.limit.to_csv())?;
    UpdateMatrix::from_csv(MatrixKind::ProductLimit, &read_back(&limit_path)?)
        .map_err(|e| AppError::Runtime(format!("limit matrix self-check: {e}")))?;

    println!(
        "spectral {} K={k}: lambda2 = {:.6}, product limit rank {} after {} factors",
        scheme.as_str(),
        report.second_eigenvalue_modulus,
        report.product_limit.numerical_rank,
        report.product_limit.factors_used
    );
    Ok(RunOutcome {
        all_converged: trace.converged && limit.converged,
    })
}

pub fn encode(out: &Path, codebook_path: &Path, input_path: &Path) -> Result<RunOutcome, AppError> {
    ensure_out_dir(out)?;
    let cb_text = fs::read_to_string(codebook_path)
        .map_err(|e| AppError::Invalid(format!("cannot read codebook {codebook_path:?}: {e}")))?;
    let cb = Codebook::from_json(&cb_text).map_err(|e| AppError::Invalid(e.to_string()))?;
    let file = fs::File::open(input_path)
        .map_err(|e| AppError::Invalid(format!("cannot read samples {input_path:?}: {e}")))?;
    let samples = codec::read_samples(std::io::BufReader::new(file))
        .map_err(|e| AppError::Invalid(e.to_string()))?;
    let stream =
        codec::encode_batch(&samples, &cb).map_err(|e| AppError::Invalid(e.to_string()))?;
    let mut buf = Vec::new();
    codec::write_encoding_csv(&mut buf, &samples, &stream, &cb)
        .map_err(|e| AppError::Runtime(e.to_string()))?;
    let path = out.join("encoded.csv");
    write_file(&path, &String::from_utf8(buf).expect("csv is utf8"))?;
    let (rows, _) = parse_numeric_csv(&read_back(&path)?, "x,index,level")
        .map_err(|e| AppError::Runtime(format!("encoding self-check: {e}")))?;
    if rows.len() != samples.len() {
        return Err(AppError::Runtime("encoding round-trip drifted".into()));
    }
    println!(
        "encoded {} samples with {}",
        samples.len(),
        cb.fingerprint()
    );
    Ok(RunOutcome {
        all_converged: true,
    })
}

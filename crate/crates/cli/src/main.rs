//! Command-line front end: designs quantizers against a named density and
//! exports codebooks, traces, error/rate curves, timing comparisons, and
//! sweep-matrix diagnostics as plot-ready CSV/JSON.
//!
//! Exit codes: 0 on success, 1 on invalid input, 2 when an iteration budget
//! ran out before convergence (files are still written), so scripts can
//! branch on convergence.

mod commands;
mod density_arg;
mod tables;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use quantdesign::quantizer::InitScheme;

#[derive(Debug)]
pub enum AppError {
    /// Bad flags, densities, or files: exit code 1.
    Invalid(String),
    /// Post-validation failures (I/O, self-checks): exit code 1.
    Runtime(String),
    /// An iteration budget expired where convergence was required: exit 2.
    NonConvergence(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SchemeArg {
    Alm,
    Aeq,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MatrixOrder {
    /// Odd half-sweep applied first, then even: the solver's own order.
    EvenOdd,
    /// The reversed composition, for comparing the two conventions.
    OddEven,
}

impl MatrixOrder {
    pub fn as_str(&self) -> &'static str {
        match self {
            MatrixOrder::EvenOdd => "even-odd",
            MatrixOrder::OddEven => "odd-even",
        }
    }
}

#[derive(Debug, Args)]
struct CommonArgs {
    /// Source density: name[:p1,p2,...], e.g. uniform, beta:2,4,
    /// truncnormal:0.5,0.3, truncexp:2, pwl:x0,f0,x1,f1,...
    #[arg(long)]
    density: String,
    /// Output directory for all artifacts.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Stopping threshold on the sup-norm level movement per iteration.
    #[arg(long, default_value_t = 1e-10)]
    threshold: f64,
    /// Iteration budget per run.
    #[arg(long, default_value_t = 500)]
    max_iter: usize,
    /// Seed reserved for randomized workflows; current commands are
    /// deterministic.
    #[arg(long, default_value_t = 0)]
    #[allow(dead_code)]
    seed: u64,
}

#[derive(Debug, Parser)]
#[command(
    name = "quantdesign",
    version,
    about = "Design and evaluate scalar quantizers for densities on [0, 1]"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Design codebooks; writes codebook JSON and an iteration-trace CSV.
    Design {
        #[command(flatten)]
        common: CommonArgs,
        /// Quantizer family to design.
        #[arg(long, value_enum, default_value_t = SchemeArg::Both)]
        scheme: SchemeArg,
        /// Level counts, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        k: Vec<usize>,
        /// `equispaced`, or a path to a file holding the full level vector
        /// (JSON array or whitespace-separated).
        #[arg(long, default_value = "equispaced")]
        init: String,
    },
    /// Distortion vs level count for both schemes and both exact references.
    MseCurve {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, value_delimiter = ',', required = true)]
        k: Vec<usize>,
    },
    /// Per-iteration cost and level movement for each K.
    Convergence {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, value_enum, default_value_t = SchemeArg::Aeq)]
        scheme: SchemeArg,
        #[arg(long, value_delimiter = ',', required = true)]
        k: Vec<usize>,
    },
    /// Median wall-clock comparison: chord-based design vs exact Lloyd-Max,
    /// each run to within 1% of its own optimum.
    CompareTime {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, value_delimiter = ',', required = true)]
        k: Vec<usize>,
        /// Timed repeats per K (median is reported).
        #[arg(long, default_value_t = 5)]
        repeats: usize,
    },
    /// Sweep-matrix property report, second eigenvalue, and product-limit
    /// diagnostics for one design run.
    Spectral {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, value_enum, default_value_t = SchemeArg::Alm)]
        scheme: SchemeArg,
        #[arg(long)]
        k: usize,
        /// Composition order of the per-iteration matrices.
        #[arg(long, value_enum, default_value_t = MatrixOrder::EvenOdd)]
        order: MatrixOrder,
    },
    /// Encode newline-delimited samples with a saved codebook.
    Encode {
        /// Output directory.
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// Codebook JSON produced by `design`.
        #[arg(long)]
        codebook: PathBuf,
        /// Newline-delimited reals in [0, 1].
        #[arg(long)]
        input: PathBuf,
    },
}

fn parse_init(text: &str) -> Result<InitScheme, AppError> {
    if text == "equispaced" {
        return Ok(InitScheme::Equispaced);
    }
    let content = std::fs::read_to_string(text)
        .map_err(|e| AppError::Invalid(format!("cannot read init file {text:?}: {e}")))?;
    let levels: Vec<f64> = match serde_json::from_str(&content) {
        Ok(v) => v,
        Err(_) => content
            .split_whitespace()
            .map(|s| {
                s.parse::<f64>()
                    .map_err(|e| AppError::Invalid(format!("init value {s:?}: {e}")))
            })
            .collect::<Result<_, AppError>>()?,
    };
    Ok(InitScheme::Explicit(levels))
}

fn run(cli: Cli) -> Result<commands::RunOutcome, AppError> {
    match cli.command {
        Command::Design {
            common,
            scheme,
            k,
            init,
        } => {
            let d = density_arg::parse_density(&common.density).map_err(AppError::Invalid)?;
            let init = parse_init(&init)?;
            commands::design(
                &common.out,
                &d,
                scheme,
                &k,
                common.threshold,
                common.max_iter,
                &init,
            )
        }
        Command::MseCurve { common, k } => {
            let d = density_arg::parse_density(&common.density).map_err(AppError::Invalid)?;
            commands::mse_curve(&common.out, &d, &k, common.threshold, common.max_iter)
        }
        Command::Convergence { common, scheme, k } => {
            let d = density_arg::parse_density(&common.density).map_err(AppError::Invalid)?;
            commands::convergence(
                &common.out,
                &d,
                scheme,
                &k,
                common.threshold,
                common.max_iter,
            )
        }
        Command::CompareTime { common, k, repeats } => {
            let d = density_arg::parse_density(&common.density).map_err(AppError::Invalid)?;
            commands::compare_time(&common.out, &d, &k, repeats, common.max_iter.max(5_000))
        }
        Command::Spectral {
            common,
            scheme,
            k,
            order,
        } => {
            let d = density_arg::parse_density(&common.density).map_err(AppError::Invalid)?;
            commands::spectral_cmd(
                &common.out,
                &d,
                scheme,
                k,
                common.threshold,
                common.max_iter,
                order,
            )
        }
        Command::Encode {
            out,
            codebook,
            input,
        } => commands::encode(&out, &codebook, &input),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(outcome) if outcome.all_converged => ExitCode::SUCCESS,
        Ok(_) => {
            eprintln!("warning: at least one run hit its iteration budget before converging");
            ExitCode::from(2)
        }
        Err(AppError::Invalid(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(AppError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(AppError::NonConvergence(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

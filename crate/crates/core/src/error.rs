use thiserror::Error;

/// Errors shared by every module of the crate.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("x = {x} lies outside the support [0, 1]")]
    OutOfSupport { x: f64 },

    #[error("invalid density: {0}")]
    InvalidDensity(String),

    #[error("degenerate interval [{lo}, {hi}]: width below floor {floor:e}")]
    DegenerateInterval { lo: f64, hi: f64, floor: f64 },

    #[error(
        "no root found in [{lo}, {hi}] for coefficients {coeffs:?} \
         (f(lo) = {f_lo:e}, f(hi) = {f_hi:e})"
    )]
    RootNotFound {
        lo: f64,
        hi: f64,
        f_lo: f64,
        f_hi: f64,
        coeffs: [f64; 4],
    },

    #[error("invalid initial levels: {0}")]
    InvalidInit(String),

    #[error("theta[{index}] = {theta} outside the open interval (0, 1)")]
    InvalidTheta { index: usize, theta: f64 },

    #[error("matrix dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("cell {index} carries mass {mass:e}, below the degeneracy threshold")]
    DegenerateCell { index: usize, mass: f64 },

    #[error("codebooks differ in scheme or level count")]
    CodebookMismatch,

    #[error("level index {index} outside 1..={count}")]
    IndexOutOfRange { index: usize, count: usize },

    #[error("empty sample set")]
    EmptySamples,

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("malformed {what}: {detail}")]
    ParseError { what: String, detail: String },
}

pub type Result<T> = std::result::Result<T, Error>;

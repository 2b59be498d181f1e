//! Error taxonomy shared by the library and the CLI.
//!
//! The CLI maps these onto process exit codes: 2 for parameter/usage
//! problems, 3 for data errors (malformed sign files), 4 for resource
//! budget violations. Everything else is an I/O failure (3).

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dyadic interval: position {pos} out of range for level {level}")]
    InvalidInterval { level: u32, pos: u64 },

    #[error("resolution too coarse: m = {m} but the finest Haar half-interval needs m >= {needed}")]
    ResolutionTooCoarse { m: u32, needed: u32 },

    #[error("grid too large: {cells} cells exceed the budget of {budget}")]
    GridTooLarge { cells: u128, budget: u64 },

    #[error("grid shape mismatch: ({d_a}, m={m_a}) vs ({d_b}, m={m_b})")]
    ShapeMismatch { d_a: usize, m_a: u32, d_b: usize, m_b: u32 },

    #[error("sign array has {got} entries, shape {shape} needs {want}")]
    WrongSignCount { shape: String, want: u64, got: u64 },

    #[error("shape {shape} is not part of this sign assignment")]
    ShapeNotInAssignment { shape: String },

    #[error("invalid block index {t}: partition has {q} blocks (1-based)")]
    InvalidBlock { t: usize, q: u32 },

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("degenerate block count: floor(a * n^eps) = 0 for a={a}, n={n}; pass an explicit block-count override")]
    DegenerateQ { a: f64, n: u32 },

    #[error("kappa = {kappa} out of range: need 0 < kappa < 1/(2d) = {limit}")]
    KappaOutOfRange { kappa: f64, limit: f64 },

    #[error("exact mode needs a rational rho-tilde (none was supplied)")]
    ExactNeedsRationalRho,

    #[error("exact arithmetic range exceeded: {0} (reduce n, q, or the rho-tilde denominator, or use float mode)")]
    ExactRangeExceeded(String),

    #[error("sign file error: {0}")]
    SignFile(String),

    #[error("instance too large: {0}")]
    InstanceTooLarge(String),

    #[error("{0}")]
    Usage(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json parse error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code for the CLI: 2 usage, 3 data, 4 resource budget.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_)
            | Error::InvalidParam(_)
            | Error::DegenerateQ { .. }
            | Error::KappaOutOfRange { .. }
            | Error::ExactNeedsRationalRho => 2,
            Error::SignFile(_) | Error::Io(_) | Error::Json(_) => 3,
            Error::GridTooLarge { .. }
            | Error::InstanceTooLarge(_)
            | Error::ExactRangeExceeded(_) => 4,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

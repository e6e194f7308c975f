use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("rate `{name}` must be non-negative, got {value}")]
    NegativeRate { name: &'static str, value: f64 },

    #[error("gamma1 must be strictly positive: it sets the unit of every other rate")]
    ZeroGamma1,

    #[error("both sites must share gamma1 (got {a} and {b})")]
    MismatchedGamma1 { a: f64, b: f64 },

    #[error("matrix is not square ({rows}x{cols})")]
    NonSquare { rows: usize, cols: usize },

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("initial amplitudes are not normalized (norm^2 = {norm_sq})")]
    NotNormalized { norm_sq: f64 },

    #[error("invalid time grid: {0}")]
    InvalidGrid(String),

    #[error("adaptive integrator step size underflow at t = {t}")]
    StepSizeUnderflow { t: f64 },

    #[error("integration failed: {0}")]
    Integration(String),

    #[error("characteristic polynomial has (nearly) repeated roots, separation {separation:e}")]
    RepeatedRoots { separation: f64 },

    #[error("time grid too coarse: N = {coarse} on the grid, {fine} on the 2x refined grid")]
    GridTooCoarse { coarse: f64, fine: f64 },

    #[error("state has eigenvalue {value} below the -1e-9 tolerance")]
    NegativeEigenvalue { value: f64 },

    #[error("state is not of X form (largest off-X element {magnitude:e})")]
    NotXState { magnitude: f64 },

    #[error("horizon {horizon} too short: concurrence has not settled in the tail window")]
    HorizonTooShort { horizon: f64 },

    #[error("invalid sweep: {0}")]
    InvalidSweep(String),

    #[error("{}", fmt_parse(*.line, .key.as_deref(), .message))]
    Parse {
        line: Option<usize>,
        key: Option<String>,
        message: String,
    },

    #[error("invalid configuration: {0}")]
    Validation(#[source] Box<Error>),

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

fn fmt_parse(line: Option<usize>, key: Option<&str>, message: &str) -> String {
    match (line, key) {
        (Some(l), Some(k)) => format!("parse error at line {l}, key `{k}`: {message}"),
        (Some(l), None) => format!("parse error at line {l}: {message}"),
        (None, Some(k)) => format!("parse error, key `{k}`: {message}"),
        (None, None) => format!("parse error: {message}"),
    }
}

impl Error {
    pub(crate) fn parse(message: impl Into<String>) -> Self {
        Error::Parse {
            line: None,
            key: None,
            message: message.into(),
        }
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::NegativeRate { .. }
            | Error::ZeroGamma1
            | Error::MismatchedGamma1 { .. }
            | Error::NotNormalized { .. }
            | Error::InvalidGrid(_)
            | Error::InvalidSweep(_)
            | Error::Parse { .. }
            | Error::Validation(_)
            | Error::UnknownPreset(_) => 2,
            Error::Io { .. } => 4,
            _ => 3,
        }
    }
}

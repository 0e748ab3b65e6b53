use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("invalid Lamé constants: mu = {mu}, lambda = {lambda} (need mu > 0 and lambda + mu >= 0)")]
    InvalidLameParams { mu: f64, lambda: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("zero field has no finite norm ratio")]
    ZeroField,

    #[error("initial temperature profile is not strictly positive (min = {min})")]
    NonPositiveTheta { min: f64 },

    #[error("Picard iteration diverged at t = {t} (dt = {dt}): {reason}")]
    PicardDiverged { t: f64, dt: f64, reason: String },

    #[error("step size {dt} fell below dt_min = {dt_min} at t = {t}")]
    StepTooSmall { t: f64, dt: f64, dt_min: f64 },

    #[error("blow-up detected at t = {t}: |u|_H1^2 = {h1_sq} exceeds ceiling {ceiling}")]
    BlowUpDetected { t: f64, h1_sq: f64, ceiling: f64 },

    #[error("need at least {needed} entries, got {got}")]
    InsufficientEntries { needed: usize, got: usize },

    #[error("empty sample set")]
    EmptySampleSet,

    #[error("bad magic in snapshot {path}")]
    BadMagic { path: PathBuf },

    #[error("snapshot {path} truncated: expected {expected} payload bytes, found {found}")]
    TruncatedPayload {
        path: PathBuf,
        expected: usize,
        found: usize,
    },

    #[error("snapshot dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("configuration invalid:\n{}", .0.iter().map(|v| format!("  - {v}")).collect::<Vec<_>>().join("\n"))]
    Config(Vec<ConfigViolation>),

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Short machine-readable tag used in CLI error records.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidGrid(_) => "InvalidGrid",
            Error::GridMismatch(_) => "GridMismatch",
            Error::InvalidLameParams { .. } => "InvalidLameParams",
            Error::InvalidArgument(_) => "InvalidArgument",
            Error::ZeroField => "ZeroField",
            Error::NonPositiveTheta { .. } => "NonPositiveTheta",
            Error::PicardDiverged { .. } => "PicardDiverged",
            Error::StepTooSmall { .. } => "StepTooSmall",
            Error::BlowUpDetected { .. } => "BlowUpDetected",
            Error::InsufficientEntries { .. } => "InsufficientEntries",
            Error::EmptySampleSet => "EmptySampleSet",
            Error::BadMagic { .. } => "BadMagic",
            Error::TruncatedPayload { .. } => "TruncatedPayload",
            Error::DimensionMismatch(_) => "DimensionMismatch",
            Error::Config(_) => "ConfigError",
            Error::Io { .. } => "Io",
            Error::Json(_) => "Json",
        }
    }
}

/// One problem found while validating a run configuration.
#[derive(Debug, Clone, PartialEq)]
pub enum ConfigViolation {
    UnknownKey(String),
    MissingKey(String),
    WrongType { key: String, expected: &'static str },
    ConstraintViolation { key: String, message: String },
}

impl std::fmt::Display for ConfigViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ConfigViolation::UnknownKey(k) => write!(f, "UnknownKey: `{k}`"),
            ConfigViolation::MissingKey(k) => write!(f, "MissingKey: `{k}`"),
            ConfigViolation::WrongType { key, expected } => {
                write!(f, "WrongType: `{key}` must be {expected}")
            }
            ConfigViolation::ConstraintViolation { key, message } => {
                write!(f, "ConstraintViolation: `{key}`: {message}")
            }
        }
    }
}

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("physical samples contain non-finite values")]
    NonFiniteSamples,

    #[error("Lebesgue exponent r = {0} is out of range (need r >= 1)")]
    InvalidLebesgueExponent(f64),

    #[error("determining-wavenumber exponent r = {0} must lie in the open interval (2,3)")]
    InvalidDeterminingExponent(f64),

    #[error("negative-order Sobolev norm requires a zero-mean field")]
    MeanNotZero,

    #[error("shell norm is zero; Bernstein ratio undefined")]
    ZeroShellNorm,

    #[error("empty time series")]
    EmptySeries,

    #[error("intermittency dimension d = {0} is out of range [0,3]")]
    InvalidIntermittencyDimension(f64),

    #[error("solver state became non-finite at t = {t} (step {step})")]
    NonFiniteState { t: f64, step: u64 },

    #[error("steady-state relaxation did not converge within {max_steps} steps; last residuals: {tail:?}")]
    NoConvergence { max_steps: u64, tail: Vec<f64> },

    #[error("config: {0}")]
    Config(#[from] ConfigError),

    #[error("snapshot: {0}")]
    Snapshot(#[from] SnapshotError),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Configuration file / flag validation errors.
#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("missing required keys: {0}")]
    MissingKeys(String),

    #[error("unknown key '{0}'")]
    UnknownKey(String),

    #[error("key '{key}': cannot parse '{value}'")]
    Parse { key: String, value: String },

    #[error("key '{key}': value {value} out of range ({range})")]
    Range {
        key: String,
        value: String,
        range: String,
    },

    #[error("malformed line {lineno}: '{line}' (expected 'key = value')")]
    Malformed { lineno: usize, line: String },
}

/// Binary snapshot format errors.
#[derive(Debug, Error)]
pub enum SnapshotError {
    #[error("bad magic (not an NSE3SNAP file)")]
    BadMagic,

    #[error("unsupported version {0}")]
    UnsupportedVersion(u32),

    #[error("truncated payload: expected {expected} bytes, found {found}")]
    Truncated { expected: usize, found: usize },

    #[error("payload contains non-finite values")]
    NonFinitePayload,

    #[error("invalid header: {0}")]
    InvalidHeader(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

use thiserror::Error;

use crate::dynamics::EvolutionResult;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: expected {expected}, got {actual}")]
    Shape { expected: String, actual: String },

    #[error("invalid dimension {0}: must be at least 2")]
    InvalidDimension(usize),

    #[error("level {level} out of range for dimension {dim}")]
    LevelOutOfRange { level: usize, dim: usize },

    #[error("site {site} out of range for a space with {n_factors} factors")]
    SiteOutOfRange { site: usize, n_factors: usize },

    #[error("partial trace needs at least one kept site")]
    EmptyKeepSet,

    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error("diagonalization failed for a {dim}x{dim} matrix: {reason}")]
    Diagonalization { dim: usize, reason: String },

    #[error("singular denominator: {0}")]
    Singularity(String),

    #[error("coupling curve is not strictly monotone on phi_plus in [{phi_lo}, {phi_hi}]")]
    NonMonotoneCurve { phi_lo: f64, phi_hi: f64 },

    #[error("target coupling {target_mhz} MHz at t = {t_ns} ns outside curve range [{min_mhz}, {max_mhz}] MHz")]
    TargetOutOfRange {
        t_ns: f64,
        target_mhz: f64,
        min_mhz: f64,
        max_mhz: f64,
    },

    #[error("non-uniform sampling: step {step} deviates from {expected}")]
    NonUniformSampling { step: f64, expected: f64 },

    #[error("signal too short: {len} samples, need at least {min}")]
    SignalTooShort { len: usize, min: usize },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("integration accuracy lost at t = {t_ns} ns: |Tr rho - 1| = {trace_err:e}; reduce dt")]
    IntegrationAccuracy {
        t_ns: f64,
        trace_err: f64,
        partial: Box<EvolutionResult>,
    },

    #[error("photon cutoff {cutoff} too small: max displacement |alpha|^2 = {alpha_sq:.3} must stay below cutoff/4")]
    Truncation { cutoff: usize, alpha_sq: f64 },

    #[error("register of {n} qubits exceeds the dense limit of {max}")]
    SizeLimit { n: usize, max: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn shape_err(expected: impl ToString, actual: impl ToString) -> Error {
    Error::Shape {
        expected: expected.to_string(),
        actual: actual.to_string(),
    }
}

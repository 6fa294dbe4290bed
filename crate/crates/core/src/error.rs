use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid mismatch: {left} vs {right}")]
    GridMismatch { left: String, right: String },

    #[error("field has {found} samples, expected {expected}")]
    SampleCount { expected: usize, found: usize },

    #[error("non-finite sample at index {index}")]
    NonFinite { index: usize },

    #[error("non-positive density {value} at sample {index}")]
    NonPositiveDensity { index: usize, value: f64 },

    #[error("invalid model configuration: {0}")]
    InvalidConfig(String),

    #[error("model mismatch: operation requires {expected}, config selects {found}")]
    ModelMismatch { expected: &'static str, found: &'static str },

    #[error("inconsistent Reynolds number: configured {configured}, reference scales give {derived}")]
    InconsistentReynolds { configured: f64, derived: f64 },

    #[error("poisson solver did not converge in {iterations} iterations (relative residual {residual:e})")]
    PoissonNotConverged { iterations: usize, residual: f64 },

    #[error("solution blew up at t = {time} (CFL {cfl:.3})")]
    BlowUp { time: f64, cfl: f64 },

    #[error("need at least {needed} trajectory samples, got {found}")]
    TooFewSamples { needed: usize, found: usize },

    #[error("trajectory is not uniformly sampled: {0}")]
    NonUniformSampling(String),

    #[error("particle {index} left the resolvable regime: {reason}")]
    ParticleDegraded { index: usize, reason: String },

    #[error("snapshot format error in {path}: {reason}")]
    Snapshot { path: PathBuf, reason: String },

    #[error("experiment configuration: {0}")]
    Experiment(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

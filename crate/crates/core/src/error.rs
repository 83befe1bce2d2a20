//! Error type shared by all modules.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid stable parameters: alpha = {alpha} (need 0 < alpha <= 2), sigma = {sigma} (need sigma > 0)")]
    InvalidStableParams { alpha: f64, sigma: f64 },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid spacing {dz} exceeds the Nyquist limit {limit} (lambda/4)")]
    NyquistViolation { dz: f64, limit: f64 },

    #[error("incompatible grids: {0}")]
    GridMismatch(String),

    #[error("invalid aperture: {0}")]
    InvalidAperture(String),

    #[error("null posterior: collapse norm {norm:.3e} underflows the 1e-12 threshold")]
    NullPosterior { norm: f64 },

    #[error("design infeasible: capture region retains only {retained_percent:.1}% of the target spectral mass")]
    DesignInfeasible { retained_percent: f64 },

    #[error("unknown preset: {0}")]
    UnknownPreset(String),

    #[error("broad-measurement regime violated: kernel width {kernel_width:.4} < 5 x state width {state_width:.4}")]
    RegimeViolation { kernel_width: f64, state_width: f64 },

    #[error("fit failure: {0}")]
    FitFailure(String),

    #[error("insufficient samples: got {got}, need at least {need}")]
    InsufficientSamples { got: usize, need: usize },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

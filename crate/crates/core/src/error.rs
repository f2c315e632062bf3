use thiserror::Error;

/// Errors raised by the toolkit.
///
/// Variants split into two families: input problems (the caller asked for
/// something outside a precondition) and numerical failures (the inputs were
/// fine but the computation could not complete). [`Error::is_numerical`]
/// reports which family a value belongs to; the CLI maps them to distinct
/// exit codes.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("xi admissibility undefined: {0}")]
    AdmissibilityUndefined(String),

    #[error("validation error: {0}")]
    Validation(String),

    #[error("unsupported case: {0}")]
    UnsupportedCase(String),

    #[error("near-singular per-mode system: |det| = {det:e} below threshold {threshold:e}")]
    NearSingular { det: f64, threshold: f64 },

    #[error("characteristic function has a pole at s = {0}")]
    Pole(String),

    #[error("overflow: {0}")]
    Overflow(String),

    #[error("no root located in window: {0}")]
    RootNotFound(String),

    #[error("simulation diverged at t = {time}")]
    Divergence { time: f64 },

    #[error("decay fit undefined: {0}")]
    FitUndefined(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NearSingular { .. }
                | Error::Pole(_)
                | Error::Overflow(_)
                | Error::RootNotFound(_)
                | Error::Divergence { .. }
                | Error::FitUndefined(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;

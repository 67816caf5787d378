use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Input violates a documented invariant. `path` names the offending field
    /// (e.g. `sim.dt` or `chain.couplings[0][1]`).
    #[error("invalid {path}: {message}")]
    Validation { path: String, message: String },

    #[error("spin index {index} out of range 1..={n_spins}")]
    SpinIndex { index: usize, n_spins: usize },

    #[error("dimension mismatch: expected {expected}, got {found}")]
    Dimension { expected: usize, found: usize },

    #[error("{operation} requires the zz coupling form")]
    UnsupportedForm { operation: &'static str },

    #[error(
        "norm drifted by {drift:.3e} (limit {limit:.1e}) at t = {time:.6} s; reduce dt"
    )]
    Accuracy { drift: f64, limit: f64, time: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("{0}")]
    Json(String),
}

impl Error {
    pub(crate) fn validation(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Validation {
            path: path.into(),
            message: message.into(),
        }
    }

    /// True for errors caused by bad input rather than numerics or IO.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Validation { .. }
                | Error::SpinIndex { .. }
                | Error::Dimension { .. }
                | Error::UnsupportedForm { .. }
                | Error::Json(_)
        )
    }
}

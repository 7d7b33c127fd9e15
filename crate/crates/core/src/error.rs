use thiserror::Error;

/// Errors raised by model construction and evaluation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("magnetic quantum number {0} is not one of -1, 0, 1")]
    InvalidQuantumNumber(i32),

    #[error("negative evaluation time t = {0}")]
    NegativeTime(f64),

    #[error("transition requires two distinct states")]
    SameState,

    #[error("quadrature did not converge: estimate {estimate:e}, error estimate {error:e}")]
    QuadratureNotConverged { estimate: f64, error: f64 },

    #[error("time step dt = {dt:e} exceeds the stability bound {bound:e}")]
    StepTooCoarse { dt: f64, bound: f64 },

    #[error("trajectory configuration frame {found:?} does not match {expected:?}")]
    FrameMismatch {
        expected: crate::montecarlo::Frame,
        found: crate::montecarlo::Frame,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn ensure(cond: bool, name: &'static str, reason: impl Into<String>) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            reason: reason.into(),
        })
    }
}

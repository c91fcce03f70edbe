use thiserror::Error;

/// Errors produced by the geometry, analysis and simulation routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// The off-service rate is zero, so the source is never covered and
    /// the age grows without bound.
    #[error(
        "permanent disconnection: the off-service rate is zero and no update is ever delivered"
    )]
    PermanentDisconnection,

    #[error("starvation: {delivered} deliveries within {arrivals} arrivals (need at least 2 to close a cycle)")]
    Starvation { arrivals: u64, delivered: u64 },

    #[error("integrand is not finite at x = {x}")]
    NonFiniteIntegrand { x: f64 },

    #[error("empty sample")]
    EmptySample,

    #[error("period trace ends at t = {end} s, before the arrival at t = {arrival} s")]
    TraceExhausted { end: f64, arrival: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}

/// Fails unless `value` is finite and strictly positive.
pub(crate) fn ensure_positive(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(invalid(
            name,
            format!("must be finite and > 0, got {value}"),
        ))
    }
}

pub(crate) fn ensure_non_negative(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(invalid(
            name,
            format!("must be finite and >= 0, got {value}"),
        ))
    }
}

use thiserror::Error;

/// Errors produced by the analytic, simulation and optimization layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    Parameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("jump distribution must have unit mean, got {mean}")]
    Normalization { mean: f64 },

    #[error("Pareto shape {shape} leaves the third moment infinite (need shape > 3)")]
    Moment { shape: f64 },

    #[error("transform argument {theta} outside the domain of the Levy exponent")]
    Domain { theta: f64 },

    #[error("unstable queue: server speed {mu} must exceed arrival rate {lambda}")]
    Stability { lambda: f64, mu: f64 },

    #[error("no closed-form moments available for {0}")]
    UnsupportedAnalytics(&'static str),

    #[error("invalid simulation config: {0}")]
    Config(String),

    #[error("numerical failure: {0}")]
    Numeric(String),

    #[error("sample-average objective not convex: second difference {value:.3e} at mu = {mu}")]
    Convexity { mu: f64, value: f64 },

    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn positive(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(Error::Parameter {
            name,
            value,
            reason: "must be finite and > 0",
        })
    }
}

pub(crate) fn non_negative(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value >= 0.0 {
        Ok(value)
    } else {
        Err(Error::Parameter {
            name,
            value,
            reason: "must be finite and >= 0",
        })
    }
}

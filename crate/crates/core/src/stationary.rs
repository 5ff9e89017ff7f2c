//! Steady-state workload moments, the stationary cost and its minimizer.

use serde::Serialize;

use crate::error::{positive, Error, Result};
use crate::model::InputModel;

/// Relative margin above `lambda` below which stationary quantities are refused.
pub const STABILITY_MARGIN: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StationaryResult {
    pub mean_workload: f64,
    pub second_moment: f64,
}

/// Returns `mu - lambda`, or a stability error when the queue is not
/// comfortably ergodic.
pub fn spare_capacity(model: &InputModel, mu: f64) -> Result<f64> {
    let lambda = model.lambda();
    if !(mu.is_finite() && mu > lambda * (1.0 + STABILITY_MARGIN)) {
        return Err(Error::Stability { lambda, mu });
    }
    Ok(mu - lambda)
}

pub fn stationary_moments(model: &InputModel, mu: f64) -> Result<StationaryResult> {
    let c = spare_capacity(model, mu)?;
    let lambda = model.lambda();
    let m = model.moments();
    let mean = lambda * m.u2 / (2.0 * c);
    Ok(StationaryResult {
        mean_workload: mean,
        second_moment: 2.0 * mean * mean + lambda * m.u3 / (3.0 * c),
    })
}

/// `C_inf(mu)`, the stationary mean workload.
pub fn c_infinity(model: &InputModel, mu: f64) -> Result<f64> {
    Ok(stationary_moments(model, mu)?.mean_workload)
}

/// `Pi_inf(mu) = C_inf(mu) + alpha mu`.
pub fn pi_infinity(model: &InputModel, mu: f64, alpha: f64) -> Result<f64> {
    let alpha = positive("alpha", alpha)?;
    Ok(c_infinity(model, mu)? + alpha * mu)
}

/// Minimizer of the stationary cost, `lambda + sqrt(lambda u2 / (2 alpha))`.
pub fn mu_star_infinity(model: &InputModel, alpha: f64) -> Result<f64> {
    let alpha = positive("alpha", alpha)?;
    let lambda = model.lambda();
    Ok(lambda + (lambda * model.moments().u2 / (2.0 * alpha)).sqrt())
}

/// Minimal stationary cost, `alpha lambda + sqrt(2 alpha lambda u2)`.
pub fn pi_star_infinity(model: &InputModel, alpha: f64) -> Result<f64> {
    let alpha = positive("alpha", alpha)?;
    let lambda = model.lambda();
    Ok(alpha * lambda + (2.0 * alpha * lambda * model.moments().u2).sqrt())
}

/// Stationary mean workload when staffing at `mu_star_infinity`; the
/// experiments start the "busy" scenario at twice this level.
pub fn benchmark_congestion(model: &InputModel, alpha: f64) -> Result<f64> {
    let alpha = positive("alpha", alpha)?;
    Ok((alpha * model.lambda() * model.moments().u2 / 2.0).sqrt())
}

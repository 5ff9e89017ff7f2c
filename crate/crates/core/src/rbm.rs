//! Deterministic evaluation of transient reflected Brownian motion.
//!
//! For `Q(t) = x + B(t) + L(t)` with `B` a Brownian motion of drift `m` and
//! variance `s2` per unit time and `L` the regulator at zero,
//!
//! ```text
//! P(Q(t) <= z) = Phi((z - x - m t)/(s sqrt t)) - exp(2 m z / s2) Phi((-z - x - m t)/(s sqrt t))
//! ```
//!
//! for `z >= 0`. Means and time averages follow by adaptive quadrature over
//! the survival function and then over time.

use std::cell::Cell;

use serde::Serialize;

use crate::error::{non_negative, positive, Error, Result};
use crate::model::{InputKind, InputModel};
use crate::quad::integrate;
use crate::stats::{ln_norm_cdf, norm_cdf, norm_pdf};

/// Absolute tolerance of the inner (space) integral.
pub const MEAN_TOL: f64 = 1e-8;
/// Absolute tolerance of the time-averaged mean.
pub const CT_TOL: f64 = 1e-6;
/// Survival level below which the space integral is truncated.
const TAIL_CUTOFF: f64 = 1e-14;
const MAX_PANELS: usize = 4000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RbmSpec {
    /// Initial workload.
    pub x: f64,
    /// Drift of the free process, `lambda - mu`.
    pub drift: f64,
    /// Variance per unit time, `lambda sigma^2`.
    pub s2: f64,
}

impl RbmSpec {
    pub fn new(x: f64, drift: f64, s2: f64) -> Result<Self> {
        if !drift.is_finite() {
            return Err(Error::Parameter {
                name: "drift",
                value: drift,
                reason: "must be finite",
            });
        }
        Ok(Self {
            x: non_negative("x", x)?,
            drift,
            s2: positive("s2", s2)?,
        })
    }

    /// The workload of a Brownian-input queue with speed `mu` started at `x`.
    pub fn from_model(model: &InputModel, mu: f64, x: f64) -> Result<Self> {
        let InputKind::BrownianDrift { sigma2 } = model.kind() else {
            return Err(Error::UnsupportedAnalytics(
                "transient laws of compound-Poisson input",
            ));
        };
        let mu = non_negative("mu", mu)?;
        let lambda = model.lambda();
        Self::new(x, lambda - mu, lambda * sigma2)
    }

    /// Stationary mean `s2 / (2 |m|)`; requires negative drift.
    pub fn stationary_mean(&self) -> Result<f64> {
        if self.drift < 0.0 {
            Ok(self.s2 / (-2.0 * self.drift))
        } else {
            Err(Error::Stability {
                lambda: self.drift,
                mu: 0.0,
            })
        }
    }

    fn tilt(&self) -> f64 {
        2.0 * self.drift / self.s2
    }

    /// Free-process mean and standard deviation at time `t`.
    fn free(&self, t: f64) -> (f64, f64) {
        (self.x + self.drift * t, (self.s2 * t).sqrt())
    }

    /// `P(Q(t) > z)` as a sum of two non-negative terms.
    fn survival_at(&self, t: f64, z: f64) -> f64 {
        let (centre, sd) = self.free(t);
        let direct = norm_cdf((centre - z) / sd);
        let reflected = (self.tilt() * z + ln_norm_cdf((-z - centre) / sd)).exp();
        direct + reflected
    }
}

fn check_time(t: f64) -> Result<f64> {
    positive("t", t)
}

/// `P(Q(t) <= z | Q(0) = x)`; zero for `z < 0`.
pub fn rbm_cdf(spec: &RbmSpec, t: f64, z: f64) -> Result<f64> {
    let t = check_time(t)?;
    if z.is_nan() {
        return Err(Error::Parameter {
            name: "z",
            value: z,
            reason: "must not be NaN",
        });
    }
    if z < 0.0 {
        return Ok(0.0);
    }
    if z == f64::INFINITY {
        return Ok(1.0);
    }
    Ok((1.0 - spec.survival_at(t, z)).clamp(0.0, 1.0))
}

/// Density of `Q(t)` on `z > 0`.
pub fn rbm_pdf(spec: &RbmSpec, t: f64, z: f64) -> Result<f64> {
    let t = check_time(t)?;
    if z < 0.0 {
        return Ok(0.0);
    }
    let (centre, sd) = spec.free(t);
    let k = spec.tilt();
    let a = (z - centre) / sd;
    let b = (-z - centre) / sd;
    let tilt = k * z;
    let direct = norm_pdf(a) / sd;
    let reflected = (tilt + ln_norm_cdf(b)).exp() * (-k)
        + (tilt - 0.5 * b * b).exp() / ((2.0 * std::f64::consts::PI).sqrt() * sd);
    Ok((direct + reflected).max(0.0))
}

/// `E[Q(t) | Q(0) = x]`, with `rbm_mean(spec, 0) = x`.
pub fn rbm_mean(spec: &RbmSpec, t: f64) -> Result<f64> {
    let t = non_negative("t", t)?;
    if t == 0.0 {
        return Ok(spec.x);
    }
    let (centre, sd) = spec.free(t);
    let mut upper = centre.max(0.0) + 10.0 * sd;
    while spec.survival_at(t, upper) > TAIL_CUTOFF {
        upper = 2.0 * upper + sd;
        if !upper.is_finite() {
            return Err(Error::Numeric(format!(
                "survival tail of RBM at t = {t} does not decay"
            )));
        }
    }
    let breaks = [spec.x, centre - 4.0 * sd, centre, centre + 4.0 * sd];
    let r = integrate(
        |z| spec.survival_at(t, z),
        0.0,
        upper,
        &breaks,
        MEAN_TOL,
        MAX_PANELS,
    )?;
    Ok(r.value)
}

/// `C_T = (1/T) integral_0^T E[Q(t)] dt`.
pub fn rbm_ct(spec: &RbmSpec, horizon: f64) -> Result<f64> {
    let horizon = positive("T", horizon)?;
    let failure: Cell<Option<Error>> = Cell::new(None);
    let integrand = |t: f64| match rbm_mean(spec, t) {
        Ok(v) => v,
        Err(e) => {
            failure.set(Some(e));
            f64::NAN
        }
    };
    let r = integrate(integrand, 0.0, horizon, &[], CT_TOL * horizon, MAX_PANELS);
    if let Some(e) = failure.take() {
        return Err(e);
    }
    Ok(r?.value / horizon)
}

/// `Pi_T(mu) = C_T(mu) + alpha mu` for Brownian input from a deterministic start.
pub fn rbm_pi(model: &InputModel, mu: f64, alpha: f64, horizon: f64, x: f64) -> Result<f64> {
    let alpha = positive("alpha", alpha)?;
    let spec = RbmSpec::from_model(model, mu, x)?;
    Ok(rbm_ct(&spec, horizon)? + alpha * mu)
}

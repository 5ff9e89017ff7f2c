//! Finite-horizon corrections to the stationary congestion cost.
//!
//! Coupling a queue started at `x` with one started at `y` through the same
//! net input yields a difference process whose total area is
//! `(x^2 - y^2) / (2 (mu - lambda))`. Randomizing `x` over the initial law and
//! `y` over the stationary law gives the leading `1/T` correction `Psi_T` of
//! `C_T - C_inf`; the remainder is `O(1/T^2)` with an explicit bound built
//! from the second moment of the emptying time.

use serde::{Deserialize, Serialize};

use crate::error::{non_negative, positive, Error, Result};
use crate::model::{InputKind, InputModel};
use crate::stationary::{c_infinity, mu_star_infinity, spare_capacity, stationary_moments};

/// Law of the workload at time zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialState {
    Deterministic(f64),
    ExponentialMean(f64),
    /// Endpoint of an auxiliary path of length `burn_in` started empty.
    Warmup {
        burn_in: f64,
    },
}

impl InitialState {
    pub fn deterministic(x: f64) -> Result<Self> {
        Ok(Self::Deterministic(non_negative("x", x)?))
    }

    pub fn exponential_mean(m: f64) -> Result<Self> {
        Ok(Self::ExponentialMean(positive("exponential_mean", m)?))
    }

    pub fn warmup(burn_in: f64) -> Result<Self> {
        Ok(Self::Warmup {
            burn_in: positive("burn_in", burn_in)?,
        })
    }

    pub fn empty() -> Self {
        Self::Deterministic(0.0)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::Deterministic(x) => non_negative("x", x).map(drop),
            Self::ExponentialMean(m) => positive("exponential_mean", m).map(drop),
            Self::Warmup { burn_in } => positive("burn_in", burn_in).map(drop),
        }
    }

    /// `E[Q(0)^2]`.
    pub fn second_moment(&self) -> Result<f64> {
        self.validate()?;
        match *self {
            Self::Deterministic(x) => Ok(x * x),
            Self::ExponentialMean(m) => Ok(2.0 * m * m),
            Self::Warmup { .. } => Err(Error::UnsupportedAnalytics("a warm-up initial state")),
        }
    }

    /// `E[Q(0)^3]`.
    pub fn third_moment(&self) -> Result<f64> {
        self.validate()?;
        match *self {
            Self::Deterministic(x) => Ok(x * x * x),
            Self::ExponentialMean(m) => Ok(6.0 * m * m * m),
            Self::Warmup { .. } => Err(Error::UnsupportedAnalytics("a warm-up initial state")),
        }
    }
}

/// Leading correction and, where available, the bound on the remainder:
/// `|C_T - C_inf - psi_t| <= delta_bound`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CorrectionTerms {
    pub psi_t: f64,
    pub delta_bound: Option<f64>,
}

/// `Psi_T^{x,y} = (x^2 - y^2) / (2 T (mu - lambda))`.
pub fn psi_xy(x: f64, y: f64, model: &InputModel, mu: f64, horizon: f64) -> Result<f64> {
    let x = non_negative("x", x)?;
    let y = non_negative("y", y)?;
    let horizon = positive("T", horizon)?;
    let c = spare_capacity(model, mu)?;
    Ok((x * x - y * y) / (2.0 * horizon * c))
}

/// `Psi_T` for a random initial state.
pub fn psi_t(model: &InputModel, mu: f64, horizon: f64, init: &InitialState) -> Result<f64> {
    let horizon = positive("T", horizon)?;
    let q0_sq = init.second_moment()?;
    let c = spare_capacity(model, mu)?;
    let stationary_sq = stationary_moments(model, mu)?.second_moment;
    Ok((q0_sq - stationary_sq) / (2.0 * horizon * c))
}

/// Mean time for the workload started at `x` to empty, `x / (mu - lambda)`.
pub fn expected_passage_time(x: f64, model: &InputModel, mu: f64) -> Result<f64> {
    let x = non_negative("x", x)?;
    Ok(x / spare_capacity(model, mu)?)
}

/// `E[tau^2]` for the emptying time from level `v`:
/// `v^2 / c^2 + lambda u2 v / c^3` with `c = mu - lambda`.
pub fn passage_time_second_moment(v: f64, model: &InputModel, mu: f64) -> Result<f64> {
    let v = non_negative("v", v)?;
    let c = spare_capacity(model, mu)?;
    let lu2 = model.lambda() * model.moments().u2;
    Ok(v * v / (c * c) + lu2 * v / (c * c * c))
}

fn bound_from_moments(m2: f64, m3: f64, model: &InputModel, c: f64, horizon: f64) -> f64 {
    let lu2 = model.lambda() * model.moments().u2;
    (m3 / (3.0 * c * c) + lu2 * m2 / (2.0 * c * c * c)) / (horizon * horizon)
}

/// Upper bound on `|Delta_T^{x,y}|`, the tail beyond `T` of the coupled difference.
pub fn delta_bound_xy(x: f64, y: f64, model: &InputModel, mu: f64, horizon: f64) -> Result<f64> {
    let x = non_negative("x", x)?;
    let y = non_negative("y", y)?;
    let horizon = positive("T", horizon)?;
    let c = spare_capacity(model, mu)?;
    let m = x.max(y);
    Ok(bound_from_moments(m * m, m * m * m, model, c, horizon))
}

/// Stationary workload law of the form "atom at 0, exponential tail":
/// `P(Q > q) = p_busy * exp(-rate q)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpTailLaw {
    pub p_busy: f64,
    pub rate: f64,
}

impl ExpTailLaw {
    /// `E[max(x, Q)^k]` for `k` in {2, 3}.
    pub fn max_moment(&self, x: f64, k: u32) -> f64 {
        let r = self.rate;
        let xk = x.powi(k as i32);
        let survive = (-r * x).exp();
        // integral over (x, inf) of y^k r e^{-r y} dy = e^{-r x} sum_j k!/j! x^j / r^{k-j}
        let mut tail = 0.0;
        let mut coeff = 1.0; // k! / j! for j = k, k-1, ...
        for j in (0..=k).rev() {
            tail += coeff * x.powi(j as i32) / r.powi((k - j) as i32);
            coeff *= f64::from(j.max(1));
        }
        let busy = xk * (1.0 - survive) + survive * tail;
        (1.0 - self.p_busy) * xk + self.p_busy * busy
    }
}

/// Closed-form stationary law where one exists (M/M/1 and reflected BM).
pub fn stationary_law(model: &InputModel, mu: f64) -> Result<Option<ExpTailLaw>> {
    let c = spare_capacity(model, mu)?;
    let lambda = model.lambda();
    Ok(match model.kind() {
        InputKind::CompoundPoissonExp => Some(ExpTailLaw {
            p_busy: lambda / mu,
            rate: c / mu,
        }),
        InputKind::BrownianDrift { sigma2 } => Some(ExpTailLaw {
            p_busy: 1.0,
            rate: 2.0 * c / (lambda * sigma2),
        }),
        InputKind::CompoundPoissonPareto { .. } => None,
    })
}

/// Bound on `|Delta_T|` for a deterministic start, averaging the pairwise
/// bound over the exact stationary law. Unavailable for heavy-tailed input,
/// whose stationary workload has no finite third moment.
pub fn delta_bound(model: &InputModel, mu: f64, horizon: f64, init: &InitialState) -> Result<f64> {
    let horizon = positive("T", horizon)?;
    let x = match *init {
        InitialState::Deterministic(x) => non_negative("x", x)?,
        _ => {
            return Err(Error::UnsupportedAnalytics(
                "the remainder bound of a random start",
            ))
        }
    };
    let c = spare_capacity(model, mu)?;
    let law = stationary_law(model, mu)?.ok_or(Error::UnsupportedAnalytics(
        "the third stationary moment of heavy-tailed input",
    ))?;
    Ok(bound_from_moments(
        law.max_moment(x, 2),
        law.max_moment(x, 3),
        model,
        c,
        horizon,
    ))
}

pub fn correction_terms(
    model: &InputModel,
    mu: f64,
    horizon: f64,
    init: &InitialState,
) -> Result<CorrectionTerms> {
    let psi_t = psi_t(model, mu, horizon, init)?;
    let delta_bound = match delta_bound(model, mu, horizon, init) {
        Ok(b) => Some(b),
        Err(Error::UnsupportedAnalytics(_)) => None,
        Err(e) => return Err(e),
    };
    Ok(CorrectionTerms { psi_t, delta_bound })
}

/// `C_hat_T(mu) = C_inf(mu) + Psi_T(mu)`.
pub fn approx_cost(model: &InputModel, mu: f64, horizon: f64, init: &InitialState) -> Result<f64> {
    Ok(c_infinity(model, mu)? + psi_t(model, mu, horizon, init)?)
}

/// `Pi_hat_T(mu) = C_hat_T(mu) + alpha mu`.
pub fn approx_pi(
    model: &InputModel,
    mu: f64,
    alpha: f64,
    horizon: f64,
    init: &InitialState,
) -> Result<f64> {
    let alpha = positive("alpha", alpha)?;
    Ok(approx_cost(model, mu, horizon, init)? + alpha * mu)
}

/// First-order `1/T` coefficient of the finite-horizon optimal speed.
pub fn mu_bullet(model: &InputModel, alpha: f64, init: &InitialState) -> Result<f64> {
    let alpha = positive("alpha", alpha)?;
    let q0_sq = init.second_moment()?;
    let lambda = model.lambda();
    let m = model.moments();
    let lu2 = lambda * m.u2;
    Ok(q0_sq / (8.0 * lu2 * alpha).sqrt() - m.u3 / (3.0 * m.u2) - 3.0 * (alpha * lu2 / 8.0).sqrt())
}

/// Corrected staffing rule `[mu*_inf + mu_bullet / T]^+`.
pub fn corrected_mu(
    model: &InputModel,
    alpha: f64,
    horizon: f64,
    init: &InitialState,
) -> Result<f64> {
    let horizon = positive("T", horizon)?;
    let base = mu_star_infinity(model, alpha)?;
    Ok((base + mu_bullet(model, alpha, init)? / horizon).max(0.0))
}

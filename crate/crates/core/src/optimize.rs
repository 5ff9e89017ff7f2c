//! Minimizers of the exact, approximate and stationary cost functions, and
//! the comparison of the stationary and corrected staffing rules.

use serde::Serialize;

use crate::correction::{approx_pi, corrected_mu, mu_bullet, InitialState};
use crate::error::{positive, Error, Result};
use crate::model::InputModel;
use crate::rbm::rbm_pi;
use crate::simulate::{CostEstimate, CrnObjective, SimConfig};
use crate::stationary::mu_star_infinity;

/// Grid cells per decade when scanning for the approximate minimizer.
const SCAN_PER_DECADE: usize = 40;
/// Slope tolerance of the approximate minimizer.
pub const SLOPE_TOL: f64 = 1e-10;
/// Golden-section tolerance in `mu` for the sample-average minimizer.
pub const SAA_MU_TOL: f64 = 1e-3;
/// Relative slack on second differences of a path-convex objective.
pub const CONVEXITY_REL_TOL: f64 = 1e-9;
const INV_PHI: f64 = 0.618_033_988_749_894_9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MinimizerResult {
    pub mu_star: f64,
    pub pi_star: f64,
    pub bracket: (f64, f64),
    pub evaluations: usize,
    /// `false` when the minimum sits on the edge of the search interval.
    pub interior: bool,
}

/// Upper end of every search interval, `mu*_inf + 10/sqrt(alpha)`.
pub fn search_upper(model: &InputModel, alpha: f64) -> Result<f64> {
    Ok(mu_star_infinity(model, alpha)? + 10.0 / alpha.sqrt())
}

/// Coefficients of `c^4 dPi_hat/dmu` as a polynomial in `c = mu - lambda`:
/// `alpha c^4 - p c^2 + q c + r`.
#[derive(Debug, Clone, Copy)]
struct Slope {
    alpha: f64,
    p: f64,
    q: f64,
    r: f64,
}

impl Slope {
    fn new(model: &InputModel, alpha: f64, horizon: f64, init: &InitialState) -> Result<Self> {
        let q0_sq = init.second_moment()?;
        let lambda = model.lambda();
        let m = model.moments();
        let lu2 = lambda * m.u2;
        Ok(Self {
            alpha,
            p: 0.5 * lu2 + q0_sq / (2.0 * horizon),
            q: lambda * m.u3 / (3.0 * horizon),
            r: 0.75 * lu2 * lu2 / horizon,
        })
    }

    fn at(&self, c: f64) -> f64 {
        let c2 = c * c;
        self.alpha - self.p / c2 + self.q / (c2 * c) + self.r / (c2 * c2)
    }
}

/// `d Pi_hat_T / d mu`.
pub fn pi_hat_slope(
    model: &InputModel,
    mu: f64,
    alpha: f64,
    horizon: f64,
    init: &InitialState,
) -> Result<f64> {
    let alpha = positive("alpha", alpha)?;
    let horizon = positive("T", horizon)?;
    let c = crate::stationary::spare_capacity(model, mu)?;
    Ok(Slope::new(model, alpha, horizon, init)?.at(c))
}

/// Minimizes `Pi_hat_T` over `(lambda (1 + 1e-6), mu*_inf + 10/sqrt(alpha)]`.
///
/// `Pi_hat_T` tends to minus infinity as `mu` decreases to `lambda`, so the
/// relevant minimizer is the largest local minimum. The slope is scanned on a
/// geometric grid in `mu - lambda` from the top down; the first sign change
/// from negative (below) to positive (above) is refined by bisection. Without
/// such a change the lower or upper edge is returned with `interior = false`.
pub fn minimize_pi_hat(
    model: &InputModel,
    alpha: f64,
    horizon: f64,
    init: &InitialState,
) -> Result<MinimizerResult> {
    let alpha = positive("alpha", alpha)?;
    let horizon = positive("T", horizon)?;
    let lambda = model.lambda();
    let slope = Slope::new(model, alpha, horizon, init)?;
    let c_hi = search_upper(model, alpha)? - lambda;
    let c_lo = 1e-6 * lambda;
    let mut evaluations = 0;
    let mut eval = |c: f64| {
        evaluations += 1;
        slope.at(c)
    };
    let edge = |c: f64, evaluations: usize| -> Result<MinimizerResult> {
        let mu = lambda + c;
        Ok(MinimizerResult {
            mu_star: mu,
            pi_star: approx_pi(model, mu, alpha, horizon, init)?,
            bracket: (mu, mu),
            evaluations,
            interior: false,
        })
    };

    if eval(c_hi) < 0.0 {
        return edge(c_hi, evaluations);
    }
    let cells = ((c_hi / c_lo).log10() * SCAN_PER_DECADE as f64).ceil() as usize;
    let ratio = (c_lo / c_hi).powf(1.0 / cells as f64);
    let mut upper = c_hi;
    let mut found = None;
    for i in 1..=cells {
        let lower = if i == cells {
            c_lo
        } else {
            c_hi * ratio.powi(i as i32)
        };
        if eval(lower) < 0.0 {
            found = Some((lower, upper));
            break;
        }
        upper = lower;
    }
    let Some((cell_lo, cell_hi)) = found else {
        return edge(c_lo, evaluations);
    };

    let (mut a, mut b) = (cell_lo, cell_hi);
    let mut c = 0.5 * (a + b);
    for _ in 0..200 {
        c = 0.5 * (a + b);
        let d = eval(c);
        if d.abs() < 0.01 * SLOPE_TOL || c <= a || c >= b {
            break;
        }
        if d < 0.0 {
            a = c;
        } else {
            b = c;
        }
    }
    let mu = lambda + c;
    Ok(MinimizerResult {
        mu_star: mu,
        pi_star: approx_pi(model, mu, alpha, horizon, init)?,
        bracket: (lambda + cell_lo, lambda + cell_hi),
        evaluations,
        interior: true,
    })
}

/// Second differences of `values` on an evenly spaced grid; errors if any is
/// below `-tol`.
pub fn check_convex(mus: &[f64], values: &[f64], tol: f64) -> Result<()> {
    for i in 1..values.len().saturating_sub(1) {
        let d2 = values[i - 1] - 2.0 * values[i] + values[i + 1];
        if d2 < -tol {
            return Err(Error::Convexity {
                mu: mus[i],
                value: d2,
            });
        }
    }
    Ok(())
}

/// Absolute slack for second differences of the sample-average objective.
pub fn convexity_tolerance(objective: &CrnObjective, brownian: bool, scale: f64) -> f64 {
    let base = CONVEXITY_REL_TOL * scale.abs().max(1.0);
    if brownian {
        base.max(5.0 * objective.step())
    } else {
        base
    }
}

/// Minimizes the sample-average `Pi_T` built from one fixed set of paths by
/// golden-section search over `[0, mu*_inf + 10/sqrt(alpha)]`.
///
/// A seven-point convexity check runs first; a violation means the paths
/// were not reused consistently and is reported as an error.
pub fn minimize_pi_t(
    model: &InputModel,
    alpha: f64,
    horizon: f64,
    init: &InitialState,
    cfg: &SimConfig,
) -> Result<MinimizerResult> {
    let objective = CrnObjective::new(model, alpha, horizon, init, cfg)?;
    minimize_objective(
        &objective,
        model.is_brownian(),
        0.0,
        search_upper(model, alpha)?,
    )
}

/// Golden-section minimization of a prepared sample-average objective.
pub fn minimize_objective(
    objective: &CrnObjective,
    brownian: bool,
    lo: f64,
    hi: f64,
) -> Result<MinimizerResult> {
    let mut evaluations = 0;
    let mut cache: Vec<(f64, f64)> = Vec::new();
    let mut eval = |mu: f64| -> Result<f64> {
        if let Some(&(_, v)) = cache.iter().find(|(m, _)| *m == mu) {
            return Ok(v);
        }
        evaluations += 1;
        let v = objective.cost(mu)?.mean;
        cache.push((mu, v));
        Ok(v)
    };

    let probe: Vec<f64> = (0..7).map(|i| lo + (hi - lo) * i as f64 / 6.0).collect();
    let values = probe.iter().map(|&m| eval(m)).collect::<Result<Vec<_>>>()?;
    let scale = values.iter().fold(0.0f64, |s, v| s.max(v.abs()));
    check_convex(
        &probe,
        &values,
        convexity_tolerance(objective, brownian, scale),
    )?;

    // Start from the probe cell around the best probe point.
    let best = (0..7)
        .min_by(|&i, &j| values[i].total_cmp(&values[j]))
        .expect("seven probes");
    let mut a = probe[best.saturating_sub(1)];
    let mut b = probe[(best + 1).min(6)];
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = eval(x1)?;
    let mut f2 = eval(x2)?;
    while b - a > SAA_MU_TOL {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = eval(x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = eval(x2)?;
        }
    }
    let fa = eval(a)?;
    let fb = eval(b)?;
    let (mut mu_star, mut pi_star) = (a, fa);
    for (m, v) in [(x1, f1), (x2, f2), (b, fb)] {
        if v < pi_star {
            mu_star = m;
            pi_star = v;
        }
    }
    Ok(MinimizerResult {
        mu_star,
        pi_star,
        bracket: (a, b),
        evaluations,
        interior: mu_star > lo && mu_star < hi,
    })
}

/// How true costs `Pi_T` are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Evaluator {
    /// Monte-Carlo with common random numbers across staffing levels.
    Simulation(SimConfig),
    /// Noise-free quadrature (Brownian input from a deterministic start only).
    Exact,
}

/// One row of a staffing comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StaffingComparison {
    pub alpha: f64,
    pub horizon: f64,
    pub mu_inf: f64,
    pub pi_at_mu_inf: CostEstimate,
    pub mu_tilde: f64,
    pub pi_at_mu_tilde: CostEstimate,
    /// `(Pi(mu_inf) - Pi(mu_tilde)) / Pi(mu_inf)`.
    pub rel_reduction: f64,
}

/// True cost `Pi_T(mu)` under `evaluator`.
pub fn evaluate_pi(
    model: &InputModel,
    mu: f64,
    alpha: f64,
    horizon: f64,
    init: &InitialState,
    evaluator: &Evaluator,
) -> Result<CostEstimate> {
    match evaluator {
        Evaluator::Simulation(cfg) => CrnObjective::new(model, alpha, horizon, init, cfg)?.cost(mu),
        Evaluator::Exact => {
            let InitialState::Deterministic(x) = *init else {
                return Err(Error::UnsupportedAnalytics(
                    "exact evaluation from a random start",
                ));
            };
            Ok(CostEstimate::exact(rbm_pi(model, mu, alpha, horizon, x)?))
        }
    }
}

/// Compares the stationary rule `mu*_inf` with the corrected rule.
pub fn compare_staffing(
    model: &InputModel,
    alpha: f64,
    horizon: f64,
    init: &InitialState,
    evaluator: &Evaluator,
) -> Result<StaffingComparison> {
    let mu_inf = mu_star_infinity(model, alpha)?;
    let mu_tilde = corrected_mu(model, alpha, horizon, init)?;
    let at_inf = evaluate_pi(model, mu_inf, alpha, horizon, init, evaluator)?;
    let at_tilde = evaluate_pi(model, mu_tilde, alpha, horizon, init, evaluator)?;
    Ok(StaffingComparison {
        alpha,
        horizon,
        mu_inf,
        pi_at_mu_inf: at_inf,
        mu_tilde,
        pi_at_mu_tilde: at_tilde,
        rel_reduction: (at_inf.mean - at_tilde.mean) / at_inf.mean,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GapPoint {
    pub horizon: f64,
    pub gap: f64,
    /// `gap * T^2`.
    pub scaled: f64,
}

/// `Pi_hat_T(mu*_inf) - min Pi_hat_T` for each horizon.
pub fn optimality_gap(
    model: &InputModel,
    alpha: f64,
    horizons: &[f64],
    init: &InitialState,
) -> Result<Vec<GapPoint>> {
    let mu_inf = mu_star_infinity(model, alpha)?;
    horizons
        .iter()
        .map(|&t| {
            let best = minimize_pi_hat(model, alpha, t, init)?;
            if !best.interior {
                return Err(Error::Numeric(format!(
                    "approximate cost has no interior minimum at T = {t}"
                )));
            }
            let gap = approx_pi(model, mu_inf, alpha, t, init)? - best.pi_star;
            if gap < -1e-12 {
                return Err(Error::Internal(format!(
                    "negative optimality gap {gap:e} at T = {t}"
                )));
            }
            let gap = gap.max(0.0);
            Ok(GapPoint {
                horizon: t,
                gap,
                scaled: gap * t * t,
            })
        })
        .collect()
}

/// `(mu_hat*_T - mu*_inf) T`, which tends to `mu_bullet` as `T` grows.
pub fn scaled_shift(
    model: &InputModel,
    alpha: f64,
    horizon: f64,
    init: &InitialState,
) -> Result<(f64, f64)> {
    let best = minimize_pi_hat(model, alpha, horizon, init)?;
    let shift = (best.mu_star - mu_star_infinity(model, alpha)?) * horizon;
    Ok((shift, mu_bullet(model, alpha, init)?))
}

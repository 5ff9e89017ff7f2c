//! Two workload paths fed by the same net input from ordered initial states.
//!
//! With `x >= y` the difference `Y = Q^x - Q^y` equals `x - y` until the lower
//! queue first empties, then decreases while only the upper queue is busy,
//! and is zero from the moment the upper queue empties onwards.

use rand_distr::{Distribution, Exp1, StandardNormal};
use serde::Serialize;

use super::path::{bridge_step, drain, Driver, Jumps};
use super::SimRng;
use crate::error::{non_negative, positive, Error, Result};
use crate::model::InputModel;
use crate::stationary::spare_capacity;

/// Absolute slack for the per-path staircase checks.
const STAIRCASE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoupledSummary {
    /// First emptying time of the queue started at `y`.
    pub tau_y: f64,
    /// First emptying time of the queue started at `x`.
    pub tau_x: f64,
    /// `integral_0^T Y dt`.
    pub integral_horizon: f64,
    /// `integral_0^infinity Y dt` (the integrand vanishes after `tau_x`).
    pub integral_total: f64,
    /// Whether the path satisfied every staircase property.
    pub staircase: bool,
    /// The upper queue did not empty before the safety cap.
    pub censored: bool,
}

/// Runs the coupled pair until the upper queue empties (or a cap of
/// `10^3 max(x, 1)/(mu - lambda)` time units passes). `step` is the grid step
/// for Brownian input and is ignored otherwise.
pub fn coupled_difference(
    model: &InputModel,
    mu: f64,
    horizon: f64,
    x: f64,
    y: f64,
    step: Option<f64>,
    rng: &mut SimRng,
) -> Result<CoupledSummary> {
    let horizon = positive("T", horizon)?;
    let x = non_negative("x", x)?;
    let y = non_negative("y", y)?;
    if x < y {
        return Err(Error::Parameter {
            name: "x",
            value: x,
            reason: "coupled pair needs x >= y",
        });
    }
    let c = spare_capacity(model, mu)?;
    let cap = 1e3 * x.max(1.0) / c;
    let mut run = Tracker::new(x, y);
    match Driver::new(model) {
        Driver::CompoundPoisson { lambda, jumps } => {
            run_cp(&mut run, lambda, &jumps, mu, horizon, cap, rng)
        }
        Driver::Brownian { lambda, s2 } => {
            let h = step.unwrap_or(1e-3);
            run_bm(&mut run, lambda, s2, mu, h, horizon, cap, rng)
        }
    }
    Ok(run.finish())
}

struct Tracker {
    gap: f64,
    qx: f64,
    qy: f64,
    t: f64,
    tau_y: Option<f64>,
    tau_x: Option<f64>,
    area_horizon: f64,
    area_total: f64,
    staircase: bool,
}

impl Tracker {
    fn new(x: f64, y: f64) -> Self {
        let mut s = Self {
            gap: x - y,
            qx: x,
            qy: y,
            t: 0.0,
            tau_y: None,
            tau_x: None,
            area_horizon: 0.0,
            area_total: 0.0,
            staircase: true,
        };
        if y <= 0.0 {
            s.tau_y = Some(0.0);
        }
        if x <= 0.0 {
            s.tau_x = Some(0.0);
        }
        s
    }

    fn diff(&self) -> f64 {
        self.qx - self.qy
    }

    /// Advances both queues to `t_end` given their new levels and the area of
    /// `Y` over the step; also checks the staircase shape at the endpoint.
    fn advance(&mut self, t_end: f64, qx: f64, qy: f64, area: f64, horizon: f64) {
        let before = self.diff();
        let after = qx - qy;
        let dt = t_end - self.t;
        self.area_total += area;
        if t_end <= horizon {
            self.area_horizon += area;
        } else if self.t < horizon {
            // Y is linear on every piece we integrate, so split proportionally
            // using the trapezoid through the two endpoints.
            let w = (horizon - self.t) / dt;
            let y_mid = before + (after - before) * w;
            self.area_horizon += 0.5 * (before + y_mid) * (horizon - self.t);
        }
        let tol = STAIRCASE_TOL * (1.0 + self.gap);
        if after > before + tol || after < -tol || after > self.gap + tol {
            self.staircase = false;
        }
        if self.tau_y.is_none() && (after - self.gap).abs() > tol && qy > 0.0 {
            // Y may only leave x - y once the lower queue has emptied.
            self.staircase = false;
        }
        self.qx = qx;
        self.qy = qy;
        self.t = t_end;
    }

    fn finish(self) -> CoupledSummary {
        let censored = self.tau_x.is_none();
        let tau_x = self.tau_x.unwrap_or(self.t);
        let tau_y = self.tau_y.unwrap_or(tau_x);
        let staircase = self.staircase
            && tau_y <= tau_x
            && (censored || self.diff().abs() <= STAIRCASE_TOL * (1.0 + self.gap));
        CoupledSummary {
            tau_y,
            tau_x,
            integral_horizon: self.area_horizon,
            integral_total: self.area_total,
            staircase,
            censored,
        }
    }
}

fn run_cp(
    run: &mut Tracker,
    lambda: f64,
    jumps: &Jumps,
    mu: f64,
    horizon: f64,
    cap: f64,
    rng: &mut SimRng,
) {
    while run.tau_x.is_none() && run.t < cap {
        let gap: f64 = Exp1.sample(rng);
        let start = run.t;
        let dt = gap / lambda;
        let (qx0, qy0) = (run.qx, run.qy);
        // Y is linear between the emptying instants of the two queues and the
        // horizon, so cutting the interval there keeps every trapezoid exact.
        let mut cuts = [dt; 4];
        let mut n = 0;
        for cut in [
            (mu > 0.0).then(|| qy0 / mu),
            (mu > 0.0).then(|| qx0 / mu),
            Some(horizon - start),
        ]
        .into_iter()
        .flatten()
        {
            if cut > 0.0 && cut < dt {
                cuts[n] = cut;
                n += 1;
            }
        }
        cuts[..n].sort_by(f64::total_cmp);
        let mut prev = 0.0;
        for &cut in cuts[..=n].iter() {
            if cut <= prev {
                continue;
            }
            let (qx, _, _) = drain(qx0, mu, cut);
            let (qy, _, _) = drain(qy0, mu, cut);
            let area = 0.5 * (run.diff() + (qx - qy)) * (cut - prev);
            run.advance(start + cut, qx, qy, area, horizon);
            prev = cut;
        }
        let (_, _, hy) = drain(qy0, mu, dt);
        let (_, _, hx) = drain(qx0, mu, dt);
        if run.tau_y.is_none() {
            run.tau_y = hy.map(|h| start + h);
        }
        if let Some(h) = hx {
            run.tau_x = Some(start + h);
            break;
        }
        let b = jumps.sample(rng);
        run.qx += b;
        run.qy += b;
    }
}

#[allow(clippy::too_many_arguments)]
fn run_bm(
    run: &mut Tracker,
    lambda: f64,
    s2: f64,
    mu: f64,
    h: f64,
    horizon: f64,
    cap: f64,
    rng: &mut SimRng,
) {
    while run.tau_x.is_none() && run.t < cap {
        let z: f64 = StandardNormal.sample(rng);
        let e: f64 = Exp1.sample(rng);
        let (qx, tx) = bridge_step(run.qx, lambda, s2, mu, h, z, e);
        let (qy, ty) = bridge_step(run.qy, lambda, s2, mu, h, z, e);
        let t_end = run.t + h;
        if ty && run.tau_y.is_none() {
            run.tau_y = Some(t_end);
        }
        if tx {
            run.tau_x = Some(t_end);
        }
        let area = 0.5 * ((run.qx - run.qy) + (qx - qy)) * h;
        run.advance(t_end, qx, qy, area, horizon);
    }
}

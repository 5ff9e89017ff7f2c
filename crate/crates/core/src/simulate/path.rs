//! Single workload paths.
//!
//! Compound-Poisson input is simulated event by event: between arrivals the
//! workload drains linearly at speed `mu` and is absorbed at zero, so the
//! area under the path is accumulated in closed form.
//!
//! Brownian input is advanced on a time grid. Each step draws the net-input
//! increment together with the minimum of the Brownian bridge joining its
//! endpoints, which makes the reflected value at every grid point exact in
//! law. The area is the trapezoid sum over grid points.

use rand::Rng;
use rand_distr::{Distribution, Exp1, Pareto, StandardNormal};
use serde::Serialize;

use crate::correction::InitialState;
use crate::model::{InputKind, InputModel};

/// Summary of one path on `[0, T]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PathSummary {
    /// `integral_0^T Q(t) dt`.
    pub integral_q: f64,
    pub final_q: f64,
    /// First `t` with `Q(t) = 0`, if it happens before `T`. For Brownian input
    /// this is the end of the first grid step on which the path touches zero.
    pub first_empty_time: Option<f64>,
}

/// Jump-size law of a compound-Poisson input.
#[derive(Debug, Clone, Copy)]
pub(crate) enum Jumps {
    Exp,
    Pareto(Pareto<f64>),
}

impl Jumps {
    #[inline]
    pub(crate) fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Jumps::Exp => Exp1.sample(rng),
            Jumps::Pareto(p) => p.sample(rng),
        }
    }
}

/// Sampling view of an [`InputModel`].
#[derive(Debug, Clone, Copy)]
pub(crate) enum Driver {
    CompoundPoisson { lambda: f64, jumps: Jumps },
    Brownian { lambda: f64, s2: f64 },
}

impl Driver {
    pub(crate) fn new(model: &InputModel) -> Self {
        let lambda = model.lambda();
        match model.kind() {
            InputKind::CompoundPoissonExp => Driver::CompoundPoisson {
                lambda,
                jumps: Jumps::Exp,
            },
            InputKind::CompoundPoissonPareto { shape, scale } => Driver::CompoundPoisson {
                lambda,
                jumps: Jumps::Pareto(
                    Pareto::new(scale, shape).expect("validated Pareto parameters"),
                ),
            },
            InputKind::BrownianDrift { sigma2 } => Driver::Brownian {
                lambda,
                s2: lambda * sigma2,
            },
        }
    }
}

/// Area of a workload that starts at `q` and drains at `mu` for `dt`, and the
/// time within `dt` at which it empties (if it does).
#[inline]
pub(crate) fn drain(q: f64, mu: f64, dt: f64) -> (f64, f64, Option<f64>) {
    let capacity = mu * dt;
    if q > capacity {
        (q - capacity, (q - 0.5 * capacity) * dt, None)
    } else {
        let hit = if mu > 0.0 { q / mu } else { 0.0 };
        (0.0, 0.5 * q * hit, Some(hit))
    }
}

/// One exact step of the reflected Brownian recursion. `z` and `e` are a
/// standard normal and a standard exponential; returns the new workload and
/// whether the path touched zero inside the step.
#[inline]
pub(crate) fn bridge_step(
    q: f64,
    lambda: f64,
    s2: f64,
    mu: f64,
    dt: f64,
    z: f64,
    e: f64,
) -> (f64, bool) {
    let b = (lambda - mu) * dt + (s2 * dt).sqrt() * z;
    // Minimum of the Brownian bridge from 0 to b over the step.
    let low = 0.5 * (b - (b * b + 2.0 * s2 * dt * e).sqrt());
    (b + q.max(-low), q + low <= 0.0)
}

pub(crate) fn default_step(horizon: f64) -> f64 {
    1e-3 * horizon.min(1.0)
}

/// Draws `Q(0)`, running an auxiliary path for warm-up starts.
pub(crate) fn sample_initial<R: Rng + ?Sized>(
    driver: &Driver,
    mu: f64,
    init: &InitialState,
    step: Option<f64>,
    rng: &mut R,
) -> f64 {
    match *init {
        InitialState::Deterministic(x) => x,
        InitialState::ExponentialMean(m) => {
            let e: f64 = Exp1.sample(rng);
            m * e
        }
        InitialState::Warmup { burn_in } => {
            let h = step.unwrap_or_else(|| default_step(burn_in));
            walk(driver, mu, burn_in, 0.0, h, &[], &mut [], rng).final_q
        }
    }
}

/// Walks one path from `q0` over `[0, horizon]`, writing `Q(grid[i])` into
/// `out[i]`. `grid` must be sorted and lie in `[0, horizon]`.
#[allow(clippy::too_many_arguments)]
pub(crate) fn walk<R: Rng + ?Sized>(
    driver: &Driver,
    mu: f64,
    horizon: f64,
    q0: f64,
    step: f64,
    grid: &[f64],
    out: &mut [f64],
    rng: &mut R,
) -> PathSummary {
    debug_assert_eq!(grid.len(), out.len());
    match *driver {
        Driver::CompoundPoisson { lambda, jumps } => {
            walk_cp(lambda, &jumps, mu, horizon, q0, grid, out, rng)
        }
        Driver::Brownian { lambda, s2 } => {
            walk_bm(lambda, s2, mu, horizon, q0, step, grid, out, rng)
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn walk_cp<R: Rng + ?Sized>(
    lambda: f64,
    jumps: &Jumps,
    mu: f64,
    horizon: f64,
    q0: f64,
    grid: &[f64],
    out: &mut [f64],
    rng: &mut R,
) -> PathSummary {
    let mut t = 0.0;
    let mut q = q0;
    let mut area = 0.0;
    let mut first_empty = (q0 <= 0.0).then_some(0.0);
    let mut next_grid = 0;
    loop {
        let gap: f64 = Exp1.sample(rng);
        let arrival = t + gap / lambda;
        let end = arrival.min(horizon);
        while next_grid < grid.len() && grid[next_grid] <= end {
            out[next_grid] = (q - mu * (grid[next_grid] - t)).max(0.0);
            next_grid += 1;
        }
        let (q_end, piece, hit) = drain(q, mu, end - t);
        area += piece;
        if first_empty.is_none() {
            first_empty = hit.map(|h| t + h);
        }
        q = q_end;
        if arrival >= horizon {
            break;
        }
        t = arrival;
        q += jumps.sample(rng);
    }
    PathSummary {
        integral_q: area,
        final_q: q,
        first_empty_time: first_empty,
    }
}

#[allow(clippy::too_many_arguments)]
fn walk_bm<R: Rng + ?Sized>(
    lambda: f64,
    s2: f64,
    mu: f64,
    horizon: f64,
    q0: f64,
    step: f64,
    grid: &[f64],
    out: &mut [f64],
    rng: &mut R,
) -> PathSummary {
    let mut t = 0.0;
    let mut q = q0;
    let mut area = 0.0;
    let mut first_empty = (q0 <= 0.0).then_some(0.0);
    let mut next_grid = 0;
    while next_grid < grid.len() && grid[next_grid] <= 0.0 {
        out[next_grid] = q0;
        next_grid += 1;
    }
    // Segment boundaries are the grid points followed by the horizon, so
    // observations land exactly on step endpoints.
    let stops = grid[next_grid..]
        .iter()
        .copied()
        .chain(std::iter::once(horizon));
    for stop in stops {
        let span = stop - t;
        if span <= 0.0 {
            if next_grid < grid.len() {
                out[next_grid] = q;
                next_grid += 1;
            }
            continue;
        }
        let n = (span / step).ceil().max(1.0) as usize;
        let dt = span / n as f64;
        for i in 0..n {
            let z: f64 = StandardNormal.sample(rng);
            let e: f64 = Exp1.sample(rng);
            let (q_new, touched) = bridge_step(q, lambda, s2, mu, dt, z, e);
            area += 0.5 * (q + q_new) * dt;
            q = q_new;
            if touched && first_empty.is_none() {
                first_empty = Some(t + (i + 1) as f64 * dt);
            }
        }
        t = stop;
        if next_grid < grid.len() {
            out[next_grid] = q;
            next_grid += 1;
        }
    }
    PathSummary {
        integral_q: area,
        final_q: q,
        first_empty_time: first_empty.map(|s| s.min(horizon)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulate::rng::stream;

    #[test]
    fn drain_triangle_and_trapezoid() {
        // x = 1, mu = 1, no arrivals over T = 2: triangle of area 1/2, empty at 1.
        let (q, area, hit) = drain(1.0, 1.0, 2.0);
        assert_eq!((q, area, hit), (0.0, 0.5, Some(1.0)));
        let (q, area, hit) = drain(3.0, 1.0, 2.0);
        assert_eq!((q, area, hit), (1.0, 4.0, None));
        // Empty stays empty.
        assert_eq!(drain(0.0, 2.0, 0.7), (0.0, 0.0, Some(0.0)));
        // Zero speed never drains.
        assert_eq!(drain(2.0, 0.0, 1.5), (2.0, 3.0, None));
    }

    #[test]
    fn empty_start_has_zero_area_until_first_jump() {
        let model = InputModel::mm1(1.0).unwrap();
        let driver = Driver::new(&model);
        let mut rng = stream(11, 0);
        let first_arrival: f64 = {
            let mut probe = stream(11, 0);
            let g: f64 = Exp1.sample(&mut probe);
            g
        };
        let h = 0.5 * first_arrival;
        let s = walk(&driver, 2.0, h, 0.0, 1.0, &[], &mut [], &mut rng);
        assert_eq!(s.integral_q, 0.0);
        assert_eq!(s.final_q, 0.0);
        assert_eq!(s.first_empty_time, Some(0.0));
    }

    #[test]
    fn grid_observations_match_final_value() {
        for model in [
            InputModel::mm1(1.0).unwrap(),
            InputModel::rbm(1.0, 1.0).unwrap(),
        ] {
            let driver = Driver::new(&model);
            let grid = [0.0, 0.5, 1.0, 2.0, 3.0];
            let mut out = [0.0; 5];
            let s = walk(
                &driver,
                1.5,
                3.0,
                2.0,
                0.01,
                &grid,
                &mut out,
                &mut stream(3, 9),
            );
            assert_eq!(out[0], 2.0);
            assert_eq!(out[4], s.final_q);
            assert!(out.iter().all(|&q| q >= 0.0));
        }
    }

    #[test]
    fn zero_speed_queue_only_grows() {
        let model = InputModel::mpareto_default(1.0).unwrap();
        let driver = Driver::new(&model);
        let grid: Vec<f64> = (0..=20).map(|i| i as f64 * 0.5).collect();
        let mut out = vec![0.0; grid.len()];
        walk(
            &driver,
            0.0,
            10.0,
            1.0,
            1.0,
            &grid,
            &mut out,
            &mut stream(5, 5),
        );
        assert!(out.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn bridge_step_is_monotone_in_speed() {
        let (a, _) = bridge_step(0.3, 1.0, 1.0, 1.0, 0.01, 0.4, 0.7);
        let (b, _) = bridge_step(0.3, 1.0, 1.0, 2.0, 0.01, 0.4, 0.7);
        assert!(b <= a);
        let (c, touched) = bridge_step(0.0, 1.0, 1.0, 2.0, 0.01, 0.4, 0.7);
        assert!(c >= 0.0 && touched);
    }
}

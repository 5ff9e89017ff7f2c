//! Monte-Carlo estimation of finite-horizon congestion costs.
//!
//! Every replication owns a counter-based random stream keyed by
//! `(master_seed, replication)`. Replications are grouped into fixed-size
//! blocks, each block is reduced sequentially and the blocks are merged in
//! index order, so estimates are bit-identical for any worker count.

mod coupled;
mod passage;
mod path;
pub mod rng;
mod saa;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::correction::InitialState;
use crate::error::{positive, Error, Result};
use crate::model::InputModel;
use crate::stats::{normal_critical, MeanVar};

pub use coupled::{coupled_difference, CoupledSummary};
pub use passage::{first_passage_moments, sample_first_passage, FirstPassage, PassageEstimate};
pub use path::PathSummary;
pub use rng::{stream, SimRng};
pub use saa::CrnObjective;

use path::{default_step, sample_initial, walk, Driver};

const BLOCK: u64 = 256;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub replications: u64,
    pub master_seed: u64,
    /// Grid step for Brownian input; `None` selects `1e-3 * min(1, T)`.
    #[serde(default)]
    pub bm_step: Option<f64>,
    #[serde(default = "default_ci_level")]
    pub ci_level: f64,
}

fn default_ci_level() -> f64 {
    0.95
}

impl SimConfig {
    pub fn new(replications: u64, master_seed: u64) -> Self {
        Self {
            replications,
            master_seed,
            bm_step: None,
            ci_level: default_ci_level(),
        }
    }

    pub fn with_step(mut self, h: f64) -> Self {
        self.bm_step = Some(h);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.replications < 2 {
            return Err(Error::Config(format!(
                "need at least 2 replications, got {}",
                self.replications
            )));
        }
        if let Some(h) = self.bm_step {
            if !(h.is_finite() && h > 0.0) {
                return Err(Error::Config(format!("Brownian step must be > 0, got {h}")));
            }
        }
        if !(self.ci_level > 0.0 && self.ci_level < 1.0) {
            return Err(Error::Config(format!(
                "confidence level must lie in (0, 1), got {}",
                self.ci_level
            )));
        }
        Ok(())
    }

    pub(crate) fn step_for(&self, horizon: f64) -> f64 {
        self.bm_step.unwrap_or_else(|| default_step(horizon))
    }
}

/// Monte-Carlo mean with a normal-approximation confidence half-width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CostEstimate {
    pub mean: f64,
    pub half_width: f64,
    pub std_error: f64,
    pub replications: u64,
    pub seed: u64,
}

impl CostEstimate {
    pub(crate) fn from_stats(stats: &MeanVar, cfg: &SimConfig) -> Self {
        let std_error = stats.std_error();
        Self {
            mean: stats.mean,
            half_width: normal_critical(cfg.ci_level) * std_error,
            std_error,
            replications: stats.count,
            seed: cfg.master_seed,
        }
    }

    /// A noise-free value (e.g. from deterministic numerical integration).
    pub fn exact(mean: f64) -> Self {
        Self {
            mean,
            half_width: 0.0,
            std_error: 0.0,
            replications: 0,
            seed: 0,
        }
    }

    /// Same estimate shifted by a constant, e.g. the staffing cost `alpha mu`.
    pub fn shifted(self, by: f64) -> Self {
        Self {
            mean: self.mean + by,
            ..self
        }
    }
}

/// Runs `per_replication` for every replication index and reduces the
/// results block-wise in fixed order.
pub(crate) fn reduce_replications<F>(cfg: &SimConfig, per_replication: F) -> MeanVar
where
    F: Fn(&mut SimRng) -> f64 + Sync,
{
    reduce_vectors(cfg, 1, |rng, out| out[0] = per_replication(rng))
        .pop()
        .expect("one statistic")
}

/// Vector-valued variant: `per_replication` fills `width` values per path.
pub(crate) fn reduce_vectors<F>(cfg: &SimConfig, width: usize, per_replication: F) -> Vec<MeanVar>
where
    F: Fn(&mut SimRng, &mut [f64]) + Sync,
{
    let n = cfg.replications;
    let blocks = n.div_ceil(BLOCK);
    let partial: Vec<Vec<MeanVar>> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut acc = vec![MeanVar::default(); width];
            let mut buf = vec![0.0; width];
            for i in b * BLOCK..((b + 1) * BLOCK).min(n) {
                let mut rng = stream(cfg.master_seed, i);
                per_replication(&mut rng, &mut buf);
                for (a, &v) in acc.iter_mut().zip(&buf) {
                    a.push(v);
                }
            }
            acc
        })
        .collect();
    let mut total = vec![MeanVar::default(); width];
    for block in &partial {
        for (t, p) in total.iter_mut().zip(block) {
            t.merge(p);
        }
    }
    total
}

/// Simulates one path. `mu = 0` is allowed: the queue then only grows.
pub fn simulate_path(
    model: &InputModel,
    mu: f64,
    horizon: f64,
    init: &InitialState,
    step: Option<f64>,
    rng: &mut SimRng,
) -> Result<PathSummary> {
    let horizon = positive("T", horizon)?;
    check_speed(mu)?;
    init.validate()?;
    let driver = Driver::new(model);
    let h = step.unwrap_or_else(|| default_step(horizon));
    let q0 = sample_initial(&driver, mu, init, step, rng);
    Ok(walk(&driver, mu, horizon, q0, h, &[], &mut [], rng))
}

pub(crate) fn check_speed(mu: f64) -> Result<f64> {
    if mu.is_finite() && mu >= 0.0 {
        Ok(mu)
    } else {
        Err(Error::Parameter {
            name: "mu",
            value: mu,
            reason: "server speed must be finite and >= 0",
        })
    }
}

/// Estimates `C_T(mu) = (1/T) integral_0^T E[Q(t)] dt`.
pub fn estimate_ct(
    model: &InputModel,
    mu: f64,
    horizon: f64,
    init: &InitialState,
    cfg: &SimConfig,
) -> Result<CostEstimate> {
    let horizon = positive("T", horizon)?;
    check_speed(mu)?;
    init.validate()?;
    cfg.validate()?;
    let driver = Driver::new(model);
    let h = cfg.step_for(horizon);
    let stats = reduce_replications(cfg, |rng| {
        let q0 = sample_initial(&driver, mu, init, cfg.bm_step, rng);
        walk(&driver, mu, horizon, q0, h, &[], &mut [], rng).integral_q / horizon
    });
    Ok(CostEstimate::from_stats(&stats, cfg))
}

/// Estimates `Pi_T(mu) = C_T(mu) + alpha mu`.
pub fn estimate_pi(
    model: &InputModel,
    mu: f64,
    alpha: f64,
    horizon: f64,
    init: &InitialState,
    cfg: &SimConfig,
) -> Result<CostEstimate> {
    let alpha = positive("alpha", alpha)?;
    Ok(estimate_ct(model, mu, horizon, init, cfg)?.shifted(alpha * mu))
}

/// Estimates `E[Q(t)]` at every point of `t_grid` from common replications.
pub fn transient_mean_curve(
    model: &InputModel,
    mu: f64,
    t_grid: &[f64],
    init: &InitialState,
    cfg: &SimConfig,
) -> Result<Vec<CostEstimate>> {
    check_speed(mu)?;
    init.validate()?;
    cfg.validate()?;
    if t_grid.is_empty() {
        return Ok(Vec::new());
    }
    if t_grid.iter().any(|t| !(t.is_finite() && *t >= 0.0))
        || t_grid.windows(2).any(|w| w[1] < w[0])
    {
        return Err(Error::Config(
            "time grid must be sorted and non-negative".into(),
        ));
    }
    let horizon = *t_grid.last().expect("non-empty");
    let driver = Driver::new(model);
    let h = cfg.step_for(horizon.max(f64::MIN_POSITIVE));
    let stats = reduce_vectors(cfg, t_grid.len(), |rng, out| {
        let q0 = sample_initial(&driver, mu, init, cfg.bm_step, rng);
        if horizon > 0.0 {
            walk(&driver, mu, horizon, q0, h, t_grid, out, rng);
        } else {
            out.fill(q0);
        }
    });
    Ok(stats
        .iter()
        .map(|s| CostEstimate::from_stats(s, cfg))
        .collect())
}

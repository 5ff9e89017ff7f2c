//! Sample-average objective with common random numbers.
//!
//! Replication `i` always reads stream `i`, and a path consumes the same
//! draws whatever the server speed, so every evaluation reuses one fixed set
//! of input paths. The resulting objective is a deterministic function of
//! `mu`, convex because each path cost is.

use super::path::{sample_initial, walk, Driver};
use super::{check_speed, reduce_replications, CostEstimate, SimConfig};
use crate::correction::InitialState;
use crate::error::{positive, Result};
use crate::model::InputModel;

#[derive(Debug, Clone)]
pub struct CrnObjective {
    driver: Driver,
    alpha: f64,
    horizon: f64,
    init: InitialState,
    cfg: SimConfig,
    step: f64,
}

impl CrnObjective {
    pub fn new(
        model: &InputModel,
        alpha: f64,
        horizon: f64,
        init: &InitialState,
        cfg: &SimConfig,
    ) -> Result<Self> {
        let alpha = positive("alpha", alpha)?;
        let horizon = positive("T", horizon)?;
        init.validate()?;
        cfg.validate()?;
        Ok(Self {
            driver: Driver::new(model),
            alpha,
            horizon,
            init: *init,
            cfg: *cfg,
            step: cfg.step_for(horizon),
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Brownian grid step (meaningless for compound-Poisson input).
    pub fn step(&self) -> f64 {
        self.step
    }

    /// Sample average of `(1/T) integral_0^T Q dt` at speed `mu`.
    pub fn congestion(&self, mu: f64) -> Result<CostEstimate> {
        check_speed(mu)?;
        let stats = reduce_replications(&self.cfg, |rng| {
            let q0 = sample_initial(&self.driver, mu, &self.init, self.cfg.bm_step, rng);
            walk(
                &self.driver,
                mu,
                self.horizon,
                q0,
                self.step,
                &[],
                &mut [],
                rng,
            )
            .integral_q
                / self.horizon
        });
        Ok(CostEstimate::from_stats(&stats, &self.cfg))
    }

    /// Sample average of `Pi_T(mu)`.
    pub fn cost(&self, mu: f64) -> Result<CostEstimate> {
        Ok(self.congestion(mu)?.shifted(self.alpha * mu))
    }
}

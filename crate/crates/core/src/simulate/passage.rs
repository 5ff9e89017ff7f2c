//! First emptying times `tau^x(0)`.

use rand_distr::{Distribution, Exp1, InverseGaussian};
use serde::Serialize;

use super::path::{Driver, Jumps};
use super::{reduce_vectors, SimConfig, SimRng};
use crate::error::{non_negative, positive, Error, Result};
use crate::model::InputModel;
use crate::stationary::spare_capacity;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum FirstPassage {
    Hit(f64),
    /// The path had not emptied by the cap.
    Censored(f64),
}

impl FirstPassage {
    /// The passage time, or the cap for censored samples.
    pub fn value(self) -> f64 {
        match self {
            FirstPassage::Hit(t) | FirstPassage::Censored(t) => t,
        }
    }
}

/// Samples the first time the workload started at `x` reaches zero.
///
/// Compound-Poisson paths are walked jump by jump and the crossing instant of
/// the linear drain is exact. For Brownian input the passage time of a
/// drifted Brownian motion is inverse Gaussian with mean `x/c` and shape
/// `x^2/(lambda sigma^2)`, sampled directly. `cap` defaults to
/// `10^3 x/(mu - lambda)`.
pub fn sample_first_passage(
    model: &InputModel,
    mu: f64,
    x: f64,
    cap: Option<f64>,
    rng: &mut SimRng,
) -> Result<FirstPassage> {
    let x = non_negative("x", x)?;
    let c = spare_capacity(model, mu)?;
    if x == 0.0 {
        return Ok(FirstPassage::Hit(0.0));
    }
    let cap = match cap {
        Some(v) => positive("cap", v)?,
        None => 1e3 * x / c,
    };
    let t = match Driver::new(model) {
        Driver::CompoundPoisson { lambda, jumps } => {
            return Ok(passage_cp(lambda, &jumps, mu, x, cap, rng))
        }
        Driver::Brownian { s2, .. } => {
            let ig = InverseGaussian::new(x / c, x * x / s2)
                .map_err(|e| Error::Internal(format!("inverse Gaussian parameters: {e}")))?;
            ig.sample(rng)
        }
    };
    Ok(if t > cap {
        FirstPassage::Censored(cap)
    } else {
        FirstPassage::Hit(t)
    })
}

fn passage_cp(
    lambda: f64,
    jumps: &Jumps,
    mu: f64,
    x: f64,
    cap: f64,
    rng: &mut SimRng,
) -> FirstPassage {
    let mut t = 0.0;
    let mut q = x;
    loop {
        let gap: f64 = Exp1.sample(rng);
        let dt = gap / lambda;
        if q <= mu * dt {
            let hit = t + q / mu;
            return if hit > cap {
                FirstPassage::Censored(cap)
            } else {
                FirstPassage::Hit(hit)
            };
        }
        t += dt;
        if t > cap {
            return FirstPassage::Censored(cap);
        }
        q += jumps.sample(rng) - mu * dt;
    }
}

/// Sample moments of the first emptying time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PassageEstimate {
    pub mean: f64,
    pub mean_std_error: f64,
    pub second_moment: f64,
    pub second_moment_std_error: f64,
    /// Fraction of samples stopped at the cap; they enter the moments at the
    /// cap value, so the estimates are biased low when this is non-zero.
    pub censored_fraction: f64,
    pub samples: u64,
}

pub fn first_passage_moments(
    model: &InputModel,
    mu: f64,
    x: f64,
    cap: Option<f64>,
    cfg: &SimConfig,
) -> Result<PassageEstimate> {
    cfg.validate()?;
    // Surface parameter errors once, before the parallel loop.
    sample_first_passage(
        model,
        mu,
        x,
        cap,
        &mut super::stream(cfg.master_seed, u64::MAX),
    )?;
    let stats = reduce_vectors(cfg, 3, |rng, out| {
        let s = sample_first_passage(model, mu, x, cap, rng).expect("parameters validated");
        let t = s.value();
        out[0] = t;
        out[1] = t * t;
        out[2] = matches!(s, FirstPassage::Censored(_)) as u8 as f64;
    });
    Ok(PassageEstimate {
        mean: stats[0].mean,
        mean_std_error: stats[0].std_error(),
        second_moment: stats[1].mean,
        second_moment_std_error: stats[1].std_error(),
        censored_fraction: stats[2].mean,
        samples: stats[0].count,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulate::stream;

    #[test]
    fn empty_start_hits_immediately() {
        let m = InputModel::mm1(1.0).unwrap();
        assert_eq!(
            sample_first_passage(&m, 2.0, 0.0, None, &mut stream(0, 0)).unwrap(),
            FirstPassage::Hit(0.0)
        );
    }

    #[test]
    fn passage_is_at_least_the_drain_time() {
        // Jumps only delay emptying, so tau >= x / mu.
        let m = InputModel::mpareto_default(1.0).unwrap();
        for i in 0..500 {
            let t = sample_first_passage(&m, 2.0, 3.0, None, &mut stream(5, i)).unwrap();
            assert!(t.value() >= 1.5 - 1e-12);
        }
    }

    #[test]
    fn cap_censors() {
        let m = InputModel::rbm(1.0, 1.0).unwrap();
        let t = sample_first_passage(&m, 1.01, 5.0, Some(1e-6), &mut stream(2, 0)).unwrap();
        assert_eq!(t, FirstPassage::Censored(1e-6));
        let est = first_passage_moments(&m, 1.01, 5.0, Some(1e-6), &SimConfig::new(64, 2)).unwrap();
        assert_eq!(est.censored_fraction, 1.0);
    }

    #[test]
    fn unstable_speed_is_rejected() {
        let m = InputModel::mm1(1.0).unwrap();
        assert!(sample_first_passage(&m, 1.0, 1.0, None, &mut stream(0, 0)).is_err());
        assert!(first_passage_moments(&m, 0.5, 1.0, None, &SimConfig::new(8, 0)).is_err());
    }
}

//! Lévy input processes driving the queue.
//!
//! The net input of a queue with server speed `mu` is `X(t) = U(lambda t) - mu t`,
//! where `U` is a spectrally positive Lévy process with `E[U(1)] = 1`. Three
//! concrete choices of `U` are supported:
//!
//! * unit-rate compound Poisson with `Exp(1)` jumps (the M/M/1 workload),
//! * unit-rate compound Poisson with unit-mean Pareto jumps (M/Pareto/1),
//! * Brownian motion with drift 1 and variance `sigma2` (reflected BM).

use serde::Serialize;

use crate::error::{positive, Error, Result};
use crate::quad;

const UNIT_MEAN_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InputKind {
    CompoundPoissonExp,
    CompoundPoissonPareto { shape: f64, scale: f64 },
    BrownianDrift { sigma2: f64 },
}

/// A validated input model. Construct through [`InputModel::mm1`],
/// [`InputModel::mpareto`] or [`InputModel::rbm`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InputModel {
    lambda: f64,
    kind: InputKind,
    #[serde(skip)]
    u3_scale: f64,
}

/// Second and third central moments of `U(1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Moments {
    pub u2: f64,
    pub u3: f64,
}

impl InputModel {
    pub fn mm1(lambda: f64) -> Result<Self> {
        Ok(Self {
            lambda: positive("lambda", lambda)?,
            kind: InputKind::CompoundPoissonExp,
            u3_scale: 1.0,
        })
    }

    pub fn mpareto(lambda: f64, shape: f64, scale: f64) -> Result<Self> {
        let lambda = positive("lambda", lambda)?;
        let shape = positive("pareto_shape", shape)?;
        let scale = positive("pareto_scale", scale)?;
        if shape <= 3.0 {
            return Err(Error::Moment { shape });
        }
        let mean = scale * shape / (shape - 1.0);
        if (mean - 1.0).abs() > UNIT_MEAN_TOL {
            return Err(Error::Normalization { mean });
        }
        Ok(Self {
            lambda,
            kind: InputKind::CompoundPoissonPareto { shape, scale },
            u3_scale: 1.0,
        })
    }

    /// The heavy-tailed configuration used throughout the experiments:
    /// shape 16/5, scale 11/16.
    pub fn mpareto_default(lambda: f64) -> Result<Self> {
        Self::mpareto(lambda, 16.0 / 5.0, 11.0 / 16.0)
    }

    pub fn rbm(lambda: f64, sigma2: f64) -> Result<Self> {
        Ok(Self {
            lambda: positive("lambda", lambda)?,
            kind: InputKind::BrownianDrift {
                sigma2: positive("sigma2", sigma2)?,
            },
            u3_scale: 1.0,
        })
    }

    /// Fault injection for validation runs: the analytic layer sees `u3`
    /// multiplied by `factor` while simulation keeps using the true input.
    pub fn with_perturbed_u3(mut self, factor: f64) -> Self {
        self.u3_scale = factor;
        self
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn kind(&self) -> InputKind {
        self.kind
    }

    pub fn is_brownian(&self) -> bool {
        matches!(self.kind, InputKind::BrownianDrift { .. })
    }

    /// Copy of this model with a different arrival intensity.
    pub fn with_lambda(&self, lambda: f64) -> Result<Self> {
        Ok(Self {
            lambda: positive("lambda", lambda)?,
            ..*self
        })
    }

    pub fn moments(&self) -> Moments {
        let (u2, u3) = match self.kind {
            InputKind::CompoundPoissonExp => (2.0, 6.0),
            InputKind::CompoundPoissonPareto { shape, scale } => (
                pareto_raw_moment(shape, scale, 2),
                pareto_raw_moment(shape, scale, 3),
            ),
            InputKind::BrownianDrift { sigma2 } => (sigma2, 0.0),
        };
        Moments {
            u2,
            u3: u3 * self.u3_scale,
        }
    }

    /// `kappa_U(theta) = log E[exp(theta U(1))]`.
    pub fn unit_exponent(&self, theta: f64) -> Result<f64> {
        if !theta.is_finite() {
            return Err(Error::Domain { theta });
        }
        match self.kind {
            InputKind::CompoundPoissonExp => {
                if theta >= 1.0 {
                    return Err(Error::Domain { theta });
                }
                Ok(theta / (1.0 - theta))
            }
            InputKind::CompoundPoissonPareto { shape, scale } => {
                if theta > 0.0 {
                    return Err(Error::Domain { theta });
                }
                pareto_mgf_minus_one(shape, scale, theta)
            }
            InputKind::BrownianDrift { sigma2 } => Ok(theta + 0.5 * sigma2 * theta * theta),
        }
    }

    /// Lévy exponent of the net input, `kappa_mu(theta) = lambda kappa_U(theta) - mu theta`.
    pub fn levy_exponent(&self, mu: f64, theta: f64) -> Result<f64> {
        Ok(self.lambda * self.unit_exponent(theta)? - mu * theta)
    }
}

fn pareto_raw_moment(shape: f64, scale: f64, n: i32) -> f64 {
    shape * scale.powi(n) / (shape - f64::from(n))
}

// E[exp(theta B)] - 1 for B ~ Pareto(scale, shape) and theta <= 0, after the
// substitution b = scale / u which maps the density onto shape * u^(shape-1) on (0, 1].
fn pareto_mgf_minus_one(shape: f64, scale: f64, theta: f64) -> Result<f64> {
    if theta == 0.0 {
        return Ok(0.0);
    }
    let integrand = |u: f64| (theta * scale / u).exp_m1() * shape * u.powf(shape - 1.0);
    let tol = 1e-15 * (theta * scale).abs().min(1.0);
    Ok(quad::integrate(integrand, 0.0, 1.0, &[], tol, 4000)?.value)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mm1_moments() {
        let m = InputModel::mm1(1.0).unwrap().moments();
        assert_eq!(m, Moments { u2: 2.0, u3: 6.0 });
        assert!(InputModel::mm1(10.0).is_ok());
        assert!(matches!(InputModel::mm1(0.0), Err(Error::Parameter { .. })));
        assert!(InputModel::mm1(-1.0).is_err());
    }

    #[test]
    fn pareto_moments_and_validation() {
        let m = InputModel::mpareto(1.0, 16.0 / 5.0, 11.0 / 16.0)
            .unwrap()
            .moments();
        assert!((m.u2 - 121.0 / 96.0).abs() < 1e-14);
        assert!((m.u3 - 1331.0 / 256.0).abs() < 1e-13);
        match InputModel::mpareto(1.0, 16.0 / 5.0, 0.5) {
            Err(Error::Normalization { mean }) => assert!((mean - 8.0 / 11.0).abs() < 1e-14),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            InputModel::mpareto(1.0, 2.5, 0.6),
            Err(Error::Moment { .. })
        ));
    }

    #[test]
    fn rbm_moments() {
        assert_eq!(
            InputModel::rbm(1.0, 1.0).unwrap().moments(),
            Moments { u2: 1.0, u3: 0.0 }
        );
        assert_eq!(InputModel::rbm(1.0, 4.0).unwrap().moments().u2, 4.0);
        assert!(InputModel::rbm(1.0, 0.0).is_err());
    }

    #[test]
    fn levy_exponent_values() {
        let mm1 = InputModel::mm1(1.0).unwrap();
        assert!((mm1.levy_exponent(2.0, -1.0).unwrap() - 1.5).abs() < 1e-15);
        assert!(matches!(
            mm1.levy_exponent(2.0, 1.0),
            Err(Error::Domain { .. })
        ));
        let par = InputModel::mpareto_default(1.0).unwrap();
        assert!(matches!(
            par.levy_exponent(2.0, 0.1),
            Err(Error::Domain { .. })
        ));
        for m in [mm1, par, InputModel::rbm(2.0, 3.0).unwrap()] {
            assert_eq!(m.levy_exponent(1.7, 0.0).unwrap(), 0.0);
        }
    }

    #[test]
    fn pareto_exponent_matches_closed_form_limit() {
        // As theta -> -inf, E[exp(theta B)] -> 0, so kappa_U -> -1.
        let par = InputModel::mpareto_default(1.0).unwrap();
        let k = par.unit_exponent(-200.0).unwrap();
        assert!((k + 1.0).abs() < 1e-12, "{k}");
    }

    #[test]
    fn perturbation_only_touches_u3() {
        let m = InputModel::mm1(1.0)
            .unwrap()
            .with_perturbed_u3(2.0)
            .moments();
        assert_eq!(m, Moments { u2: 2.0, u3: 12.0 });
    }
}

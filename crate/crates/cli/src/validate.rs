//! Property suite with measured tolerances. Every Monte-Carlo band is
//! `max(abs_tol, 3 standard errors)`, so fewer replications widen the bands.

use qstaff_core::optimize::{check_convex, convexity_tolerance, pi_hat_slope, search_upper};
use qstaff_core::simulate::stream;
use qstaff_core::stats::MeanVar;
use qstaff_core::{
    c_infinity, coupled_difference, delta_bound, estimate_ct, expected_passage_time,
    first_passage_moments, minimize_pi_hat, passage_time_second_moment, psi_t, rbm_ct,
    CrnObjective, Error, InitialState, InputModel, RbmSpec, SimConfig,
};

use crate::commands::{Outcome, RunOptions};
use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::output::{num, write_csv, Provenance};

const SLOPE_TOL: f64 = 1e-10;
const RBM_CROSS_TOL: f64 = 1e-2;
const RBM_CROSS_HORIZON: f64 = 2.0;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub tolerance: f64,
    pub status: CheckStatus,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CheckStatus {
    Pass,
    Fail,
    Skipped(String),
}

impl Check {
    fn within(name: String, measured: f64, tolerance: f64) -> Self {
        let status = if measured.abs() <= tolerance {
            CheckStatus::Pass
        } else {
            CheckStatus::Fail
        };
        Self {
            name,
            measured,
            tolerance,
            status,
        }
    }

    fn skipped(name: String, why: impl Into<String>) -> Self {
        Self {
            name,
            measured: f64::NAN,
            tolerance: f64::NAN,
            status: CheckStatus::Skipped(why.into()),
        }
    }

    pub fn line(&self) -> String {
        match &self.status {
            CheckStatus::Pass => format!(
                "PASS {}: |{:.3e}| <= {:.3e}",
                self.name, self.measured, self.tolerance
            ),
            CheckStatus::Fail => format!(
                "FAIL {}: |{:.3e}| > {:.3e}",
                self.name, self.measured, self.tolerance
            ),
            CheckStatus::Skipped(why) => format!("SKIP {}: {why}", self.name),
        }
    }
}

struct Suite<'a> {
    cfg: &'a ExperimentConfig,
    model: InputModel,
    mu: f64,
    sim: SimConfig,
}

impl Suite<'_> {
    fn band(&self, std_error: f64) -> f64 {
        self.cfg.validate.abs_tol.max(3.0 * std_error)
    }

    fn stationary_mean(&self) -> Result<Check, CliError> {
        let v = &self.cfg.validate;
        let est = estimate_ct(
            &self.model,
            self.mu,
            v.stationary_window,
            &InitialState::warmup(v.stationary_burn_in)?,
            &self.sim,
        )?;
        let target = c_infinity(&self.model, self.mu)?;
        Ok(Check::within(
            "stationary_mean".into(),
            est.mean - target,
            self.band(est.std_error),
        ))
    }

    fn psi(&self) -> Result<Vec<Check>, CliError> {
        let v = &self.cfg.validate;
        let c_inf = c_infinity(&self.model, self.mu)?;
        let mut out = Vec::new();
        for &t in &v.horizons {
            for &x in &v.starts {
                let name = format!("psi_t[T={},x={}]", num(t), num(x));
                let init = InitialState::deterministic(x)?;
                let bound = match delta_bound(&self.model, self.mu, t, &init) {
                    Ok(b) => b,
                    Err(Error::UnsupportedAnalytics(what)) => {
                        out.push(Check::skipped(
                            name,
                            format!("no remainder bound for {what}"),
                        ));
                        continue;
                    }
                    Err(e) => return Err(e.into()),
                };
                let (ct, se) = if self.model.is_brownian() {
                    (
                        rbm_ct(&RbmSpec::from_model(&self.model, self.mu, x)?, t)?,
                        0.0,
                    )
                } else {
                    let e = estimate_ct(&self.model, self.mu, t, &init, &self.sim)?;
                    (e.mean, e.std_error)
                };
                let remainder = ct - c_inf - psi_t(&self.model, self.mu, t, &init)?;
                out.push(Check::within(name, remainder, bound + self.band(se)));
            }
        }
        Ok(out)
    }

    fn coupling(&self) -> Result<Vec<Check>, CliError> {
        let x = self
            .cfg
            .validate
            .starts
            .iter()
            .cloned()
            .fold(0.0, f64::max)
            .max(1.0);
        let c = self.mu - self.model.lambda();
        let mut area = MeanVar::default();
        let mut broken = 0u64;
        for i in 0..self.sim.replications {
            let s = coupled_difference(
                &self.model,
                self.mu,
                1.0,
                x,
                0.0,
                Some(self.cfg.validate.bm_step),
                &mut stream(self.sim.master_seed, i),
            )?;
            broken += u64::from(!s.staircase || s.censored);
            area.push(s.integral_total);
        }
        Ok(vec![
            Check::within("coupling_staircase_violations".into(), broken as f64, 0.0),
            Check::within(
                format!("coupling_area[x={}]", num(x)),
                area.mean - x * x / (2.0 * c),
                self.band(area.std_error()),
            ),
        ])
    }

    fn passage(&self) -> Result<Vec<Check>, CliError> {
        let mut out = Vec::new();
        for &x in &self.cfg.validate.passage_starts {
            let est = first_passage_moments(&self.model, self.mu, x, None, &self.sim)?;
            let m = expected_passage_time(x, &self.model, self.mu)?;
            let s = passage_time_second_moment(x, &self.model, self.mu)?;
            out.push(Check::within(
                format!("passage_mean[x={}]", num(x)),
                est.mean - m,
                self.band(est.mean_std_error),
            ));
            out.push(Check::within(
                format!("passage_second_moment[x={}]", num(x)),
                est.second_moment - s,
                self.band(est.second_moment_std_error),
            ));
        }
        Ok(out)
    }

    fn rbm_cross(&self) -> Result<Vec<Check>, CliError> {
        let mut out = Vec::new();
        for &x in &self.cfg.validate.starts {
            let name = format!(
                "rbm_eval_vs_simulation[T={},x={}]",
                num(RBM_CROSS_HORIZON),
                num(x)
            );
            if !self.model.is_brownian() {
                out.push(Check::skipped(name, "compound-Poisson input"));
                continue;
            }
            let exact = rbm_ct(
                &RbmSpec::from_model(&self.model, self.mu, x)?,
                RBM_CROSS_HORIZON,
            )?;
            let est = estimate_ct(
                &self.model,
                self.mu,
                RBM_CROSS_HORIZON,
                &InitialState::deterministic(x)?,
                &self.sim,
            )?;
            out.push(Check::within(
                name,
                est.mean - exact,
                RBM_CROSS_TOL.max(3.0 * est.std_error),
            ));
        }
        Ok(out)
    }

    fn convexity(&self) -> Result<Check, CliError> {
        let v = &self.cfg.validate;
        let cfg = SimConfig {
            replications: v.convexity_replications,
            ..self.sim
        };
        let objective = CrnObjective::new(
            &self.model,
            1.0,
            v.convexity_horizon,
            &InitialState::empty(),
            &cfg,
        )?;
        let hi = search_upper(&self.model, 1.0)?;
        let n = v.convexity_points;
        let mus: Vec<f64> = (0..n).map(|i| hi * i as f64 / (n - 1) as f64).collect();
        let values = mus
            .iter()
            .map(|&m| objective.cost(m).map(|e| e.mean))
            .collect::<Result<Vec<_>, _>>()?;
        let scale = values.iter().fold(0.0f64, |s, v| s.max(v.abs()));
        let tol = convexity_tolerance(&objective, self.model.is_brownian(), scale);
        let worst = values
            .windows(3)
            .map(|w| w[0] - 2.0 * w[1] + w[2])
            .fold(f64::INFINITY, f64::min);
        let mut check = Check::within("saa_convexity".into(), worst.min(0.0), tol);
        if check_convex(&mus, &values, tol).is_err() {
            check.status = CheckStatus::Fail;
        }
        Ok(check)
    }

    fn first_order(&self) -> Result<Vec<Check>, CliError> {
        let mut out = Vec::new();
        for &t in &self.cfg.validate.horizons {
            let name = format!("pi_hat_first_order[T={}]", num(t));
            let r = minimize_pi_hat(&self.model, 1.0, t, &InitialState::empty())?;
            if r.interior {
                let slope = pi_hat_slope(&self.model, r.mu_star, 1.0, t, &InitialState::empty())?;
                out.push(Check::within(name, slope, SLOPE_TOL));
            } else {
                out.push(Check::skipped(name, "no interior minimum"));
            }
        }
        Ok(out)
    }

    fn determinism(&self) -> Result<Check, CliError> {
        let run = |threads: usize| -> Result<(u64, u64), CliError> {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .map_err(|e| CliError::Validation(format!("thread pool: {e}")))?;
            let cfg = SimConfig {
                replications: self.sim.replications.min(4_096),
                ..self.sim
            };
            let e = pool.install(|| {
                estimate_ct(
                    &self.model,
                    self.mu,
                    2.0,
                    &InitialState::deterministic(1.0)?,
                    &cfg,
                )
            })?;
            Ok((e.mean.to_bits(), e.half_width.to_bits()))
        };
        let differ = run(1)? != run(3)?;
        Ok(Check::within(
            "determinism_across_workers".into(),
            f64::from(u8::from(differ)),
            0.0,
        ))
    }
}

pub fn run_checks(cfg: &ExperimentConfig, perturb_u3: Option<f64>) -> Result<Vec<Check>, CliError> {
    let mut model = cfg.model.build()?;
    if let Some(f) = perturb_u3 {
        if !f.is_finite() {
            return Err(CliError::Config(format!(
                "--perturb-u3 must be finite, got {f}"
            )));
        }
        model = model.with_perturbed_u3(f);
    }
    let v = &cfg.validate;
    let suite = Suite {
        cfg,
        mu: v.load_factor * model.lambda(),
        model,
        sim: cfg
            .simulation
            .with_replications(v.replications)
            .with_step(v.bm_step),
    };
    let mut checks = vec![suite.stationary_mean()?];
    checks.extend(suite.psi()?);
    checks.extend(suite.coupling()?);
    checks.extend(suite.passage()?);
    checks.extend(suite.rbm_cross()?);
    checks.push(suite.convexity()?);
    checks.extend(suite.first_order()?);
    checks.push(suite.determinism()?);
    Ok(checks)
}

pub fn cmd_validate(
    cfg: &ExperimentConfig,
    opts: &RunOptions,
    perturb_u3: Option<f64>,
) -> Result<Outcome, CliError> {
    let checks = run_checks(cfg, perturb_u3)?;
    let mut out = Outcome::default();
    let rows: Vec<Vec<String>> = checks
        .iter()
        .map(|c| {
            let status = match &c.status {
                CheckStatus::Pass => "pass".to_string(),
                CheckStatus::Fail => "fail".to_string(),
                CheckStatus::Skipped(why) => format!("skipped: {why}"),
            };
            vec![c.name.clone(), num(c.measured), num(c.tolerance), status]
        })
        .collect();
    let prov = Provenance::new("validate", cfg);
    out.files.push(write_csv(
        &opts.out_dir,
        &format!("{}_validate.csv", cfg.name),
        &prov,
        &["check", "measured", "tolerance", "status"],
        &rows,
    )?);
    for c in &checks {
        out.messages.push(c.line());
        if c.status == CheckStatus::Fail {
            out.failures.push(c.name.clone());
        }
    }
    Ok(out)
}

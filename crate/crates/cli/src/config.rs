//! Experiment configuration: JSON in, validated core types out.

use std::path::{Path, PathBuf};

use qstaff_core::reference::ReferenceTable;
use qstaff_core::{benchmark_congestion, InitialState, InputModel, SimConfig};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub model: ModelSpec,
    pub scenarios: ScenarioGrid,
    pub simulation: SimSettings,
    #[serde(default)]
    pub evaluator: EvaluatorChoice,
    pub output_dir: PathBuf,
    /// Reference table used for the fixture diff, by name.
    #[serde(default)]
    pub fixture: Option<String>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub tables: TableSettings,
    #[serde(default)]
    pub curves: CurveSettings,
    #[serde(default)]
    pub figure1: Figure1Settings,
    #[serde(default)]
    pub gap: GapSettings,
    #[serde(default)]
    pub validate: ValidateSettings,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSpec {
    Mm1 { lambda: f64 },
    Mpareto { lambda: f64, shape: f64, scale: f64 },
    Rbm { lambda: f64, sigma2: f64 },
}

impl ModelSpec {
    pub fn build(&self) -> Result<InputModel, CliError> {
        let m = match *self {
            ModelSpec::Mm1 { lambda } => InputModel::mm1(lambda),
            ModelSpec::Mpareto {
                lambda,
                shape,
                scale,
            } => InputModel::mpareto(lambda, shape, scale),
            ModelSpec::Rbm { lambda, sigma2 } => InputModel::rbm(lambda, sigma2),
        };
        m.map_err(|e| CliError::Config(format!("model: {e}")))
    }
}

/// Initial state of a scenario. `BenchmarkMultiple(k)` starts at `k` times
/// the benchmark congestion of the scenario's `alpha`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StartSpec {
    Deterministic(f64),
    ExponentialMean(f64),
    Warmup(f64),
    BenchmarkMultiple(f64),
}

impl StartSpec {
    pub fn resolve(&self, model: &InputModel, alpha: f64) -> qstaff_core::Result<InitialState> {
        match *self {
            StartSpec::Deterministic(x) => InitialState::deterministic(x),
            StartSpec::ExponentialMean(m) => InitialState::exponential_mean(m),
            StartSpec::Warmup(b) => InitialState::warmup(b),
            StartSpec::BenchmarkMultiple(k) => {
                if !(k.is_finite() && k >= 0.0) {
                    return Err(qstaff_core::Error::Parameter {
                        name: "benchmark_multiple",
                        value: k,
                        reason: "must be finite and >= 0",
                    });
                }
                InitialState::deterministic(k * benchmark_congestion(model, alpha)?)
            }
        }
    }

    /// Short label for column and file names.
    pub fn label(&self) -> String {
        match *self {
            StartSpec::Deterministic(x) => format!("x{x}"),
            StartSpec::ExponentialMean(m) => format!("exp{m}"),
            StartSpec::Warmup(b) => format!("warmup{b}"),
            StartSpec::BenchmarkMultiple(k) => format!("bench{k}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioGrid {
    pub alphas: Vec<f64>,
    pub horizons: Vec<f64>,
    pub starts: Vec<StartSpec>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSettings {
    pub replications: u64,
    pub seed: u64,
    #[serde(default)]
    pub bm_step: Option<f64>,
    #[serde(default = "default_ci_level")]
    pub ci_level: f64,
}

fn default_ci_level() -> f64 {
    0.95
}

impl SimSettings {
    pub fn sim_config(&self) -> SimConfig {
        SimConfig {
            replications: self.replications,
            master_seed: self.seed,
            bm_step: self.bm_step,
            ci_level: self.ci_level,
        }
    }

    pub fn with_replications(&self, replications: u64) -> SimConfig {
        SimConfig {
            replications,
            ..self.sim_config()
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvaluatorChoice {
    /// Quadrature for Brownian input from deterministic starts, simulation otherwise.
    #[default]
    Auto,
    Simulation,
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Staffing levels must agree with the fixture to this absolute error.
    pub staffing_abs: f64,
    /// Floor for simulated cost cells; the band is `max(cost_abs, ci_multiplier * half_width)`.
    pub cost_abs: f64,
    /// Band for noise-free cost cells.
    pub exact_abs: f64,
    pub reduction_abs: f64,
    pub ci_multiplier: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            staffing_abs: 5e-4,
            cost_abs: 0.03,
            exact_abs: 5e-3,
            reduction_abs: 0.01,
            ci_multiplier: 3.0,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TableSettings {
    /// Adds the sample-average optimum `mu*_T` as extra columns.
    pub saa_column: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinearGrid {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl LinearGrid {
    pub fn values(&self) -> Vec<f64> {
        let n = self.points;
        if n == 1 {
            return vec![self.start];
        }
        (0..n)
            .map(|i| self.start + (self.stop - self.start) * i as f64 / (n - 1) as f64)
            .collect()
    }

    fn check(&self, what: &str) -> Result<(), CliError> {
        if self.points < 2
            || !(self.start.is_finite() && self.stop.is_finite())
            || self.stop <= self.start
        {
            return Err(CliError::Config(format!(
                "{what}: need points >= 2 and start < stop"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CurveSettings {
    pub alpha: f64,
    pub starts: Vec<f64>,
    pub horizons: Vec<f64>,
    pub mu_grid: LinearGrid,
    pub replications: u64,
}

impl Default for CurveSettings {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            starts: vec![0.0, 2.5],
            horizons: vec![2.0, 5.0, 10.0],
            mu_grid: LinearGrid {
                start: 0.5,
                stop: 4.0,
                points: 71,
            },
            replications: 20_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Figure1Settings {
    pub lambda: f64,
    pub mu: f64,
    pub starts: Vec<StartSpec>,
    pub t_max: f64,
    pub points: usize,
    pub replications: u64,
}

impl Default for Figure1Settings {
    fn default() -> Self {
        Self {
            lambda: 10.0,
            mu: 11.0,
            starts: vec![
                StartSpec::Deterministic(0.0),
                StartSpec::Deterministic(10.0),
                StartSpec::Deterministic(20.0),
                StartSpec::ExponentialMean(15.0),
            ],
            t_max: 50.0,
            points: 101,
            replications: 20_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GapSettings {
    pub alpha: f64,
    pub start: StartSpec,
    /// Geometric grid `t_min * ratio^k`, `k = 0..points`.
    pub t_min: f64,
    pub ratio: f64,
    pub points: usize,
}

impl Default for GapSettings {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            start: StartSpec::Deterministic(0.0),
            t_min: 10.0,
            ratio: 2.0,
            points: 6,
        }
    }
}

impl GapSettings {
    pub fn horizons(&self) -> Vec<f64> {
        (0..self.points)
            .map(|k| self.t_min * self.ratio.powi(k as i32))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ValidateSettings {
    pub replications: u64,
    /// Server speed as a multiple of `lambda`.
    pub load_factor: f64,
    pub horizons: Vec<f64>,
    pub starts: Vec<f64>,
    pub passage_starts: Vec<f64>,
    /// Floor of every Monte-Carlo band; the band is `max(abs_tol, 3 * std_error)`.
    pub abs_tol: f64,
    /// Grid step for Brownian paths in the validation runs.
    pub bm_step: f64,
    pub stationary_burn_in: f64,
    pub stationary_window: f64,
    pub convexity_points: usize,
    pub convexity_horizon: f64,
    pub convexity_replications: u64,
}

impl Default for ValidateSettings {
    fn default() -> Self {
        Self {
            replications: 200_000,
            load_factor: 2.0,
            horizons: vec![20.0, 40.0, 80.0],
            starts: vec![0.0, 2.5],
            passage_starts: vec![1.0, 3.0],
            abs_tol: 1e-3,
            bm_step: 1e-2,
            stationary_burn_in: 50.0,
            stationary_window: 50.0,
            convexity_points: 50,
            convexity_horizon: 5.0,
            convexity_replications: 2_000,
        }
    }
}

const PRESETS: [(&str, &str); 4] = [
    ("mm1", include_str!("../configs/mm1.json")),
    ("mpareto", include_str!("../configs/mpareto.json")),
    ("rbm_sigma1", include_str!("../configs/rbm_sigma1.json")),
    ("rbm_sigma2", include_str!("../configs/rbm_sigma2.json")),
];

pub fn preset_names() -> impl Iterator<Item = &'static str> {
    PRESETS.iter().map(|(n, _)| *n)
}

impl ExperimentConfig {
    pub fn preset(name: &str) -> Result<Self, CliError> {
        let (_, text) = PRESETS.iter().find(|(n, _)| *n == name).ok_or_else(|| {
            CliError::Config(format!(
                "unknown preset {name:?}; known: {}",
                preset_names().collect::<Vec<_>>().join(", ")
            ))
        })?;
        Self::from_json(text)
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// SHA-256 of the configuration with the output directory blanked, so
    /// moving the outputs does not change their provenance.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.output_dir = PathBuf::new();
        let digest = Sha256::digest(serde_json::to_vec(&c).expect("config serializes"));
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn fixture_table(&self) -> Result<Option<ReferenceTable>, CliError> {
        self.fixture
            .as_deref()
            .map(|n| {
                ReferenceTable::from_name(n)
                    .ok_or_else(|| CliError::Config(format!("unknown fixture {n:?}")))
            })
            .transpose()
    }

    /// Checks every referenced parameter before anything runs.
    pub fn validate(&self) -> Result<(), CliError> {
        let model = self.model.build()?;
        let cfg_err = |what: &str, e: qstaff_core::Error| CliError::Config(format!("{what}: {e}"));
        if self.name.is_empty() || self.name.contains(['/', '\\']) {
            return Err(CliError::Config(
                "name must be non-empty and contain no path separators".into(),
            ));
        }
        let g = &self.scenarios;
        if g.alphas.is_empty() || g.horizons.is_empty() || g.starts.is_empty() {
            return Err(CliError::Config(
                "scenario grid is empty (alphas, horizons and starts all need entries)".into(),
            ));
        }
        positive_list("scenarios.alphas", &g.alphas)?;
        positive_list("scenarios.horizons", &g.horizons)?;
        for &alpha in &g.alphas {
            for s in &g.starts {
                s.resolve(&model, alpha)
                    .map_err(|e| cfg_err("scenarios.starts", e))?;
            }
        }
        self.simulation
            .sim_config()
            .validate()
            .map_err(|e| cfg_err("simulation", e))?;
        if self.evaluator == EvaluatorChoice::Exact {
            if !model.is_brownian() {
                return Err(CliError::Config(
                    "the exact evaluator needs Brownian input".into(),
                ));
            }
            if g.starts
                .iter()
                .any(|s| matches!(s, StartSpec::ExponentialMean(_) | StartSpec::Warmup(_)))
            {
                return Err(CliError::Config(
                    "the exact evaluator needs deterministic starts".into(),
                ));
            }
        }
        self.fixture_table()?;
        let t = &self.tolerances;
        for (name, v) in [
            ("staffing_abs", t.staffing_abs),
            ("cost_abs", t.cost_abs),
            ("exact_abs", t.exact_abs),
            ("reduction_abs", t.reduction_abs),
            ("ci_multiplier", t.ci_multiplier),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(CliError::Config(format!(
                    "tolerances.{name} must be finite and >= 0"
                )));
            }
        }

        let c = &self.curves;
        positive_list("curves.alpha", &[c.alpha])?;
        non_negative_list("curves.starts", &c.starts)?;
        positive_list("curves.horizons", &c.horizons)?;
        c.mu_grid.check("curves.mu_grid")?;
        if c.mu_grid.start < 0.0 {
            return Err(CliError::Config(
                "curves.mu_grid must not contain negative speeds".into(),
            ));
        }
        self.simulation
            .with_replications(c.replications)
            .validate()
            .map_err(|e| cfg_err("curves", e))?;

        let f = &self.figure1;
        model
            .with_lambda(f.lambda)
            .map_err(|e| cfg_err("figure1.lambda", e))?;
        positive_list("figure1.mu", &[f.mu, f.t_max])?;
        if f.points < 2 || f.starts.is_empty() {
            return Err(CliError::Config(
                "figure1 needs points >= 2 and at least one start".into(),
            ));
        }
        for s in &f.starts {
            s.resolve(&model, 1.0)
                .map_err(|e| cfg_err("figure1.starts", e))?;
        }
        self.simulation
            .with_replications(f.replications)
            .validate()
            .map_err(|e| cfg_err("figure1", e))?;

        let gp = &self.gap;
        positive_list("gap", &[gp.alpha, gp.t_min])?;
        if gp.points == 0 || !(gp.ratio.is_finite() && gp.ratio > 1.0) {
            return Err(CliError::Config(
                "gap needs points >= 1 and ratio > 1".into(),
            ));
        }
        let gs = gp
            .start
            .resolve(&model, gp.alpha)
            .map_err(|e| cfg_err("gap.start", e))?;
        if !matches!(gs, InitialState::Deterministic(_)) {
            return Err(CliError::Config("gap.start must be deterministic".into()));
        }

        let v = &self.validate;
        if !(v.load_factor.is_finite() && v.load_factor > 1.0) {
            return Err(CliError::Config(
                "validate.load_factor must exceed 1".into(),
            ));
        }
        positive_list("validate.horizons", &v.horizons)?;
        non_negative_list("validate.starts", &v.starts)?;
        non_negative_list("validate.passage_starts", &v.passage_starts)?;
        if !(v.abs_tol.is_finite() && v.abs_tol >= 0.0) || v.convexity_points < 3 {
            return Err(CliError::Config(
                "validate needs abs_tol >= 0 and convexity_points >= 3".into(),
            ));
        }
        positive_list(
            "validate",
            &[
                v.bm_step,
                v.stationary_burn_in,
                v.stationary_window,
                v.convexity_horizon,
            ],
        )?;
        for reps in [v.replications, v.convexity_replications] {
            self.simulation
                .with_replications(reps)
                .validate()
                .map_err(|e| cfg_err("validate", e))?;
        }
        Ok(())
    }
}

fn positive_list(what: &str, xs: &[f64]) -> Result<(), CliError> {
    match xs.iter().find(|x| !(x.is_finite() && **x > 0.0)) {
        Some(x) => Err(CliError::Config(format!(
            "{what}: {x} must be finite and > 0"
        ))),
        None => Ok(()),
    }
}

fn non_negative_list(what: &str, xs: &[f64]) -> Result<(), CliError> {
    match xs.iter().find(|x| !(x.is_finite() && **x >= 0.0)) {
        Some(x) => Err(CliError::Config(format!(
            "{what}: {x} must be finite and >= 0"
        ))),
        None => Ok(()),
    }
}

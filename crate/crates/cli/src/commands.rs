//! `tables`, `curves`, `figure1` and `gap-scaling`.

use std::path::PathBuf;

use qstaff_core::optimize::minimize_pi_t;
use qstaff_core::{
    approx_cost, c_infinity, compare_staffing, optimality_gap, rbm_ct, transient_mean_curve,
    CrnObjective, Error, Evaluator, InitialState, InputModel, MinimizerResult, RbmSpec,
    StaffingComparison,
};
use rayon::prelude::*;

use crate::config::{EvaluatorChoice, ExperimentConfig, LinearGrid, StartSpec};
use crate::error::CliError;
use crate::fixtures;
use crate::output::{num, opt_num, write_csv, Provenance};

/// What a command produced.
#[derive(Debug, Default)]
pub struct Outcome {
    pub files: Vec<PathBuf>,
    pub messages: Vec<String>,
    /// Failed checks; non-empty means exit status 1.
    pub failures: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub out_dir: PathBuf,
    pub fixture_check: bool,
}

fn evaluator(cfg: &ExperimentConfig, model: &InputModel, init: &InitialState) -> Evaluator {
    let exact = match cfg.evaluator {
        EvaluatorChoice::Exact => true,
        EvaluatorChoice::Simulation => false,
        EvaluatorChoice::Auto => {
            model.is_brownian() && matches!(init, InitialState::Deterministic(_))
        }
    };
    if exact {
        Evaluator::Exact
    } else {
        Evaluator::Simulation(cfg.simulation.sim_config())
    }
}

fn start_column(init: &InitialState, spec: &StartSpec) -> String {
    match init {
        InitialState::Deterministic(x) => num(*x),
        _ => spec.label(),
    }
}

#[derive(Debug, Clone)]
pub struct TableRow {
    pub alpha: f64,
    pub horizon: f64,
    pub init: InitialState,
    pub start: String,
    pub exact: bool,
    pub comparison: StaffingComparison,
    pub saa: Option<MinimizerResult>,
}

/// Evaluates every scenario of the grid, ordered by `alpha`, `T`, start.
pub fn compute_table(cfg: &ExperimentConfig) -> Result<Vec<TableRow>, CliError> {
    let model = cfg.model.build()?;
    let g = &cfg.scenarios;
    let scenarios: Vec<(f64, f64, StartSpec)> = g
        .alphas
        .iter()
        .flat_map(|&a| {
            g.horizons
                .iter()
                .flat_map(move |&t| g.starts.iter().map(move |&s| (a, t, s)))
        })
        .collect();
    scenarios
        .par_iter()
        .map(|&(alpha, horizon, spec)| {
            let init = spec.resolve(&model, alpha)?;
            let ev = evaluator(cfg, &model, &init);
            let comparison = compare_staffing(&model, alpha, horizon, &init, &ev)?;
            let saa = if cfg.tables.saa_column {
                Some(minimize_pi_t(
                    &model,
                    alpha,
                    horizon,
                    &init,
                    &cfg.simulation.sim_config(),
                )?)
            } else {
                None
            };
            Ok(TableRow {
                alpha,
                horizon,
                init,
                start: start_column(&init, &spec),
                exact: ev == Evaluator::Exact,
                comparison,
                saa,
            })
        })
        .collect()
}

pub fn cmd_tables(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<Outcome, CliError> {
    let rows = compute_table(cfg)?;
    let prov = Provenance::new("tables", cfg);
    let mut header = vec![
        "alpha",
        "T",
        "x",
        "mu_inf",
        "pi_mu_inf",
        "pi_mu_inf_ci",
        "mu_tilde",
        "pi_mu_tilde",
        "pi_mu_tilde_ci",
        "rel_reduction",
    ];
    if cfg.tables.saa_column {
        header.extend(["mu_star_saa", "pi_star_saa"]);
    }
    let records: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            let c = &r.comparison;
            let mut rec = vec![
                num(r.alpha),
                num(r.horizon),
                r.start.clone(),
                num(c.mu_inf),
                num(c.pi_at_mu_inf.mean),
                num(c.pi_at_mu_inf.half_width),
                num(c.mu_tilde),
                num(c.pi_at_mu_tilde.mean),
                num(c.pi_at_mu_tilde.half_width),
                num(c.rel_reduction),
            ];
            if let Some(s) = &r.saa {
                rec.extend([num(s.mu_star), num(s.pi_star)]);
            }
            rec
        })
        .collect();
    let mut out = Outcome::default();
    out.files.push(write_csv(
        &opts.out_dir,
        &format!("{}_table.csv", cfg.name),
        &prov,
        &header,
        &records,
    )?);
    out.messages.push(format!("{} scenarios", rows.len()));

    if opts.fixture_check {
        if let Some(table) = cfg.fixture_table()? {
            let model = cfg.model.build()?;
            let cells = fixtures::diff(table, &model, &rows, &cfg.tolerances)?;
            out.files.push(fixtures::write_report(
                &opts.out_dir,
                &format!("{}_fixture_diff.csv", cfg.name),
                &prov,
                &cells,
            )?);
            let summary = fixtures::Summary::of(&cells);
            out.messages
                .push(format!("fixture {}: {summary}", table.name()));
            for c in cells
                .iter()
                .filter(|c| c.status == fixtures::Status::Mismatch)
            {
                out.failures.push(c.describe());
            }
        }
    }
    Ok(out)
}

/// Noise-free `C_T` for Brownian input when the evaluator allows it.
fn use_exact_curves(cfg: &ExperimentConfig, model: &InputModel) -> bool {
    match cfg.evaluator {
        EvaluatorChoice::Exact => true,
        EvaluatorChoice::Simulation => false,
        EvaluatorChoice::Auto => model.is_brownian(),
    }
}

/// Value of an analytic quantity, or `None` where it diverges (`mu <= lambda`).
fn where_stable(r: qstaff_core::Result<f64>) -> Result<Option<f64>, CliError> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(Error::Stability { .. }) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

pub fn cmd_curves(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<Outcome, CliError> {
    let model = cfg.model.build()?;
    let c = &cfg.curves;
    let mus = c.mu_grid.values();
    let exact = use_exact_curves(cfg, &model);
    let prov = Provenance::new("curves", cfg);
    let header = ["mu", "ct", "ct_ci", "ct_hat", "c_inf"];
    let mut out = Outcome::default();
    for &x in &c.starts {
        let init = InitialState::deterministic(x)?;
        for &horizon in &c.horizons {
            let points: Vec<(f64, f64)> = if exact {
                mus.par_iter()
                    .map(|&mu| Ok((rbm_ct(&RbmSpec::from_model(&model, mu, x)?, horizon)?, 0.0)))
                    .collect::<Result<_, CliError>>()?
            } else {
                let objective = CrnObjective::new(
                    &model,
                    c.alpha,
                    horizon,
                    &init,
                    &cfg.simulation.with_replications(c.replications),
                )?;
                mus.iter()
                    .map(|&mu| objective.congestion(mu).map(|e| (e.mean, e.half_width)))
                    .collect::<Result<_, _>>()?
            };
            let mut rows = Vec::with_capacity(mus.len());
            for (&mu, &(ct, ci)) in mus.iter().zip(&points) {
                let hat = where_stable(approx_cost(&model, mu, horizon, &init))?;
                let inf = where_stable(c_infinity(&model, mu))?;
                rows.push(vec![num(mu), num(ct), num(ci), opt_num(hat), opt_num(inf)]);
            }
            let file = format!("{}_curve_x{}_T{}.csv", cfg.name, num(x), num(horizon));
            out.files
                .push(write_csv(&opts.out_dir, &file, &prov, &header, &rows)?);
        }
    }
    out.messages.push(format!(
        "{} curve files, C_T by {}",
        out.files.len(),
        if exact { "quadrature" } else { "simulation" }
    ));
    Ok(out)
}

pub fn cmd_figure1(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<Outcome, CliError> {
    let f = &cfg.figure1;
    let model = cfg.model.build()?.with_lambda(f.lambda)?;
    let grid = LinearGrid {
        start: 0.0,
        stop: f.t_max,
        points: f.points,
    }
    .values();
    let sim = cfg.simulation.with_replications(f.replications);
    let line = where_stable(c_infinity(&model, f.mu))?;
    let mut header = vec!["t".to_string()];
    let mut curves = Vec::new();
    for s in &f.starts {
        let init = s.resolve(&model, 1.0)?;
        curves.push(transient_mean_curve(&model, f.mu, &grid, &init, &sim)?);
        header.push(format!("mean_{}", s.label()));
        header.push(format!("ci_{}", s.label()));
    }
    header.push("stationary".into());
    let rows: Vec<Vec<String>> = grid
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            let mut r = vec![num(t)];
            for c in &curves {
                r.push(num(c[i].mean));
                r.push(num(c[i].half_width));
            }
            r.push(opt_num(line));
            r
        })
        .collect();
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let prov = Provenance::new("figure1", cfg);
    let mut out = Outcome::default();
    out.files.push(write_csv(
        &opts.out_dir,
        &format!("{}_figure1.csv", cfg.name),
        &prov,
        &header,
        &rows,
    )?);
    if let Some(l) = line {
        out.messages.push(format!("stationary mean {}", num(l)));
    }
    Ok(out)
}

pub fn cmd_gap_scaling(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<Outcome, CliError> {
    let model = cfg.model.build()?;
    let g = &cfg.gap;
    let init = g.start.resolve(&model, g.alpha)?;
    let mut rows = Vec::new();
    let mut points = Vec::new();
    let mut out = Outcome::default();
    for t in g.horizons() {
        match optimality_gap(&model, g.alpha, &[t], &init) {
            Ok(p) => {
                let p = p[0];
                rows.push(vec![num(t), num(p.gap), num(p.scaled), "ok".into()]);
                points.push(p);
            }
            Err(Error::Numeric(_)) => {
                rows.push(vec![
                    num(t),
                    "NA".into(),
                    "NA".into(),
                    "no_interior_minimum".into(),
                ]);
                out.messages.push(format!(
                    "T = {}: approximate cost has no interior minimum",
                    num(t)
                ));
            }
            Err(e) => return Err(e.into()),
        }
    }
    let prov = Provenance::new("gap-scaling", cfg);
    out.files.push(write_csv(
        &opts.out_dir,
        &format!("{}_gap.csv", cfg.name),
        &prov,
        &["T", "gap", "gap_T2", "status"],
        &rows,
    )?);
    for w in points.windows(2) {
        if w[1].gap >= w[0].gap {
            out.failures.push(format!(
                "gap not decreasing between T = {} and T = {}",
                num(w[0].horizon),
                num(w[1].horizon)
            ));
        }
        out.messages.push(format!(
            "T = {} -> {}: gap*T^2 ratio {:.4}",
            num(w[0].horizon),
            num(w[1].horizon),
            w[1].scaled / w[0].scaled
        ));
    }
    Ok(out)
}

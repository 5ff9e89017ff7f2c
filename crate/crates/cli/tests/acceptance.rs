//! Acceptance criteria, one PASS/FAIL line each. Tolerances and budgets are
//! pinned here; nothing is read from configs.
//!
//! Criteria listed in `KNOWN_RED` fail against the reference data for
//! reasons recorded in the decisions log. They still print FAIL. The process
//! exits non-zero when any other criterion fails, or when a known-red one
//! starts passing (so the list cannot go stale).

use std::fs;
use std::process::{Command, ExitCode};
use std::time::Instant;

use qstaff_core::optimize::{check_convex, search_upper};
use qstaff_core::reference::{row_starts, ReferenceCell, ReferenceTable};
use qstaff_core::simulate::stream;
use qstaff_core::stats::MeanVar;
use qstaff_core::{
    c_infinity, compare_staffing, corrected_mu, coupled_difference, delta_bound, estimate_ct,
    expected_passage_time, first_passage_moments, mu_star_infinity, optimality_gap,
    passage_time_second_moment, psi_t, rbm_ct, CrnObjective, Error, Evaluator, InitialState,
    InputModel, RbmSpec, SimConfig, StaffingComparison,
};

const SEED: u64 = 20_240_917;

const STAFFING_DECIMALS: f64 = 1e3;
const CP_TABLE_REPS: u64 = 200_000;
const MM1_COST_FLOOR: f64 = 0.03;
const PARETO_COST_FLOOR: f64 = 0.05;
const CI_MULTIPLE: f64 = 3.0;
const EXACT_COST_TOL: f64 = 5e-3;
const CROSS_CHECK_TOL: f64 = 1e-2;
const CROSS_CHECK_REPS: u64 = 50_000;
const CROSS_CHECK_STEP: f64 = 1e-2;
const SCALING_REPS: u64 = 2_000_000;
const SCALING_TARGET: f64 = -2.0;
const SCALING_MAX_HW: f64 = 0.05;
const PASSAGE_SAMPLES: u64 = 100_000;
const BOUND_REPS: u64 = 200_000;
const COUPLED_PATHS: u64 = 10_000;
const CONVEXITY_POINTS: usize = 50;
const CONVEXITY_REPS: u64 = 2_000;
const CONVEXITY_REL: f64 = 1e-9;
const CONVEXITY_STEP_MULTIPLE: f64 = 5.0;
const LIMIT_HORIZON: f64 = 100.0;
const LIMIT_REL_TOL: f64 = 0.05;
const GAP_HORIZONS: [f64; 4] = [10.0, 20.0, 40.0, 80.0];
const GAP_VARIATION: f64 = 0.30;
const IDENTITY_REPS: u64 = 200_000;
const IDENTITY_BM_STEP: f64 = 1e-2;

/// Criteria that fail on the reference data; the decisions log has the analysis.
const KNOWN_RED: &[(u8, &str)] = &[
    (1, "eleven high-start corrected levels were published for a different start than their column"),
    (2, "costs at those levels differ, and two published costs disagree with independent simulation"),
    (3, "short-horizon high-start costs disagree with the closed-form transient mean"),
    (4, "the O(1/T) remainder at T = 10 exceeds 3 CI"),
    (9, "the limit is approached like 1/T, still 5-14% away at T = 100 for alpha >= 1"),
    (10, "the approximate cost has no minimizer at T = 10"),
];

type Criterion = (u8, &'static str, fn() -> Verdict);

struct Verdict {
    pass: bool,
    summary: String,
    details: Vec<String>,
}

impl Verdict {
    fn new(details: Vec<String>, failures: usize, total: usize, what: &str) -> Self {
        Self {
            pass: failures == 0,
            summary: format!("{}/{} {what} within tolerance", total - failures, total),
            details,
        }
    }
}

fn mm1() -> InputModel {
    InputModel::mm1(1.0).unwrap()
}

fn pareto() -> InputModel {
    InputModel::mpareto_default(1.0).unwrap()
}

fn rbm(sigma2: f64) -> InputModel {
    InputModel::rbm(1.0, sigma2).unwrap()
}

fn start_label(init: &InitialState) -> String {
    match init {
        InitialState::Deterministic(x) => format!("x={x:.4}"),
        other => format!("{other:?}"),
    }
}

type Cell = (
    ReferenceTable,
    f64,
    f64,
    InitialState,
    StaffingComparison,
    ReferenceCell,
);

/// Every (table, row, start) cell that is compared, with the table's exclusions applied.
fn table_cells(tables: &[ReferenceTable], evaluator: &Evaluator) -> Vec<Cell> {
    let mut out = Vec::new();
    for &table in tables {
        let model = table.model();
        for r in table.rows() {
            if table.exclusion(r.alpha).is_some() {
                continue;
            }
            let starts = row_starts(&model, r.alpha).unwrap();
            for (init, reference) in starts.into_iter().zip([r.empty, r.high]) {
                let cmp = compare_staffing(&model, r.alpha, r.horizon, &init, evaluator).unwrap();
                out.push((table, r.alpha, r.horizon, init, cmp, reference));
            }
        }
    }
    out
}

fn staffing_fidelity() -> Verdict {
    let mut details = Vec::new();
    let mut total = 0;
    let mut bad = 0;
    for table in ReferenceTable::ALL {
        let model = table.model();
        for r in table
            .rows()
            .iter()
            .filter(|r| table.exclusion(r.alpha).is_none())
        {
            let starts = row_starts(&model, r.alpha).unwrap();
            for (init, reference) in starts.into_iter().zip([r.empty, r.high]) {
                let levels = [
                    (
                        "mu_inf",
                        mu_star_infinity(&model, r.alpha).unwrap(),
                        reference.mu_inf,
                    ),
                    (
                        "mu_tilde",
                        corrected_mu(&model, r.alpha, r.horizon, &init).unwrap(),
                        reference.mu_tilde,
                    ),
                ];
                for (name, computed, published) in levels {
                    total += 1;
                    if (computed * STAFFING_DECIMALS).round()
                        != (published * STAFFING_DECIMALS).round()
                    {
                        bad += 1;
                        details.push(format!(
                            "{} alpha={} T={} {} {name}: {computed:.4} vs {published:.3}",
                            table.name(),
                            r.alpha,
                            r.horizon,
                            start_label(&init)
                        ));
                    }
                }
            }
        }
    }
    Verdict::new(details, bad, total, "staffing levels")
}

fn cost_check(
    details: &mut Vec<String>,
    label: String,
    computed: f64,
    half_width: f64,
    published: f64,
    tol: f64,
) -> bool {
    let ok = (computed - published).abs() <= tol;
    if !ok {
        details.push(format!(
            "{label}: {computed:.4} (+-{half_width:.4}) vs {published:.3}, tol {tol:.4}"
        ));
    }
    ok
}

fn simulated_cost_fidelity() -> Verdict {
    let mut details = Vec::new();
    let mut total = 0;
    let mut bad = 0;
    let cfg = SimConfig::new(CP_TABLE_REPS, SEED);
    for (table, alpha, horizon, init, cmp, reference) in table_cells(
        &[ReferenceTable::Mm1, ReferenceTable::MPareto],
        &Evaluator::Simulation(cfg),
    ) {
        let floor = if table == ReferenceTable::Mm1 {
            MM1_COST_FLOOR
        } else {
            PARETO_COST_FLOOR
        };
        for (name, est, published) in [
            ("pi_mu_inf", cmp.pi_at_mu_inf, reference.pi_mu_inf),
            ("pi_mu_tilde", cmp.pi_at_mu_tilde, reference.pi_mu_tilde),
        ] {
            total += 1;
            let tol = floor.max(CI_MULTIPLE * est.half_width);
            let label = format!(
                "{} alpha={alpha} T={horizon} {} {name}",
                table.name(),
                start_label(&init)
            );
            if !cost_check(
                &mut details,
                label,
                est.mean,
                est.half_width,
                published,
                tol,
            ) {
                bad += 1;
            }
        }
    }
    Verdict::new(details, bad, total, "simulated costs")
}

fn deterministic_rbm_fidelity() -> Verdict {
    let mut details = Vec::new();
    let mut total = 0;
    let mut bad = 0;
    for (table, alpha, horizon, init, cmp, reference) in table_cells(
        &[ReferenceTable::RbmUnit, ReferenceTable::RbmDouble],
        &Evaluator::Exact,
    ) {
        for (name, est, published) in [
            ("pi_mu_inf", cmp.pi_at_mu_inf, reference.pi_mu_inf),
            ("pi_mu_tilde", cmp.pi_at_mu_tilde, reference.pi_mu_tilde),
        ] {
            total += 1;
            let label = format!(
                "{} alpha={alpha} T={horizon} {} {name}",
                table.name(),
                start_label(&init)
            );
            if !cost_check(
                &mut details,
                label,
                est.mean,
                0.0,
                published,
                EXACT_COST_TOL,
            ) {
                bad += 1;
            }
        }
    }
    // The excluded sigma = 1, alpha = 1 block: quadrature against simulation.
    let table = ReferenceTable::RbmUnit;
    let model = table.model();
    let sim =
        Evaluator::Simulation(SimConfig::new(CROSS_CHECK_REPS, SEED).with_step(CROSS_CHECK_STEP));
    for r in table
        .rows()
        .iter()
        .filter(|r| table.exclusion(r.alpha).is_some())
    {
        for init in row_starts(&model, r.alpha).unwrap() {
            let exact =
                compare_staffing(&model, r.alpha, r.horizon, &init, &Evaluator::Exact).unwrap();
            let mc = compare_staffing(&model, r.alpha, r.horizon, &init, &sim).unwrap();
            for (name, a, b) in [
                ("pi_mu_inf", exact.pi_at_mu_inf, mc.pi_at_mu_inf),
                ("pi_mu_tilde", exact.pi_at_mu_tilde, mc.pi_at_mu_tilde),
            ] {
                total += 1;
                let label = format!(
                    "cross-check alpha={} T={} {} {name}",
                    r.alpha,
                    r.horizon,
                    start_label(&init)
                );
                if !cost_check(
                    &mut details,
                    label,
                    a.mean,
                    b.half_width,
                    b.mean,
                    CROSS_CHECK_TOL,
                ) {
                    bad += 1;
                }
            }
        }
    }
    Verdict::new(details, bad, total, "deterministic costs")
}

fn transient_scaling() -> Verdict {
    let model = mm1();
    let c_inf = c_infinity(&model, 2.0).unwrap();
    let cfg = SimConfig::new(SCALING_REPS, SEED);
    let mut details = Vec::new();
    let mut bad = 0;
    for t in [10.0, 20.0, 40.0] {
        let e = estimate_ct(&model, 2.0, t, &InitialState::empty(), &cfg).unwrap();
        let scaled = t * (e.mean - c_inf);
        let hw = t * e.half_width;
        let ok = (scaled - SCALING_TARGET).abs() <= CI_MULTIPLE * hw && hw <= SCALING_MAX_HW;
        bad += usize::from(!ok);
        details.push(format!(
            "{} T={t}: T(C_T - C_inf) = {scaled:.4} +- {hw:.4}, |dev| {:.4} vs 3CI {:.4}",
            if ok { "ok" } else { "off" },
            (scaled - SCALING_TARGET).abs(),
            CI_MULTIPLE * hw
        ));
    }
    Verdict::new(details, bad, 3, "horizons")
}

fn passage_moments() -> Verdict {
    let mut details = Vec::new();
    let mut bad = 0;
    let mut total = 0;
    for (name, model) in [
        ("mm1", mm1()),
        ("mpareto", pareto()),
        ("rbm_sigma2", rbm(4.0)),
    ] {
        for (x, mu) in [(1.0, 2.0), (3.0, 2.0), (2.0, 1.5)] {
            let est =
                first_passage_moments(&model, mu, x, None, &SimConfig::new(PASSAGE_SAMPLES, SEED))
                    .unwrap();
            let m1 = expected_passage_time(x, &model, mu).unwrap();
            let m2 = passage_time_second_moment(x, &model, mu).unwrap();
            let z1 = (est.mean - m1) / est.mean_std_error;
            let z2 = (est.second_moment - m2) / est.second_moment_std_error;
            total += 1;
            let ok =
                z1.abs() <= CI_MULTIPLE && z2.abs() <= CI_MULTIPLE && est.censored_fraction == 0.0;
            bad += usize::from(!ok);
            details.push(format!(
                "{} {name} x={x} mu={mu}: mean {:.4} vs {m1:.4} (z {z1:+.2}), second {:.4} vs {m2:.4} (z {z2:+.2})",
                if ok { "ok" } else { "off" },
                est.mean,
                est.second_moment
            ));
        }
    }
    Verdict::new(details, bad, total, "combinations")
}

fn remainder_bound() -> Verdict {
    let mut details = Vec::new();
    let mut bad = 0;
    let mut total = 0;
    let mu = 2.0;
    for (name, model) in [
        ("rbm_sigma1", rbm(1.0)),
        ("rbm_sigma2", rbm(4.0)),
        ("mm1", mm1()),
    ] {
        let c_inf = c_infinity(&model, mu).unwrap();
        for t in [2.0, 5.0, 10.0, 20.0] {
            for x in [0.0, 2.5] {
                let init = InitialState::deterministic(x).unwrap();
                let (ct, hw) = if model.is_brownian() {
                    (
                        rbm_ct(&RbmSpec::from_model(&model, mu, x).unwrap(), t).unwrap(),
                        0.0,
                    )
                } else {
                    let e = estimate_ct(&model, mu, t, &init, &SimConfig::new(BOUND_REPS, SEED))
                        .unwrap();
                    (e.mean, e.half_width)
                };
                let remainder = ct - c_inf - psi_t(&model, mu, t, &init).unwrap();
                let bound = delta_bound(&model, mu, t, &init).unwrap();
                let ok = remainder.abs() <= bound + CI_MULTIPLE * hw;
                total += 1;
                bad += usize::from(!ok);
                if !ok {
                    details.push(format!(
                        "{name} T={t} x={x}: |{remainder:.3e}| > {bound:.3e} + 3 x {hw:.1e}"
                    ));
                }
            }
        }
    }
    Verdict::new(details, bad, total, "cases")
}

fn coupling_invariants() -> Verdict {
    let mut details = Vec::new();
    let mut bad = 0;
    let mut total = 0;
    let mu = 2.0;
    for (name, model) in [("mm1", mm1()), ("mpareto", pareto())] {
        for (x, y) in [(3.0, 1.0), (2.5, 0.0)] {
            let mut area = MeanVar::default();
            let mut broken = 0u64;
            for i in 0..COUPLED_PATHS {
                let s =
                    coupled_difference(&model, mu, 1.0, x, y, None, &mut stream(SEED, i)).unwrap();
                broken += u64::from(!s.staircase || s.censored);
                area.push(s.integral_total);
            }
            let target = (x * x - y * y) / (2.0 * (mu - model.lambda()));
            let z = (area.mean - target) / area.std_error();
            let ok = broken == 0 && z.abs() <= CI_MULTIPLE;
            total += 1;
            bad += usize::from(!ok);
            details.push(format!(
                "{} {name} x={x} y={y}: {broken} broken paths, area {:.4} vs {target:.4} (z {z:+.2})",
                if ok { "ok" } else { "off" },
                area.mean
            ));
        }
    }
    Verdict::new(details, bad, total, "coupled ensembles")
}

fn saa_convexity() -> Verdict {
    let mut details = Vec::new();
    let mut bad = 0;
    let mut total = 0;
    for (name, model) in [
        ("mm1", mm1()),
        ("mpareto", pareto()),
        ("rbm_sigma1", rbm(1.0)),
        ("rbm_sigma2", rbm(4.0)),
    ] {
        for (alpha, horizon, x) in [(1.0, 5.0, 0.0), (2.0, 2.0, 2.5)] {
            let cfg = SimConfig::new(CONVEXITY_REPS, SEED);
            let init = InitialState::deterministic(x).unwrap();
            let objective = CrnObjective::new(&model, alpha, horizon, &init, &cfg).unwrap();
            let hi = search_upper(&model, alpha).unwrap();
            let mus: Vec<f64> = (0..CONVEXITY_POINTS)
                .map(|i| hi * i as f64 / (CONVEXITY_POINTS - 1) as f64)
                .collect();
            let values: Vec<f64> = mus
                .iter()
                .map(|&m| objective.cost(m).unwrap().mean)
                .collect();
            let tol = if model.is_brownian() {
                CONVEXITY_STEP_MULTIPLE * objective.step()
            } else {
                CONVEXITY_REL * values.iter().fold(0.0f64, |s, v| s.max(v.abs()))
            };
            let worst = values
                .windows(3)
                .map(|w| w[0] - 2.0 * w[1] + w[2])
                .fold(f64::INFINITY, f64::min);
            let ok = check_convex(&mus, &values, tol).is_ok();
            total += 1;
            bad += usize::from(!ok);
            details.push(format!(
                "{} {name} alpha={alpha} T={horizon} x={x}: min second difference {worst:.3e}, tol -{tol:.1e}",
                if ok { "ok" } else { "off" }
            ));
        }
    }
    Verdict::new(details, bad, total, "objectives")
}

fn shift_limit() -> Verdict {
    let mut details = Vec::new();
    let mut bad = 0;
    let mut total = 0;
    for (name, model) in [
        ("mm1", mm1()),
        ("mpareto", pareto()),
        ("rbm_sigma1", rbm(1.0)),
    ] {
        for alpha in [0.1, 1.0, 2.0] {
            let bench = qstaff_core::benchmark_congestion(&model, alpha).unwrap();
            for x in [0.0, bench] {
                let init = InitialState::deterministic(x).unwrap();
                let (shift, bullet) =
                    qstaff_core::optimize::scaled_shift(&model, alpha, LIMIT_HORIZON, &init)
                        .unwrap();
                let rel = (shift - bullet).abs() / bullet.abs();
                total += 1;
                if rel > LIMIT_REL_TOL {
                    bad += 1;
                    details.push(format!(
                        "{name} alpha={alpha} x={x:.4}: {shift:.4} vs {bullet:.4} (rel {rel:.3})"
                    ));
                }
            }
        }
    }
    Verdict::new(details, bad, total, "cases")
}

fn gap_scaling() -> Verdict {
    let mut details = Vec::new();
    let mut bad = 0;
    let mut total = 0;
    for (name, model) in [
        ("mm1", mm1()),
        ("rbm_sigma1", rbm(1.0)),
        ("rbm_sigma2", rbm(4.0)),
    ] {
        let mut scaled = Vec::new();
        for t in GAP_HORIZONS {
            match optimality_gap(&model, 1.0, &[t], &InitialState::empty()) {
                Ok(p) => scaled.push(Some(p[0].scaled)),
                Err(Error::Numeric(_)) => {
                    details.push(format!("{name} T={t}: approximate cost has no minimizer"));
                    scaled.push(None);
                }
                Err(e) => panic!("{e}"),
            }
        }
        for (w, t) in scaled.windows(2).zip(GAP_HORIZONS) {
            total += 1;
            let ok = match (w[0], w[1]) {
                (Some(a), Some(b)) => {
                    let ratio = b / a;
                    details.push(format!(
                        "{name} T={t} -> {}: gap T^2 ratio {ratio:.4}",
                        2.0 * t
                    ));
                    (ratio - 1.0).abs() < GAP_VARIATION
                }
                _ => false,
            };
            bad += usize::from(!ok);
        }
    }
    Verdict::new(details, bad, total, "consecutive ratios")
}

fn scaling_identity() -> Verdict {
    let mut details = Vec::new();
    let mut bad = 0;
    let mut total = 0;
    for (name, model) in [
        ("mm1", mm1()),
        ("mpareto", pareto()),
        ("rbm_sigma1", rbm(1.0)),
    ] {
        let fast = model.with_lambda(2.0).unwrap();
        let a = estimate_ct(
            &fast,
            3.0,
            5.0,
            &InitialState::empty(),
            &SimConfig::new(IDENTITY_REPS, SEED).with_step(IDENTITY_BM_STEP),
        )
        .unwrap();
        let b = estimate_ct(
            &model,
            1.5,
            10.0,
            &InitialState::empty(),
            &SimConfig::new(IDENTITY_REPS, SEED + 1).with_step(IDENTITY_BM_STEP),
        )
        .unwrap();
        let ok = (a.mean - b.mean).abs() <= a.half_width + b.half_width;
        total += 1;
        bad += usize::from(!ok);
        details.push(format!(
            "{} {name}: {:.4} +- {:.4} vs {:.4} +- {:.4}",
            if ok { "ok" } else { "off" },
            a.mean,
            a.half_width,
            b.mean,
            b.half_width
        ));
    }
    Verdict::new(details, bad, total, "models")
}

fn determinism() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let mut files = Vec::new();
    let mut details = Vec::new();
    for jobs in ["1", "4"] {
        let out = dir.path().join(format!("jobs{jobs}"));
        let status = Command::new(env!("CARGO_BIN_EXE_qstaff"))
            .args([
                "tables",
                "--preset",
                "mm1",
                "--no-fixture-check",
                "--jobs",
                jobs,
                "--out-dir",
            ])
            .arg(&out)
            .output()
            .unwrap();
        assert!(
            status.status.success(),
            "{}",
            String::from_utf8_lossy(&status.stderr)
        );
        files.push(fs::read(out.join("mm1_table.csv")).unwrap());
    }
    let same = files[0] == files[1];
    details.push(format!(
        "mm1_table.csv: {} bytes, identical: {same}",
        files[0].len()
    ));
    Verdict::new(details, usize::from(!same), 1, "byte comparisons")
}

fn main() -> ExitCode {
    let criteria: [Criterion; 12] = [
        (
            1,
            "closed-form staffing levels match the reference to 3 decimals",
            staffing_fidelity,
        ),
        (
            2,
            "simulated M/M/1 and M/Pareto/1 costs match the reference",
            simulated_cost_fidelity,
        ),
        (
            3,
            "deterministic RBM costs match the reference",
            deterministic_rbm_fidelity,
        ),
        (
            4,
            "T (C_T - C_inf) within 3 CI of the leading coefficient -2",
            transient_scaling,
        ),
        (
            5,
            "first-passage moments within 3 standard errors",
            passage_moments,
        ),
        (6, "transient remainder within its bound", remainder_bound),
        (
            7,
            "coupled paths are staircases with the predicted area",
            coupling_invariants,
        ),
        (
            8,
            "sample-average objectives are convex on a 50-point grid",
            saa_convexity,
        ),
        (
            9,
            "(mu_hat - mu_inf) T within 5% of mu_bullet at T = 100",
            shift_limit,
        ),
        (
            10,
            "gap T^2 varies by less than 30% between consecutive horizons",
            gap_scaling,
        ),
        (
            11,
            "C_T time-scaling identity within overlapping 95% CIs",
            scaling_identity,
        ),
        (
            12,
            "tables are byte-identical across worker counts",
            determinism,
        ),
    ];
    let mut unexpected = Vec::new();
    for (id, title, run) in criteria {
        let start = Instant::now();
        let v = run();
        let known = KNOWN_RED.iter().find(|(k, _)| *k == id);
        println!(
            "{} criterion {id:>2}: {title} ({}; {:.1}s){}",
            if v.pass { "PASS" } else { "FAIL" },
            v.summary,
            start.elapsed().as_secs_f64(),
            match (v.pass, known) {
                (false, Some((_, why))) => format!(" [known: {why}]"),
                _ => String::new(),
            }
        );
        for d in &v.details {
            println!("    {d}");
        }
        match (v.pass, known) {
            (false, None) => unexpected.push(format!("criterion {id} failed")),
            (true, Some(_)) => {
                unexpected.push(format!("criterion {id} passed but is listed as known red"))
            }
            _ => {}
        }
    }
    if unexpected.is_empty() {
        ExitCode::SUCCESS
    } else {
        for u in &unexpected {
            eprintln!("{u}");
        }
        ExitCode::FAILURE
    }
}

//! Stationary moments against long-run time averages.

use qstaff_core::stats::MeanVar;
use qstaff_core::{estimate_ct, stationary_moments, InitialState, InputModel, SimConfig};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rand_distr::{Distribution, Exp, Exp1, Pareto};

const BURN_IN: f64 = 1_000.0;
const WINDOW: f64 = 9_000.0;

/// Independent event-driven workload simulation. Returns the time averages of
/// `Q` and `Q^2` over `[BURN_IN, BURN_IN + WINDOW]`.
fn time_averages<R: Rng>(
    lambda: f64,
    mu: f64,
    mut jump: impl FnMut(&mut R) -> f64,
    rng: &mut R,
) -> (f64, f64) {
    let end = BURN_IN + WINDOW;
    let (mut t, mut q) = (0.0, 0.0);
    let (mut a1, mut a2) = (0.0, 0.0);
    let arrivals = Exp::new(lambda).unwrap();
    loop {
        let next = (t + arrivals.sample(rng)).min(end);
        // Integrate q(s) = max(q - mu (s - t), 0) over the overlap with the window.
        let lo = t.max(BURN_IN);
        if next > lo {
            let q_lo = (q - mu * (lo - t)).max(0.0);
            let empty_at = t + q / mu;
            let hi = next.min(empty_at);
            if hi > lo {
                let q_hi = q - mu * (hi - t);
                a1 += (q_lo * q_lo - q_hi * q_hi) / (2.0 * mu);
                a2 += (q_lo.powi(3) - q_hi.powi(3)) / (3.0 * mu);
            }
        }
        q = (q - mu * (next - t)).max(0.0);
        t = next;
        if t >= end {
            return (a1 / WINDOW, a2 / WINDOW);
        }
        q += jump(rng);
    }
}

fn replicate(
    reps: u64,
    seed: u64,
    mut run: impl FnMut(&mut StdRng) -> (f64, f64),
) -> (MeanVar, MeanVar) {
    let mut rng = StdRng::seed_from_u64(seed);
    let (mut m1, mut m2) = (MeanVar::default(), MeanVar::default());
    for _ in 0..reps {
        let (a, b) = run(&mut rng);
        m1.push(a);
        m2.push(b);
    }
    (m1, m2)
}

fn close(stat: &MeanVar, target: f64) -> bool {
    (stat.mean - target).abs() <= 3.0 * stat.std_error()
}

#[test]
fn mm1_long_run_moments() {
    let model = InputModel::mm1(1.0).unwrap();
    let st = stationary_moments(&model, 2.0).unwrap();
    assert_eq!((st.mean_workload, st.second_moment), (1.0, 4.0));
    let (m1, m2) = replicate(100, 1, |rng| {
        time_averages(1.0, 2.0, |r: &mut StdRng| Exp1.sample(r), rng)
    });
    assert!(close(&m1, 1.0), "{} +- {}", m1.mean, m1.std_error());
    assert!(close(&m2, 4.0), "{} +- {}", m2.mean, m2.std_error());
}

#[test]
fn pareto_long_run_mean() {
    // E[Q^3] is infinite, so only the mean is checked by time averages.
    let model = InputModel::mpareto_default(1.0).unwrap();
    let st = stationary_moments(&model, 2.0).unwrap();
    let pareto = Pareto::new(11.0 / 16.0, 3.2).unwrap();
    let (m1, _) = replicate(100, 2, |rng| {
        time_averages(1.0, 2.0, |r: &mut StdRng| pareto.sample(r), rng)
    });
    assert!(
        close(&m1, st.mean_workload),
        "{} vs {}",
        m1.mean,
        st.mean_workload
    );
}

#[test]
fn engine_warm_start_matches_stationary_mean() {
    let cfg = SimConfig::new(24, 9).with_step(1e-2);
    let init = InitialState::warmup(BURN_IN).unwrap();
    for model in [
        InputModel::mm1(1.0).unwrap(),
        InputModel::rbm(1.0, 1.0).unwrap(),
    ] {
        let target = stationary_moments(&model, 2.0).unwrap().mean_workload;
        let est = estimate_ct(&model, 2.0, WINDOW, &init, &cfg).unwrap();
        assert!(
            (est.mean - target).abs() <= 3.0 * est.std_error,
            "{:?}: {} vs {target}",
            model.kind(),
            est.mean
        );
    }
}

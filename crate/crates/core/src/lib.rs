//! Finite-horizon cost corrections and staffing rules for single-server
//! queues with Lévy input.
//!
//! The crate covers three input models (M/M/1, M/Pareto/1 and reflected
//! Brownian motion), closed-form stationary quantities, the `1/T` transient
//! correction and the corrected staffing rule built from it, an exact
//! Monte-Carlo engine, a deterministic evaluator for reflected Brownian
//! motion, and minimizers for the exact and approximate cost functions.

pub mod correction;
pub mod error;
pub mod model;
pub mod optimize;
pub mod quad;
pub mod rbm;
pub mod reference;
pub mod simulate;
pub mod stationary;
pub mod stats;

pub use correction::{
    approx_cost, approx_pi, corrected_mu, correction_terms, delta_bound, delta_bound_xy,
    expected_passage_time, mu_bullet, passage_time_second_moment, psi_t, psi_xy, CorrectionTerms,
    InitialState,
};
pub use error::{Error, Result};
pub use model::{InputKind, InputModel, Moments};
pub use optimize::{
    compare_staffing, evaluate_pi, minimize_pi_hat, minimize_pi_t, optimality_gap, Evaluator,
    GapPoint, MinimizerResult, StaffingComparison,
};
pub use rbm::{rbm_cdf, rbm_ct, rbm_mean, rbm_pdf, rbm_pi, RbmSpec};
pub use simulate::{
    coupled_difference, estimate_ct, estimate_pi, first_passage_moments, sample_first_passage,
    simulate_path, transient_mean_curve, CostEstimate, CoupledSummary, CrnObjective, FirstPassage,
    PassageEstimate, PathSummary, SimConfig,
};
pub use stationary::{
    benchmark_congestion, c_infinity, mu_star_infinity, pi_infinity, pi_star_infinity,
    stationary_moments, StationaryResult,
};

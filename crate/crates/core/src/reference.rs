//! Published reference values for the staffing comparison tables, to three
//! decimals.
//!
//! Each row holds an `(alpha, T)` scenario for an empty start and for a start
//! at twice the benchmark congestion level `sqrt(alpha lambda u2 / 2)`. Cells
//! are `(mu_inf, Pi_T(mu_inf), mu_tilde, Pi_T(mu_tilde), relative reduction)`.

use serde::Serialize;

use crate::correction::InitialState;
use crate::error::Result;
use crate::model::InputModel;
use crate::stationary::benchmark_congestion;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReferenceCell {
    pub mu_inf: f64,
    pub pi_mu_inf: f64,
    pub mu_tilde: f64,
    pub pi_mu_tilde: f64,
    pub rel_reduction: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReferenceRow {
    pub alpha: f64,
    pub horizon: f64,
    pub empty: ReferenceCell,
    pub high: ReferenceCell,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ReferenceTable {
    Mm1,
    MPareto,
    RbmUnit,
    RbmDouble,
}

/// Why a block of reference values is not compared.
pub const DUPLICATED_BLOCK: &str =
    "excluded: suspected erratum in reference values (block duplicates alpha = 2)";

const fn cell(v: [f64; 5]) -> ReferenceCell {
    ReferenceCell {
        mu_inf: v[0],
        pi_mu_inf: v[1],
        mu_tilde: v[2],
        pi_mu_tilde: v[3],
        rel_reduction: v[4],
    }
}

const fn row(alpha: f64, horizon: f64, empty: [f64; 5], high: [f64; 5]) -> ReferenceRow {
    ReferenceRow {
        alpha,
        horizon,
        empty: cell(empty),
        high: cell(high),
    }
}

const MM1: [ReferenceRow; 12] = [
    row(
        0.1,
        1.0,
        [4.162, 0.620, 2.688, 0.536, 0.136],
        [4.162, 0.682, 2.688, 0.536, 0.214],
    ),
    row(
        0.1,
        2.0,
        [4.162, 0.669, 3.425, 0.641, 0.041],
        [4.162, 0.700, 3.425, 0.641, 0.085],
    ),
    row(
        0.1,
        5.0,
        [4.162, 0.706, 3.867, 0.703, 0.005],
        [4.162, 0.719, 3.867, 0.703, 0.022],
    ),
    row(
        0.1,
        10.0,
        [4.162, 0.719, 4.015, 0.719, 0.001],
        [4.162, 0.726, 4.015, 0.719, 0.010],
    ),
    row(
        1.0,
        1.0,
        [2.000, 2.309, 0.000, 0.500, 0.783],
        [2.000, 3.500, 0.500, 2.750, 0.214],
    ),
    row(
        1.0,
        2.0,
        [2.000, 2.461, 0.750, 1.480, 0.398],
        [2.000, 3.218, 1.250, 3.125, 0.029],
    ),
    row(
        1.0,
        5.0,
        [2.000, 2.675, 1.500, 2.400, 0.103],
        [2.000, 3.043, 1.700, 2.968, 0.025],
    ),
    row(
        1.0,
        10.0,
        [2.000, 2.810, 1.750, 2.726, 0.030],
        [2.000, 3.007, 1.850, 2.980, 0.009],
    ),
    row(
        2.0,
        1.0,
        [1.707, 3.744, 0.000, 0.500, 0.866],
        [1.707, 5.889, 0.000, 3.328, 0.435],
    ),
    row(
        2.0,
        2.0,
        [1.707, 3.924, 0.146, 1.232, 0.686],
        [1.707, 5.547, 0.854, 4.682, 0.156],
    ),
    row(
        2.0,
        5.0,
        [1.707, 4.209, 1.083, 3.343, 0.206],
        [1.707, 5.114, 1.366, 4.910, 0.040],
    ),
    row(
        2.0,
        10.0,
        [1.707, 4.424, 1.395, 4.108, 0.071],
        [1.707, 4.945, 1.536, 4.868, 0.016],
    ),
];

const MPARETO: [ReferenceRow; 12] = [
    row(
        0.1,
        1.0,
        [3.510, 0.524, 1.759, 0.461, 0.120],
        [3.510, 0.573, 2.010, 0.562, 0.019],
    ),
    row(
        0.1,
        2.0,
        [3.510, 0.555, 2.635, 0.539, 0.029],
        [3.510, 0.580, 2.760, 0.574, 0.010],
    ),
    row(
        0.1,
        5.0,
        [3.510, 0.580, 3.160, 0.578, 0.003],
        [3.510, 0.591, 3.210, 0.589, 0.002],
    ),
    row(
        0.1,
        10.0,
        [3.510, 0.590, 3.335, 0.590, 0.000],
        [3.510, 0.596, 3.360, 0.595, 0.001],
    ),
    row(
        1.0,
        1.0,
        [1.794, 2.076, 0.000, 0.500, 0.759],
        [1.794, 2.989, 0.000, 2.088, 0.302],
    ),
    row(
        1.0,
        2.0,
        [1.794, 2.190, 0.511, 1.291, 0.411],
        [1.794, 2.790, 0.610, 2.588, 0.072],
    ),
    row(
        1.0,
        5.0,
        [1.794, 2.345, 1.281, 2.108, 0.101],
        [1.794, 2.638, 1.320, 2.607, 0.012],
    ),
    row(
        1.0,
        10.0,
        [1.794, 2.441, 1.537, 2.371, 0.029],
        [1.794, 2.597, 1.557, 2.585, 0.005],
    ),
    row(
        2.0,
        1.0,
        [1.561, 3.427, 0.000, 0.500, 0.854],
        [1.561, 5.087, 0.000, 2.745, 0.460],
    ),
    row(
        2.0,
        2.0,
        [1.561, 3.567, 0.032, 1.050, 0.706],
        [1.561, 4.832, 0.172, 3.417, 0.293],
    ),
    row(
        2.0,
        5.0,
        [1.561, 3.779, 0.950, 3.012, 0.203],
        [1.561, 4.499, 1.006, 4.313, 0.041],
    ),
    row(
        2.0,
        10.0,
        [1.561, 3.935, 1.255, 3.356, 0.147],
        [1.561, 4.351, 1.284, 4.304, 0.011],
    ),
];

const RBM_UNIT: [ReferenceRow; 12] = [
    row(
        0.1,
        1.0,
        [3.236, 0.525, 2.901, 0.518, 0.013],
        [3.236, 0.565, 3.124, 0.564, 0.001],
    ),
    row(
        0.1,
        2.0,
        [3.236, 0.536, 3.068, 0.534, 0.003],
        [3.236, 0.556, 3.180, 0.556, 0.000],
    ),
    row(
        0.1,
        5.0,
        [3.236, 0.543, 3.169, 0.542, 0.000],
        [3.236, 0.551, 3.214, 0.551, 0.000],
    ),
    row(
        0.1,
        10.0,
        [3.236, 0.545, 3.203, 0.545, 0.000],
        [3.236, 0.549, 3.225, 0.549, 0.000],
    ),
    row(
        1.0,
        1.0,
        [1.500, 3.420, 0.000, 0.833, 0.756],
        [1.500, 4.741, 1.000, 3.984, 0.160],
    ),
    row(
        1.0,
        2.0,
        [1.500, 3.539, 0.750, 2.386, 0.326],
        [1.500, 4.579, 1.250, 4.293, 0.063],
    ),
    row(
        1.0,
        5.0,
        [1.500, 3.707, 1.200, 3.363, 0.093],
        [1.500, 4.335, 1.400, 4.274, 0.014],
    ),
    row(
        1.0,
        10.0,
        [1.500, 3.820, 1.350, 3.705, 0.030],
        [1.500, 4.190, 1.450, 4.175, 0.004],
    ),
    row(
        2.0,
        1.0,
        [1.500, 3.420, 0.000, 0.833, 0.756],
        [1.500, 4.741, 1.000, 3.984, 0.160],
    ),
    row(
        2.0,
        2.0,
        [1.500, 3.539, 0.750, 2.386, 0.326],
        [1.500, 4.579, 1.250, 4.293, 0.063],
    ),
    row(
        2.0,
        5.0,
        [1.500, 3.707, 1.200, 3.363, 0.093],
        [1.500, 4.335, 1.400, 4.274, 0.014],
    ),
    row(
        2.0,
        10.0,
        [1.500, 3.820, 1.350, 3.705, 0.030],
        [1.500, 4.190, 1.450, 4.175, 0.004],
    ),
];

const RBM_DOUBLE: [ReferenceRow; 12] = [
    row(
        0.1,
        1.0,
        [5.472, 0.950, 4.801, 0.936, 0.015],
        [5.472, 1.030, 5.249, 1.029, 0.001],
    ),
    row(
        0.1,
        2.0,
        [5.472, 0.972, 5.137, 0.968, 0.003],
        [5.472, 1.012, 5.360, 1.012, 0.000],
    ),
    row(
        0.1,
        5.0,
        [5.472, 0.985, 5.338, 0.985, 0.000],
        [5.472, 1.002, 5.427, 1.002, 0.000],
    ),
    row(
        0.1,
        10.0,
        [5.472, 0.990, 5.405, 0.990, 0.000],
        [5.472, 0.998, 5.450, 0.998, 0.000],
    ),
    row(
        1.0,
        1.0,
        [2.414, 3.176, 0.293, 1.546, 0.513],
        [2.414, 4.633, 1.707, 4.228, 0.087],
    ),
    row(
        1.0,
        2.0,
        [2.414, 3.356, 1.354, 2.690, 0.199],
        [2.414, 4.375, 2.061, 4.247, 0.029],
    ),
    row(
        1.0,
        5.0,
        [2.414, 3.573, 1.990, 3.411, 0.045],
        [2.414, 4.094, 2.273, 4.073, 0.005],
    ),
    row(
        1.0,
        10.0,
        [2.414, 3.689, 2.202, 3.646, 0.012],
        [2.414, 3.966, 2.344, 3.962, 0.001],
    ),
    row(
        2.0,
        1.0,
        [2.000, 4.839, 0.000, 1.339, 0.723],
        [2.000, 7.481, 1.000, 5.967, 0.202],
    ),
    row(
        2.0,
        2.0,
        [2.000, 5.078, 0.500, 2.773, 0.454],
        [2.000, 7.158, 1.500, 6.585, 0.080],
    ),
    row(
        2.0,
        5.0,
        [2.000, 5.414, 1.400, 4.726, 0.127],
        [2.000, 6.670, 1.800, 6.549, 0.018],
    ),
    row(
        2.0,
        10.0,
        [2.000, 5.639, 1.700, 5.409, 0.041],
        [2.000, 6.380, 1.900, 6.349, 0.005],
    ),
];

impl ReferenceTable {
    pub const ALL: [ReferenceTable; 4] = [Self::Mm1, Self::MPareto, Self::RbmUnit, Self::RbmDouble];

    pub fn name(self) -> &'static str {
        match self {
            Self::Mm1 => "mm1",
            Self::MPareto => "mpareto",
            Self::RbmUnit => "rbm_sigma1",
            Self::RbmDouble => "rbm_sigma2",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|t| t.name() == name)
    }

    /// The input model of the table, at `lambda = 1`.
    pub fn model(self) -> InputModel {
        match self {
            Self::Mm1 => InputModel::mm1(1.0),
            Self::MPareto => InputModel::mpareto_default(1.0),
            Self::RbmUnit => InputModel::rbm(1.0, 1.0),
            Self::RbmDouble => InputModel::rbm(1.0, 4.0),
        }
        .expect("reference models are valid")
    }

    pub fn rows(self) -> &'static [ReferenceRow] {
        match self {
            Self::Mm1 => &MM1,
            Self::MPareto => &MPARETO,
            Self::RbmUnit => &RBM_UNIT,
            Self::RbmDouble => &RBM_DOUBLE,
        }
    }

    /// Reason a block is left out of comparisons, if it is.
    pub fn exclusion(self, alpha: f64) -> Option<&'static str> {
        (self == Self::RbmUnit && alpha == 1.0).then_some(DUPLICATED_BLOCK)
    }
}

/// Twice the benchmark congestion level: the non-empty start of the tables.
pub fn high_start(model: &InputModel, alpha: f64) -> Result<f64> {
    Ok(2.0 * benchmark_congestion(model, alpha)?)
}

/// The two initial states of a row, empty first.
pub fn row_starts(model: &InputModel, alpha: f64) -> Result<[InitialState; 2]> {
    Ok([
        InitialState::empty(),
        InitialState::deterministic(high_start(model, alpha)?)?,
    ])
}

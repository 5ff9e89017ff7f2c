//! Per-cell comparison of computed tables with the bundled reference tables.

use std::fmt;
use std::path::{Path, PathBuf};

use qstaff_core::reference::{high_start, ReferenceCell, ReferenceTable};
use qstaff_core::{InitialState, InputModel};

use crate::commands::TableRow;
use crate::config::Tolerances;
use crate::error::CliError;
use crate::output::{num, opt_num, write_csv, Provenance};

const MATCH_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    Mismatch,
    Excluded(&'static str),
    NoReference,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Status::Ok => f.write_str("ok"),
            Status::Mismatch => f.write_str("MISMATCH"),
            Status::Excluded(why) => f.write_str(why),
            Status::NoReference => f.write_str("no reference"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiffCell {
    pub alpha: f64,
    pub horizon: f64,
    pub start: String,
    pub quantity: &'static str,
    pub computed: f64,
    pub reference: Option<f64>,
    pub tolerance: f64,
    pub status: Status,
}

impl DiffCell {
    pub fn deviation(&self) -> Option<f64> {
        self.reference.map(|r| self.computed - r)
    }

    pub fn describe(&self) -> String {
        format!(
            "alpha={} T={} x={} {}: computed {:.4}, reference {}, tolerance {:.4}",
            num(self.alpha),
            num(self.horizon),
            self.start,
            self.quantity,
            self.computed,
            self.reference.map_or("NA".into(), |r| format!("{r:.3}")),
            self.tolerance
        )
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Summary {
    pub ok: usize,
    pub mismatch: usize,
    pub excluded: usize,
    pub unmatched: usize,
}

impl Summary {
    pub fn of(cells: &[DiffCell]) -> Self {
        let mut s = Self::default();
        for c in cells {
            match c.status {
                Status::Ok => s.ok += 1,
                Status::Mismatch => s.mismatch += 1,
                Status::Excluded(_) => s.excluded += 1,
                Status::NoReference => s.unmatched += 1,
            }
        }
        s
    }
}

impl fmt::Display for Summary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} ok, {} mismatch, {} excluded, {} without reference",
            self.ok, self.mismatch, self.excluded, self.unmatched
        )
    }
}

/// Reference cell for a computed row, if the table has one.
fn reference_for(
    table: ReferenceTable,
    model: &InputModel,
    row: &TableRow,
) -> Result<Option<ReferenceCell>, CliError> {
    let InitialState::Deterministic(x) = row.init else {
        return Ok(None);
    };
    let Some(r) = table.rows().iter().find(|r| {
        (r.alpha - row.alpha).abs() < MATCH_TOL && (r.horizon - row.horizon).abs() < MATCH_TOL
    }) else {
        return Ok(None);
    };
    if x.abs() < MATCH_TOL {
        return Ok(Some(r.empty));
    }
    if (x - high_start(model, row.alpha)?).abs() < MATCH_TOL {
        return Ok(Some(r.high));
    }
    Ok(None)
}

pub fn diff(
    table: ReferenceTable,
    model: &InputModel,
    rows: &[TableRow],
    tol: &Tolerances,
) -> Result<Vec<DiffCell>, CliError> {
    let mut cells = Vec::new();
    for row in rows {
        let c = &row.comparison;
        let reference = reference_for(table, model, row)?;
        let cost_tol = |hw: f64| {
            if row.exact {
                tol.exact_abs
            } else {
                tol.cost_abs.max(tol.ci_multiplier * hw)
            }
        };
        let quantities = [
            (
                "mu_inf",
                c.mu_inf,
                reference.map(|r| r.mu_inf),
                tol.staffing_abs,
            ),
            (
                "pi_mu_inf",
                c.pi_at_mu_inf.mean,
                reference.map(|r| r.pi_mu_inf),
                cost_tol(c.pi_at_mu_inf.half_width),
            ),
            (
                "mu_tilde",
                c.mu_tilde,
                reference.map(|r| r.mu_tilde),
                tol.staffing_abs,
            ),
            (
                "pi_mu_tilde",
                c.pi_at_mu_tilde.mean,
                reference.map(|r| r.pi_mu_tilde),
                cost_tol(c.pi_at_mu_tilde.half_width),
            ),
            (
                "rel_reduction",
                c.rel_reduction,
                reference.map(|r| r.rel_reduction),
                tol.reduction_abs,
            ),
        ];
        for (quantity, computed, reference, tolerance) in quantities {
            let status = match (table.exclusion(row.alpha), reference) {
                (_, None) => Status::NoReference,
                (Some(why), Some(_)) => Status::Excluded(why),
                (None, Some(r)) if (computed - r).abs() <= tolerance => Status::Ok,
                (None, Some(_)) => Status::Mismatch,
            };
            cells.push(DiffCell {
                alpha: row.alpha,
                horizon: row.horizon,
                start: row.start.clone(),
                quantity,
                computed,
                reference,
                tolerance,
                status,
            });
        }
    }
    Ok(cells)
}

pub fn write_report(
    dir: &Path,
    file: &str,
    prov: &Provenance,
    cells: &[DiffCell],
) -> Result<PathBuf, CliError> {
    let rows: Vec<Vec<String>> = cells
        .iter()
        .map(|c| {
            vec![
                num(c.alpha),
                num(c.horizon),
                c.start.clone(),
                c.quantity.to_string(),
                num(c.computed),
                opt_num(c.reference),
                opt_num(c.deviation()),
                num(c.tolerance),
                c.status.to_string(),
            ]
        })
        .collect();
    write_csv(
        dir,
        file,
        prov,
        &[
            "alpha",
            "T",
            "x",
            "quantity",
            "computed",
            "reference",
            "deviation",
            "tolerance",
            "status",
        ],
        &rows,
    )
}

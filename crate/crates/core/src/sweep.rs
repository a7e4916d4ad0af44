//! Sensitivity runs over the overconfidence factor `k`.
//!
//! Three modes:
//! - fixed exercise price: solve the coordinating premium `c0(k)`;
//! - fixed premium: solve the coordinating exercise price `ce(k)`;
//! - fixed contract: keep `(c0, ce)` and let the plan move with `k`.
//!
//! A `k` that cannot be solved or is infeasible yields a flagged row; a sweep
//! never aborts part-way.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::demand::DemandDistribution;
use crate::error::{Error, Result};
use crate::optimizer::{coordinating_exercise_price, coordinating_premium, optimal_plan};
use crate::profit::{
    chain_expected_profit, retailer_expected_profit, supplier_expected_profit, MarketParams, OptionContract,
    Overconfidence,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepMode {
    FixedExercisePrice,
    FixedPremium,
    FixedContract,
}

impl SweepMode {
    pub fn name(self) -> &'static str {
        match self {
            Self::FixedExercisePrice => "fixed-exercise-price",
            Self::FixedPremium => "fixed-premium",
            Self::FixedContract => "fixed-contract",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepScenario {
    mode: SweepMode,
    fixed: Option<f64>,
    k_grid: Vec<f64>,
    demand: DemandDistribution,
    market: MarketParams,
    contract: Option<OptionContract>,
}

impl SweepScenario {
    /// `fixed` is the exercise price in [`SweepMode::FixedExercisePrice`] and
    /// the premium in [`SweepMode::FixedPremium`]; [`SweepMode::FixedContract`]
    /// takes `contract` instead.
    pub fn new(
        mode: SweepMode,
        fixed: Option<f64>,
        k_grid: Vec<f64>,
        demand: DemandDistribution,
        market: MarketParams,
        contract: Option<OptionContract>,
    ) -> Result<Self> {
        if k_grid.is_empty() {
            return Err(Error::InvalidParameter("k grid is empty".to_string()));
        }
        if let Some(bad) = k_grid.iter().find(|k| !(k.is_finite() && **k > 0.0)) {
            return Err(Error::InvalidParameter(format!(
                "k grid values must be > 0, got {bad}"
            )));
        }
        if k_grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter(
                "k grid must be strictly increasing".to_string(),
            ));
        }
        match mode {
            SweepMode::FixedExercisePrice | SweepMode::FixedPremium => match fixed {
                Some(v) if v.is_finite() && v > 0.0 => {}
                Some(v) => {
                    return Err(Error::InvalidParameter(format!(
                        "{} needs a positive fixed value, got {v}",
                        mode.name()
                    )))
                }
                None => {
                    return Err(Error::InvalidParameter(format!(
                        "{} needs a fixed value",
                        mode.name()
                    )))
                }
            },
            SweepMode::FixedContract => {
                if contract.is_none() {
                    return Err(Error::InvalidParameter(
                        "fixed-contract mode needs a contract".to_string(),
                    ));
                }
            }
        }
        Ok(Self {
            mode,
            fixed,
            k_grid,
            demand,
            market,
            contract,
        })
    }

    pub fn mode(&self) -> SweepMode {
        self.mode
    }

    pub fn k_grid(&self) -> &[f64] {
        &self.k_grid
    }
}

/// Evenly spaced `k` values from `start` to `stop` inclusive.
pub fn k_grid(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if !(start.is_finite() && stop.is_finite() && step.is_finite() && step > 0.0 && stop >= start) {
        return Err(Error::InvalidParameter(format!(
            "k grid needs start <= stop and step > 0, got ({start}, {stop}, {step})"
        )));
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| start + i as f64 * step).collect())
}

/// One `k` of a sweep. Infeasible rows keep only `k` and carry the reason
/// in `note`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub k: f64,
    pub c0: Option<f64>,
    pub ce: Option<f64>,
    pub q_total: Option<f64>,
    pub q_spot: Option<f64>,
    pub q_option: Option<f64>,
    /// Retailer profit under its own (believed) demand.
    pub retailer_profit_believed: Option<f64>,
    /// Retailer profit for the same plan under true demand.
    pub retailer_profit_true: Option<f64>,
    pub supplier_profit: Option<f64>,
    pub chain_profit: Option<f64>,
    pub feasible: bool,
    pub note: String,
}

impl SweepRow {
    fn infeasible(k: f64, note: String) -> Self {
        Self {
            k,
            c0: None,
            ce: None,
            q_total: None,
            q_spot: None,
            q_option: None,
            retailer_profit_believed: None,
            retailer_profit_true: None,
            supplier_profit: None,
            chain_profit: None,
            feasible: false,
            note,
        }
    }

    /// Numeric columns in output order.
    pub fn columns(&self) -> [(&'static str, Option<f64>); 9] {
        [
            ("c0", self.c0),
            ("ce", self.ce),
            ("q_total", self.q_total),
            ("q_spot", self.q_spot),
            ("q_option", self.q_option),
            ("retailer_profit_believed", self.retailer_profit_believed),
            ("retailer_profit_true", self.retailer_profit_true),
            ("supplier_profit", self.supplier_profit),
            ("chain_profit", self.chain_profit),
        ]
    }
}

fn unsolved_note(e: Error) -> String {
    match e {
        Error::NonCoordinable { c0, ce, report } => {
            format!("not coordinable at c0={c0:.6} ce={ce:.6}: {report}")
        }
        other => other.to_string(),
    }
}

fn evaluate_row(s: &SweepScenario, k: f64) -> SweepRow {
    let (d, m) = (&s.demand, &s.market);
    let kk = Overconfidence::new(k);
    let contract = match s.mode {
        SweepMode::FixedExercisePrice => {
            let ce = s.fixed.expect("validated");
            coordinating_premium(d, m, ce, kk).map(|c0| OptionContract::new(c0, ce))
        }
        SweepMode::FixedPremium => {
            let c0 = s.fixed.expect("validated");
            coordinating_exercise_price(d, m, c0, kk).map(|ce| OptionContract::new(c0, ce))
        }
        SweepMode::FixedContract => Ok(s.contract.expect("validated")),
    };
    let contract = match contract {
        Ok(o) => o,
        Err(e) => return SweepRow::infeasible(k, unsolved_note(e)),
    };
    let plan = match optimal_plan(d, m, &contract, kk) {
        Ok(plan) => plan,
        Err(e) => return SweepRow::infeasible(k, e.to_string()),
    };
    let profits = retailer_expected_profit(d, m, &contract, kk, &plan).and_then(|believed| {
        let truth = retailer_expected_profit(d, m, &contract, Overconfidence::RATIONAL, &plan)?;
        let supplier = supplier_expected_profit(d, m, &contract, &plan)?;
        Ok((believed.total, truth.total, supplier))
    });
    let (believed, truth, supplier) = match profits {
        Ok(v) => v,
        Err(e) => return SweepRow::infeasible(k, e.to_string()),
    };
    SweepRow {
        k,
        c0: Some(contract.c0),
        ce: Some(contract.ce),
        q_total: Some(plan.q_total()),
        q_spot: Some(plan.q_spot()),
        q_option: Some(plan.q_option()),
        retailer_profit_believed: Some(believed),
        retailer_profit_true: Some(truth),
        supplier_profit: Some(supplier),
        chain_profit: Some(chain_expected_profit(d, m, plan.q_total())),
        feasible: true,
        note: String::new(),
    }
}

/// Solves every `k` of the scenario. Output is ordered by `k`.
pub fn run_sweep(s: &SweepScenario) -> Vec<SweepRow> {
    s.k_grid.par_iter().map(|&k| evaluate_row(s, k)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Trend {
    StrictlyIncreasing,
    StrictlyDecreasing,
    /// Includes constant columns. Carries the `k` values of the first
    /// adjacent pair that breaks the direction set by the first pair.
    NonMonotone {
        first_violation: (f64, f64),
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ColumnTrend {
    pub column: &'static str,
    pub trend: Trend,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonotonicityReport {
    pub feasible_rows: usize,
    pub columns: Vec<ColumnTrend>,
}

impl MonotonicityReport {
    pub fn trend(&self, column: &str) -> Option<Trend> {
        self.columns.iter().find(|c| c.column == column).map(|c| c.trend)
    }
}

impl fmt::Display for MonotonicityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "monotonicity over {} feasible rows:", self.feasible_rows)?;
        for c in &self.columns {
            match c.trend {
                Trend::StrictlyIncreasing => writeln!(f, "  {}: strictly increasing", c.column)?,
                Trend::StrictlyDecreasing => writeln!(f, "  {}: strictly decreasing", c.column)?,
                Trend::NonMonotone {
                    first_violation: (a, b),
                } => writeln!(
                    f,
                    "  {}: non-monotone (first violation between k={a:.6} and k={b:.6})",
                    c.column
                )?,
            }
        }
        Ok(())
    }
}

const MIN_ROWS: usize = 3;

// Differences within this relative band count as ties.
const TIE_TOL: f64 = 1e-9;

fn classify(points: &[(f64, f64)]) -> Trend {
    let step_sign = |a: f64, b: f64| {
        let tol = TIE_TOL * a.abs().max(b.abs()).max(1.0);
        if b - a > tol {
            1
        } else if a - b > tol {
            -1
        } else {
            0
        }
    };
    let direction = step_sign(points[0].1, points[1].1);
    for w in points.windows(2) {
        let s = step_sign(w[0].1, w[1].1);
        if s == 0 || s != direction {
            return Trend::NonMonotone {
                first_violation: (w[0].0, w[1].0),
            };
        }
    }
    if direction > 0 {
        Trend::StrictlyIncreasing
    } else {
        Trend::StrictlyDecreasing
    }
}

/// Classifies each numeric column over the feasible rows.
pub fn monotonicity_report(rows: &[SweepRow]) -> Result<MonotonicityReport> {
    let feasible: Vec<&SweepRow> = rows.iter().filter(|r| r.feasible).collect();
    if feasible.len() < MIN_ROWS {
        return Err(Error::TooFewRows {
            found: feasible.len(),
            needed: MIN_ROWS,
        });
    }
    let names = feasible[0].columns().map(|(name, _)| name);
    let columns = names
        .iter()
        .enumerate()
        .filter_map(|(idx, &column)| {
            let points: Vec<(f64, f64)> = feasible
                .iter()
                .filter_map(|r| r.columns()[idx].1.map(|v| (r.k, v)))
                .collect();
            (points.len() >= 2).then(|| ColumnTrend {
                column,
                trend: classify(&points),
            })
        })
        .collect();
    Ok(MonotonicityReport {
        feasible_rows: feasible.len(),
        columns,
    })
}

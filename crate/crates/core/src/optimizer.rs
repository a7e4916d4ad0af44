//! Closed-form order plans and channel-coordinating contract terms.
//!
//! Both retailer quantities are critical-fractile solutions. With the
//! believed demand scale `θk`, stocked quantity `Q(1−β)` must equal
//! `θk·F⁻¹(·)` at
//!
//! ```text
//! total fractile  (p + g − ce − c0) / (p + g − ce)
//! spot fractile   (c0 + ce − w0) / ce
//! ```
//!
//! The integrated chain uses `((p+g)(1−β) − c) / ((p+g)(1−β))` under true
//! demand. A contract coordinates the channel when the retailer's total order
//! equals the chain optimum; [`coordinating_premium`] solves for `c0` in
//! closed form and [`coordinating_exercise_price`] solves for `ce` by
//! bisection, which works for every demand family.

use std::fmt;

use serde::Serialize;

use crate::demand::DemandDistribution;
use crate::error::{Error, Result};
use crate::profit::{MarketParams, OptionContract, OrderPlan, Overconfidence};
use crate::roots;

/// Fractiles are clamped into `[FRACTILE_EPS, 1 − FRACTILE_EPS]` before the
/// quantile is taken; `F⁻¹(1)` is unbounded for the unbounded families.
pub const FRACTILE_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ViolationKind {
    /// `w0 < c0 + ce` fails: pure option buying would dominate.
    Assumption4,
    FractileRangeTotal,
    FractileRangeSpot,
    /// Spot fractile above total fractile, so `Q_q* < 0`.
    NegativeOptionQuantity,
    KDomain,
}

impl ViolationKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Assumption4 => "assumption-4",
            Self::FractileRangeTotal => "fractile-range-total",
            Self::FractileRangeSpot => "fractile-range-spot",
            Self::NegativeOptionQuantity => "negative-option-quantity",
            Self::KDomain => "k-domain",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub detail: String,
}

/// Outcome of [`check_feasibility`]; `ok` holds exactly when `violations`
/// is empty.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeasibilityReport {
    pub ok: bool,
    pub violations: Vec<Violation>,
}

impl FeasibilityReport {
    fn from_violations(violations: Vec<Violation>) -> Self {
        Self {
            ok: violations.is_empty(),
            violations,
        }
    }

    pub fn has(&self, kind: ViolationKind) -> bool {
        self.violations.iter().any(|v| v.kind == kind)
    }
}

impl fmt::Display for FeasibilityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.ok {
            return f.write_str("ok");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{} ({})", v.kind.name(), v.detail)?;
        }
        Ok(())
    }
}

/// A critical fractile after clamping.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Fractile {
    pub value: f64,
    /// Set when the raw fractile was outside the clamp window.
    pub clamped: bool,
}

impl Fractile {
    fn clamp(raw: f64) -> Self {
        let value = raw.clamp(FRACTILE_EPS, 1.0 - FRACTILE_EPS);
        Self {
            value,
            clamped: value != raw,
        }
    }
}

fn total_fractile(m: &MarketParams, o: &OptionContract) -> f64 {
    let margin = m.p + m.g - o.ce;
    (margin - o.c0) / margin
}

fn spot_fractile(m: &MarketParams, o: &OptionContract) -> f64 {
    (o.c0 + o.ce - m.w0) / o.ce
}

fn in_unit_interval(x: f64) -> bool {
    x > 0.0 && x < 1.0
}

/// Screens a contract and overconfidence level. Never fails; problems are
/// listed in the report.
pub fn check_feasibility(m: &MarketParams, o: &OptionContract, k: Overconfidence) -> FeasibilityReport {
    let mut v = Vec::new();
    if !(m.w0 < o.c0 + o.ce) {
        v.push(Violation {
            kind: ViolationKind::Assumption4,
            detail: format!("w0 = {} is not below c0 + ce = {}", m.w0, o.c0 + o.ce),
        });
    }
    let total = total_fractile(m, o);
    if !in_unit_interval(total) {
        v.push(Violation {
            kind: ViolationKind::FractileRangeTotal,
            detail: format!("(p+g-ce-c0)/(p+g-ce) = {total} is outside (0, 1)"),
        });
    }
    let spot = spot_fractile(m, o);
    if !in_unit_interval(spot) {
        v.push(Violation {
            kind: ViolationKind::FractileRangeSpot,
            detail: format!("(c0+ce-w0)/ce = {spot} is outside (0, 1)"),
        });
    }
    if in_unit_interval(total) && in_unit_interval(spot) && spot > total {
        v.push(Violation {
            kind: ViolationKind::NegativeOptionQuantity,
            detail: format!("spot fractile {spot} exceeds total fractile {total}"),
        });
    }
    if !k.is_valid() {
        v.push(Violation {
            kind: ViolationKind::KDomain,
            detail: format!("k = {} must be finite and > 0", k.value()),
        });
    }
    FeasibilityReport::from_violations(v)
}

/// The retailer's optimal spot and option orders.
pub fn optimal_plan(
    d: &DemandDistribution,
    m: &MarketParams,
    o: &OptionContract,
    k: Overconfidence,
) -> Result<OrderPlan> {
    let report = check_feasibility(m, o, k);
    if !report.ok {
        return Err(Error::Infeasible(report));
    }
    let scale = k.value() * m.theta / m.retention();
    let q_total = scale * d.quantile(total_fractile(m, o))?;
    let q_spot = scale * d.quantile(spot_fractile(m, o))?;
    // Equal fractiles can leave a rounding-level negative remainder.
    OrderPlan::new(q_spot, (q_total - q_spot).max(0.0))
}

/// The chain's critical fractile, clamped for quantile evaluation.
pub fn centralized_fractile(m: &MarketParams) -> Result<Fractile> {
    let margin = (m.p + m.g) * m.retention();
    let raw = (margin - m.c) / margin;
    if !(raw > 0.0) {
        return Err(Error::CentralizedInfeasible {
            c: m.c,
            bound: margin,
        });
    }
    Ok(Fractile::clamp(raw))
}

/// The integrated chain's optimal order `Q**`. Independent of `k` and of the
/// contract.
pub fn optimal_centralized(d: &DemandDistribution, m: &MarketParams) -> Result<f64> {
    let fractile = centralized_fractile(m)?;
    Ok(m.theta / m.retention() * d.quantile(fractile.value)?)
}

/// Premium `c0` that makes the retailer's total order equal `Q**` at the
/// given exercise price.
///
/// Returns [`Error::NonCoordinable`] (carrying the solved `c0`) when the
/// resulting contract fails [`check_feasibility`].
pub fn coordinating_premium(
    d: &DemandDistribution,
    m: &MarketParams,
    ce: f64,
    k: Overconfidence,
) -> Result<f64> {
    if !k.is_valid() {
        return Err(Error::InvalidParameter(format!(
            "overconfidence k must be > 0, got {}",
            k.value()
        )));
    }
    let fractile = centralized_fractile(m)?;
    let chain_quantile = d.quantile(fractile.value)?;
    let c0 = (m.p + m.g - ce) * (1.0 - d.cdf(chain_quantile / k.value()));
    let report = check_feasibility(m, &OptionContract::new(c0, ce), k);
    if report.ok {
        Ok(c0)
    } else {
        Err(Error::NonCoordinable { c0, ce, report })
    }
}

/// Exercise price `ce` that makes the retailer's total order equal `Q**` at
/// the given premium, found by bisection on `Q*(ce) − Q**` over
/// `(0, p + g − c0)`.
pub fn coordinating_exercise_price(
    d: &DemandDistribution,
    m: &MarketParams,
    c0: f64,
    k: Overconfidence,
) -> Result<f64> {
    if !k.is_valid() {
        return Err(Error::InvalidParameter(format!(
            "overconfidence k must be > 0, got {}",
            k.value()
        )));
    }
    let upper = m.p + m.g - c0;
    if !(c0 > 0.0 && upper > 0.0) {
        return Err(Error::NoRoot(format!("premium c0 = {c0} must lie in (0, p + g)")));
    }
    let target = optimal_centralized(d, m)?;
    let scale = k.value() * m.theta / m.retention();
    // Q*(ce) is decreasing in ce: the total fractile 1 − c0/(p+g−ce) falls from
    // 1 − c0/(p+g) at ce = 0 to 0 at ce = p + g − c0.
    let residual = |ce: f64| {
        let fractile = Fractile::clamp(1.0 - c0 / (m.p + m.g - ce)).value;
        scale * d.inverse_transform(fractile) - target
    };
    let at_low = residual(0.0);
    let at_high = residual(upper);
    if at_low < 0.0 {
        return Err(Error::NoRoot(format!(
            "at k = {} the largest reachable total order {:.6} is below the chain optimum {target:.6}; \
             no exercise price in (0, {upper}) coordinates",
            k.value(),
            at_low + target
        )));
    }
    if at_high > 0.0 {
        return Err(Error::NoRoot(format!(
            "at k = {} the smallest reachable total order {:.6} exceeds the chain optimum {target:.6}",
            k.value(),
            at_high + target
        )));
    }
    let ce = roots::bisect(residual, 0.0, upper, 200)
        .ok_or_else(|| Error::NoRoot("residual does not change sign".to_string()))?;
    if !(ce > 0.0 && ce < upper) {
        return Err(Error::NoRoot(format!(
            "root {ce} lies on the boundary of (0, {upper})"
        )));
    }
    let report = check_feasibility(m, &OptionContract::new(c0, ce), k);
    if report.ok {
        Ok(ce)
    } else {
        Err(Error::NonCoordinable { c0, ce, report })
    }
}

//! Expected and realized profits.
//!
//! Two demand measures coexist. The retailer plans against believed demand
//! `θ·k·x`; the supplier and the chain are paid on true demand `θ·x`. The
//! closed forms below take `∫₀ᵃ F` from [`DemandDistribution::cdf_integral`];
//! the `realized_*` functions give the per-outcome profit so a simulation can
//! check each closed form independently.
//!
//! Units: quantities are ordered units before transport loss. A fraction
//! `beta` is lost in transit, so `Q` ordered units put `Q(1−β)` on the shelf.

use serde::{Deserialize, Serialize};

use crate::demand::DemandDistribution;
use crate::error::{Error, Result};
use crate::optimizer;

/// Prices, costs and product-loss parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarketParams {
    /// Retail price per unit sold.
    pub p: f64,
    /// Penalty per unit of unmet demand.
    pub g: f64,
    /// Spot-market wholesale price.
    pub w0: f64,
    /// Supplier's unit production cost.
    pub c: f64,
    /// Fraction of ordered units lost in transport and unloading.
    pub beta: f64,
    /// Freshness factor scaling effective demand.
    pub theta: f64,
}

impl MarketParams {
    /// Builds a parameter set and checks `p > w0 > c > 0`, `g ≥ 0`,
    /// `0 < beta < 1` and `0 < theta ≤ 1`.
    pub fn new(p: f64, g: f64, w0: f64, c: f64, beta: f64, theta: f64) -> Result<Self> {
        let m = Self {
            p,
            g,
            w0,
            c,
            beta,
            theta,
        };
        match m.violations().first() {
            None => Ok(m),
            Some((field, msg)) => Err(Error::InvalidParameter(format!("{field}: {msg}"))),
        }
    }

    pub fn violations(&self) -> Vec<(&'static str, String)> {
        let mut out = Vec::new();
        let all_finite = [self.p, self.g, self.w0, self.c, self.beta, self.theta]
            .iter()
            .all(|v| v.is_finite());
        if !all_finite {
            out.push(("market", "all parameters must be finite".to_string()));
            return out;
        }
        if self.p <= self.w0 {
            out.push((
                "p",
                format!("sale price {} must exceed wholesale price {}", self.p, self.w0),
            ));
        }
        if self.w0 <= self.c {
            out.push((
                "w0",
                format!(
                    "wholesale price {} must exceed production cost {}",
                    self.w0, self.c
                ),
            ));
        }
        if self.c <= 0.0 {
            out.push(("c", format!("production cost must be > 0, got {}", self.c)));
        }
        if self.g < 0.0 {
            out.push(("g", format!("stockout penalty must be >= 0, got {}", self.g)));
        }
        if !(self.beta > 0.0 && self.beta < 1.0) {
            out.push((
                "beta",
                format!("loss fraction must lie in (0, 1), got {}", self.beta),
            ));
        }
        if !(self.theta > 0.0 && self.theta <= 1.0) {
            out.push((
                "theta",
                format!("freshness must lie in (0, 1], got {}", self.theta),
            ));
        }
        out
    }

    /// Share of ordered units that survive transport, `1 − β`.
    pub fn retention(&self) -> f64 {
        1.0 - self.beta
    }
}

/// Call-option terms: premium `c0` paid per reserved unit, exercise price
/// `ce` paid per unit called.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptionContract {
    pub c0: f64,
    pub ce: f64,
}

impl OptionContract {
    pub fn new(c0: f64, ce: f64) -> Self {
        Self { c0, ce }
    }

    /// Contract conditions relative to a market, as `(field, message)` pairs.
    pub fn violations(&self, m: &MarketParams) -> Vec<(&'static str, String)> {
        let mut out = Vec::new();
        if !(self.c0.is_finite() && self.c0 > 0.0) {
            out.push(("c0", format!("premium must be > 0, got {}", self.c0)));
        }
        if !(self.ce.is_finite() && self.ce > 0.0) {
            out.push(("ce", format!("exercise price must be > 0, got {}", self.ce)));
        }
        if !(m.w0 < self.c0 + self.ce) {
            out.push((
                "c0",
                format!(
                    "c0 + ce = {} must exceed wholesale price {}",
                    self.c0 + self.ce,
                    m.w0
                ),
            ));
        }
        if !(self.c0 + self.ce < m.p + m.g) {
            out.push((
                "ce",
                format!(
                    "c0 + ce = {} must be below p + g = {}",
                    self.c0 + self.ce,
                    m.p + m.g
                ),
            ));
        }
        out
    }

    pub fn check(&self, m: &MarketParams) -> Result<()> {
        let v = self.violations(m);
        if v.is_empty() {
            return Ok(());
        }
        let msg = v
            .iter()
            .map(|(f, m)| format!("{f}: {m}"))
            .collect::<Vec<_>>()
            .join("; ");
        Err(Error::InfeasibleContract(msg))
    }
}

/// Overconfidence multiplier `k`: the retailer believes demand is `k·θ·x`.
/// `k > 1` is optimistic, `0 < k < 1` pessimistic, `k = 1` rational.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Overconfidence(f64);

impl Overconfidence {
    pub const RATIONAL: Self = Self(1.0);

    /// Wraps `k` without checking; screening happens in
    /// [`optimizer::check_feasibility`] and the profit evaluators.
    pub const fn new(k: f64) -> Self {
        Self(k)
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_valid(self) -> bool {
        self.0.is_finite() && self.0 > 0.0
    }

    fn checked(self) -> Result<f64> {
        if self.is_valid() {
            Ok(self.0)
        } else {
            Err(Error::InvalidParameter(format!(
                "overconfidence k must be > 0, got {}",
                self.0
            )))
        }
    }
}

impl From<f64> for Overconfidence {
    fn from(k: f64) -> Self {
        Self(k)
    }
}

/// Spot order `Q₁` plus option reservation `Q_q`; `q_total` is always their sum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OrderPlan {
    q_spot: f64,
    q_option: f64,
    q_total: f64,
}

impl OrderPlan {
    pub fn new(q_spot: f64, q_option: f64) -> Result<Self> {
        if !(q_spot.is_finite() && q_spot >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "spot quantity must be >= 0, got {q_spot}"
            )));
        }
        if !(q_option.is_finite() && q_option >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "option quantity must be >= 0, got {q_option}"
            )));
        }
        Ok(Self {
            q_spot,
            q_option,
            q_total: q_spot + q_option,
        })
    }

    pub fn empty() -> Self {
        Self {
            q_spot: 0.0,
            q_option: 0.0,
            q_total: 0.0,
        }
    }

    pub fn q_spot(&self) -> f64 {
        self.q_spot
    }

    pub fn q_option(&self) -> f64 {
        self.q_option
    }

    pub fn q_total(&self) -> f64 {
        self.q_total
    }

    /// Both components multiplied by `factor ≥ 0`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.q_spot * factor, self.q_option * factor)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProfitTerm {
    pub name: &'static str,
    pub value: f64,
}

/// An expected profit with its additive components.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProfitBreakdown {
    pub total: f64,
    pub terms: Vec<ProfitTerm>,
}

impl ProfitBreakdown {
    pub fn term(&self, name: &str) -> Option<f64> {
        self.terms.iter().find(|t| t.name == name).map(|t| t.value)
    }

    pub fn sum_of_terms(&self) -> f64 {
        self.terms.iter().map(|t| t.value).sum()
    }
}

/// Inputs to the retailer's expected-profit formula once the two partial
/// integrals are known. Shared by the direct evaluator and the grid oracle,
/// which precomputes the integrals on its lattice.
#[derive(Debug, Clone, Copy)]
pub(crate) struct RetailerSurface {
    pub m: MarketParams,
    pub o: OptionContract,
    /// Believed demand scale `θk`.
    pub scale: f64,
    pub mean: f64,
}

impl RetailerSurface {
    pub fn new(d: &DemandDistribution, m: &MarketParams, o: &OptionContract, k: f64) -> Self {
        Self {
            m: *m,
            o: *o,
            scale: m.theta * k,
            mean: d.mean(),
        }
    }

    /// Upper integration limit for a stocked quantity: `Q(1−β)/(θk)`.
    pub fn limit(&self, q: f64) -> f64 {
        q * self.m.retention() / self.scale
    }

    /// Expected retailer profit given `∫₀^{limit(Q)} F` and `∫₀^{limit(Q₁)} F`.
    pub fn total(&self, q_spot: f64, q_option: f64, int_total: f64, int_spot: f64) -> f64 {
        let MarketParams { p, g, w0, .. } = self.m;
        let OptionContract { c0, ce } = self.o;
        let r = self.m.retention();
        let s = self.scale;
        (p + g) * (q_spot + q_option) * r
            - (p + g - ce) * s * int_total
            - (c0 + ce) * q_option * r
            - ce * s * int_spot
            - w0 * q_spot * r
            - g * s * self.mean
    }

    pub fn breakdown(&self, d: &DemandDistribution, plan: &OrderPlan) -> ProfitBreakdown {
        let MarketParams { p, g, w0, .. } = self.m;
        let OptionContract { c0, ce } = self.o;
        let r = self.m.retention();
        let s = self.scale;
        let stocked = plan.q_total() * r;
        let spot = plan.q_spot() * r;
        let reserved = plan.q_option() * r;
        let int_total = d.cdf_integral(self.limit(plan.q_total()));
        let int_spot = d.cdf_integral(self.limit(plan.q_spot()));

        let expected_sales = stocked - s * int_total;
        let expected_exercise = expected_sales - (spot - s * int_spot);
        let expected_shortage = s * self.mean - expected_sales;

        ProfitBreakdown {
            total: self.total(plan.q_spot(), plan.q_option(), int_total, int_spot),
            terms: vec![
                ProfitTerm {
                    name: "revenue",
                    value: p * expected_sales,
                },
                ProfitTerm {
                    name: "premium_cost",
                    value: -c0 * reserved,
                },
                ProfitTerm {
                    name: "exercise_cost",
                    value: -ce * expected_exercise,
                },
                ProfitTerm {
                    name: "wholesale_cost",
                    value: -w0 * spot,
                },
                ProfitTerm {
                    name: "shortage_cost",
                    value: -g * expected_shortage,
                },
            ],
        }
    }
}

/// Retailer's expected profit under believed demand `θk·x`.
pub fn retailer_expected_profit(
    d: &DemandDistribution,
    m: &MarketParams,
    o: &OptionContract,
    k: Overconfidence,
    plan: &OrderPlan,
) -> Result<ProfitBreakdown> {
    o.check(m)?;
    let k = k.checked()?;
    Ok(RetailerSurface::new(d, m, o, k).breakdown(d, plan))
}

/// `(∂/∂Q₁, ∂/∂Q_q)` of [`retailer_expected_profit`].
pub fn retailer_profit_gradient(
    d: &DemandDistribution,
    m: &MarketParams,
    o: &OptionContract,
    k: Overconfidence,
    plan: &OrderPlan,
) -> Result<(f64, f64)> {
    o.check(m)?;
    let k = k.checked()?;
    let surface = RetailerSurface::new(d, m, o, k);
    let MarketParams { p, g, w0, .. } = *m;
    let OptionContract { c0, ce } = *o;
    let r = m.retention();
    let f_total = d.cdf(surface.limit(plan.q_total()));
    let f_spot = d.cdf(surface.limit(plan.q_spot()));
    let shared = (p + g) - (p + g - ce) * f_total;
    let d_option = r * (shared - (c0 + ce));
    let d_spot = r * (shared - ce * f_spot - w0);
    Ok((d_spot, d_option))
}

/// Supplier's expected profit under true demand `θ·x`.
pub fn supplier_expected_profit(
    d: &DemandDistribution,
    m: &MarketParams,
    o: &OptionContract,
    plan: &OrderPlan,
) -> Result<f64> {
    o.check(m)?;
    let OptionContract { c0, ce } = *o;
    let r = m.retention();
    let theta = m.theta;
    let int_total = d.cdf_integral(plan.q_total() * r / theta);
    let int_spot = d.cdf_integral(plan.q_spot() * r / theta);
    Ok(
        m.w0 * plan.q_spot() * r + (c0 + ce) * plan.q_option() * r - ce * theta * int_total
            + ce * theta * int_spot
            - m.c * plan.q_total(),
    )
}

/// Supplier profit when the retailer is rational minus supplier profit when
/// the retailer has overconfidence `k`, each at the retailer's optimal plan.
pub fn supplier_profit_gap(
    d: &DemandDistribution,
    m: &MarketParams,
    o: &OptionContract,
    k: Overconfidence,
) -> Result<f64> {
    let to_contract_error = |e: Error| match e {
        Error::Infeasible(report) => Error::InfeasibleContract(report.to_string()),
        other => other,
    };
    let rational = optimizer::optimal_plan(d, m, o, Overconfidence::RATIONAL).map_err(to_contract_error)?;
    let biased = optimizer::optimal_plan(d, m, o, k).map_err(to_contract_error)?;
    Ok(supplier_expected_profit(d, m, o, &rational)? - supplier_expected_profit(d, m, o, &biased)?)
}

/// Integrated chain's expected profit for total order `q_total ≥ 0`.
pub fn chain_expected_profit(d: &DemandDistribution, m: &MarketParams, q_total: f64) -> f64 {
    let r = m.retention();
    let stocked = q_total * r;
    (m.p + m.g) * stocked
        - (m.p + m.g) * m.theta * d.cdf_integral(stocked / m.theta)
        - m.c * q_total
        - m.g * m.theta * d.mean()
}

/// Retailer's profit for one demand outcome `x`, seen through demand scale
/// `d_scale` (use `θk` for the believed measure, `θ` for the true one).
pub fn realized_retailer_profit(
    x: f64,
    d_scale: f64,
    m: &MarketParams,
    o: &OptionContract,
    plan: &OrderPlan,
) -> f64 {
    let r = m.retention();
    let demand = d_scale * x;
    let spot = plan.q_spot() * r;
    let reserved = plan.q_option() * r;
    let stocked = plan.q_total() * r;
    let exercised = (demand - spot).max(0.0).min(reserved);
    let sales = demand.min(stocked);
    let shortage = (demand - stocked).max(0.0);
    m.p * sales - o.c0 * reserved - o.ce * exercised - m.w0 * spot - m.g * shortage
}

/// Supplier's profit for one outcome; exercise follows true demand `θx`.
pub fn realized_supplier_profit(x: f64, m: &MarketParams, o: &OptionContract, plan: &OrderPlan) -> f64 {
    let r = m.retention();
    let spot = plan.q_spot() * r;
    let reserved = plan.q_option() * r;
    let exercised = (m.theta * x - spot).max(0.0).min(reserved);
    m.w0 * spot + o.c0 * reserved + o.ce * exercised - m.c * plan.q_total()
}

/// Chain profit for one outcome.
pub fn realized_chain_profit(x: f64, m: &MarketParams, q_total: f64) -> f64 {
    let demand = m.theta * x;
    let stocked = q_total * m.retention();
    m.p * demand.min(stocked) - m.c * q_total - m.g * (demand - stocked).max(0.0)
}

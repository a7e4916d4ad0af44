//! Ordering decisions for a fresh-product retailer that can buy on the spot
//! market at a wholesale price and reserve extra units through call options,
//! while misjudging demand by an overconfidence factor `k`.
//!
//! The crate is layered bottom-up:
//!
//! - [`demand`]: the demand law `F`, its quantile, mean, the partial integral
//!   `∫₀ᵃ F(x) dx` and inverse-transform sampling.
//! - [`profit`]: expected and realized profits for retailer, supplier and the
//!   integrated chain.
//! - [`optimizer`]: closed-form optimal plans, feasibility screening and the
//!   contract terms that coordinate the channel.
//! - [`oracle`]: Monte-Carlo and grid-search cross-checks of the closed forms.
//! - [`sweep`]: sensitivity runs over the overconfidence factor.

// `!(a < b)` is used on purpose so that NaN inputs fail the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod demand;
mod error;
pub mod optimizer;
pub mod oracle;
pub mod profit;
pub mod quadrature;
pub mod roots;
pub mod sweep;

pub use demand::DemandDistribution;
pub use error::{Error, Result};
pub use optimizer::{
    centralized_fractile, check_feasibility, coordinating_exercise_price, coordinating_premium,
    optimal_centralized, optimal_plan, FeasibilityReport, Fractile, Violation, ViolationKind,
};
pub use oracle::{grid_search_plan, mc_expected, GridSpec, McEstimate, ProfitKind};
pub use profit::{
    chain_expected_profit, realized_chain_profit, realized_retailer_profit, realized_supplier_profit,
    retailer_expected_profit, retailer_profit_gradient, supplier_expected_profit, supplier_profit_gap,
    MarketParams, OptionContract, OrderPlan, Overconfidence, ProfitBreakdown, ProfitTerm,
};
pub use sweep::{
    k_grid, monotonicity_report, run_sweep, ColumnTrend, MonotonicityReport, SweepMode, SweepRow,
    SweepScenario, Trend,
};

use thiserror::Error;

use crate::optimizer::FeasibilityReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{what} = {value} is outside {range}")]
    OutOfRange {
        what: &'static str,
        value: f64,
        range: &'static str,
    },

    #[error("infeasible contract: {0}")]
    InfeasibleContract(String),

    #[error("infeasible: {0}")]
    Infeasible(FeasibilityReport),

    #[error("centralized problem infeasible: production cost {c} must be below (p+g)(1-beta) = {bound}")]
    CentralizedInfeasible { c: f64, bound: f64 },

    /// The coordinating term was solved but the resulting contract breaks a
    /// feasibility condition.
    #[error("contract (c0 = {c0}, ce = {ce}) coordinates the channel but is not feasible: {report}")]
    NonCoordinable {
        c0: f64,
        ce: f64,
        report: FeasibilityReport,
    },

    #[error("no root: {0}")]
    NoRoot(String),

    #[error("need at least {needed} feasible rows, found {found}")]
    TooFewRows { found: usize, needed: usize },
}

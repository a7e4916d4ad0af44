//! Independent checks of the closed forms.
//!
//! [`mc_expected`] averages realized profits over inverse-transform demand
//! draws, so it never touches `∫F`. [`grid_search_plan`] maximizes the
//! retailer's expected profit by exhaustive search and never touches `F⁻¹`.
//!
//! Monte-Carlo work is split into fixed-size chunks; chunk `i` draws from
//! ChaCha8 stream `i` of the seed, and chunk moments are merged in index
//! order. Results therefore depend only on `(seed, n)`, not on how many
//! threads ran.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::demand::DemandDistribution;
use crate::error::{Error, Result};
use crate::profit::{
    realized_chain_profit, realized_retailer_profit, realized_supplier_profit, MarketParams, OptionContract,
    OrderPlan, Overconfidence, RetailerSurface,
};

const CHUNK: u64 = 1 << 16;

/// Upper demand quantile bounding the default search box.
pub const GRID_COVERAGE: f64 = 0.9999;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProfitKind {
    /// Retailer profit under believed demand `θk·x`.
    Retailer,
    /// Supplier profit under true demand `θ·x`.
    Supplier,
    /// Integrated chain under true demand.
    Chain,
}

impl ProfitKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Retailer => "retailer",
            Self::Supplier => "supplier",
            Self::Chain => "chain",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub mean: f64,
    /// Sample standard deviation over `√n`; zero when `n = 1`.
    pub stderr: f64,
    pub n: u64,
    pub seed: u64,
}

impl McEstimate {
    /// `|mean − analytic|` in standard errors.
    pub fn sigma_distance(&self, analytic: f64) -> f64 {
        let gap = (self.mean - analytic).abs();
        if self.stderr > 0.0 {
            gap / self.stderr
        } else if gap == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    fn merge(self, other: Self) -> Self {
        if self.n == 0 {
            return other;
        }
        if other.n == 0 {
            return self;
        }
        let n = self.n + other.n;
        let delta = other.mean - self.mean;
        let w = other.n as f64 / n as f64;
        Self {
            n,
            mean: self.mean + delta * w,
            m2: self.m2 + other.m2 + delta * delta * self.n as f64 * w,
        }
    }
}

/// Monte-Carlo estimate of one party's expected profit at `plan`.
#[allow(clippy::too_many_arguments)]
pub fn mc_expected(
    kind: ProfitKind,
    d: &DemandDistribution,
    m: &MarketParams,
    o: &OptionContract,
    k: Overconfidence,
    plan: &OrderPlan,
    n: u64,
    seed: u64,
) -> Result<McEstimate> {
    if n == 0 {
        return Err(Error::InvalidParameter("sample count must be >= 1".to_string()));
    }
    if kind != ProfitKind::Chain {
        o.check(m)?;
    }
    if kind == ProfitKind::Retailer && !k.is_valid() {
        return Err(Error::InvalidParameter(format!(
            "overconfidence k must be > 0, got {}",
            k.value()
        )));
    }
    let believed_scale = m.theta * k.value();
    let profit = |x: f64| match kind {
        ProfitKind::Retailer => realized_retailer_profit(x, believed_scale, m, o, plan),
        ProfitKind::Supplier => realized_supplier_profit(x, m, o, plan),
        ProfitKind::Chain => realized_chain_profit(x, m, plan.q_total()),
    };

    let chunks = n.div_ceil(CHUNK);
    let parts: Vec<Moments> = (0..chunks)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i);
            let len = CHUNK.min(n - i * CHUNK);
            let mut acc = Moments::default();
            for _ in 0..len {
                acc.push(profit(d.sample(&mut rng)));
            }
            acc
        })
        .collect();
    let total = parts.into_iter().fold(Moments::default(), Moments::merge);

    let stderr = if total.n > 1 {
        (total.m2 / (total.n - 1) as f64 / total.n as f64).sqrt()
    } else {
        0.0
    };
    Ok(McEstimate {
        mean: total.mean,
        stderr,
        n,
        seed,
    })
}

/// Rectangular search box over `(Q₁, Q_q)` with a common step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSpec {
    pub q1_range: (f64, f64),
    pub qq_range: (f64, f64),
    pub step: f64,
}

impl GridSpec {
    pub fn new(q1_range: (f64, f64), qq_range: (f64, f64), step: f64) -> Result<Self> {
        for (name, (lo, hi)) in [("q1_range", q1_range), ("qq_range", qq_range)] {
            if !(lo.is_finite() && hi.is_finite() && lo >= 0.0 && lo <= hi) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must satisfy 0 <= lo <= hi, got ({lo}, {hi})"
                )));
            }
        }
        if !(step.is_finite() && step > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "grid step must be > 0, got {step}"
            )));
        }
        Ok(Self {
            q1_range,
            qq_range,
            step,
        })
    }

    /// Square box `[0, B]²` with `B` the demand's 99.99% quantile mapped to
    /// ordered units at believed scale, rounded up to a whole step.
    pub fn covering(d: &DemandDistribution, m: &MarketParams, k: Overconfidence, step: f64) -> Result<Self> {
        if !k.is_valid() {
            return Err(Error::InvalidParameter(format!(
                "overconfidence k must be > 0, got {}",
                k.value()
            )));
        }
        let reach = k.value() * m.theta / m.retention() * d.quantile(GRID_COVERAGE)?;
        let top = (reach / step).ceil() * step;
        Self::new((0.0, top), (0.0, top), step)
    }

    fn axis_len(range: (f64, f64), step: f64) -> usize {
        ((range.1 - range.0) / step + 1e-9).floor() as usize + 1
    }

    pub fn q1_points(&self) -> usize {
        Self::axis_len(self.q1_range, self.step)
    }

    pub fn qq_points(&self) -> usize {
        Self::axis_len(self.qq_range, self.step)
    }
}

/// Grid point maximizing the retailer's expected profit. Ties go to the
/// smaller `Q₁`, then the smaller `Q_q`.
///
/// Contract feasibility is not required; any `(c0, ce)` is searched as given.
/// Because both axes share one step, `Q₁ + Q_q` falls on a single lattice,
/// so each partial integral is tabulated once per lattice point.
pub fn grid_search_plan(
    d: &DemandDistribution,
    m: &MarketParams,
    o: &OptionContract,
    k: Overconfidence,
    spec: &GridSpec,
) -> OrderPlan {
    let surface = RetailerSurface::new(d, m, o, k.value());
    let step = spec.step;
    let (n1, nq) = (spec.q1_points(), spec.qq_points());
    let q1_at = |i: usize| spec.q1_range.0 + i as f64 * step;
    let qq_at = |j: usize| spec.qq_range.0 + j as f64 * step;
    let base = spec.q1_range.0 + spec.qq_range.0;

    let int_spot: Vec<f64> = (0..n1)
        .into_par_iter()
        .map(|i| d.cdf_integral(surface.limit(q1_at(i))))
        .collect();
    let int_total: Vec<f64> = (0..n1 + nq - 1)
        .into_par_iter()
        .map(|s| d.cdf_integral(surface.limit(base + s as f64 * step)))
        .collect();

    let row_best: Vec<(f64, usize)> = (0..n1)
        .into_par_iter()
        .map(|i| {
            let q1 = q1_at(i);
            let mut best = (f64::NEG_INFINITY, 0);
            for j in 0..nq {
                let v = surface.total(q1, qq_at(j), int_total[i + j], int_spot[i]);
                if v > best.0 {
                    best = (v, j);
                }
            }
            best
        })
        .collect();

    let mut winner = (f64::NEG_INFINITY, 0, 0);
    for (i, &(v, j)) in row_best.iter().enumerate() {
        if v > winner.0 {
            winner = (v, i, j);
        }
    }
    OrderPlan::new(q1_at(winner.1), qq_at(winner.2)).expect("grid points are nonnegative")
}

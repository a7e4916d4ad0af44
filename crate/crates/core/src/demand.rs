//! Market demand law.
//!
//! Every profit formula in the crate needs four things from the demand law:
//! the CDF `F`, its quantile `F⁻¹`, the mean, and the partial integral
//! `∫₀ᵃ F(x) dx`. [`DemandDistribution`] provides all of them for three
//! nonnegative families so the downstream formulas stay family-agnostic.
//!
//! The truncated normal is cut at zero and renormalized; its quantile is found
//! by bracketed Newton iteration on the CDF and its partial integral by
//! adaptive quadrature. Uniform and exponential use closed forms throughout.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use rand::distr::Open01;
use rand::Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};
use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::quadrature;
use crate::roots;

/// Absolute tolerance for the quadrature behind [`DemandDistribution::cdf_integral`].
pub const CDF_INTEGRAL_TOL: f64 = 1e-12;

/// Distribution of market demand `x ≥ 0`.
///
/// Serialized as `{"family": "...", "params": {...}}` with families
/// `uniform` (`lo`, `hi`), `exponential` (`rate`) and `truncated-normal`
/// (`mu`, `sigma`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(
    tag = "family",
    content = "params",
    rename_all = "kebab-case",
    deny_unknown_fields
)]
pub enum DemandDistribution {
    Uniform {
        lo: f64,
        hi: f64,
    },
    Exponential {
        rate: f64,
    },
    /// Normal(`mu`, `sigma`) conditioned on `x > 0`.
    TruncatedNormal {
        mu: f64,
        sigma: f64,
    },
}

/// Standard normal upper tail `1 − Φ(z)`, accurate far into both tails.
fn normal_upper_tail(z: f64) -> f64 {
    0.5 * erfc(z * FRAC_1_SQRT_2)
}

fn normal_density(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * PI).sqrt()
}

impl DemandDistribution {
    pub fn uniform(lo: f64, hi: f64) -> Result<Self> {
        Self::Uniform { lo, hi }.validated()
    }

    pub fn exponential(rate: f64) -> Result<Self> {
        Self::Exponential { rate }.validated()
    }

    pub fn truncated_normal(mu: f64, sigma: f64) -> Result<Self> {
        Self::TruncatedNormal { mu, sigma }.validated()
    }

    fn validated(self) -> Result<Self> {
        match self.violations().into_iter().next() {
            None => Ok(self),
            Some((field, msg)) => Err(Error::InvalidParameter(format!("{field}: {msg}"))),
        }
    }

    /// Parameter problems as `(field, message)` pairs; empty when valid.
    pub fn violations(&self) -> Vec<(&'static str, String)> {
        let mut out = Vec::new();
        match *self {
            Self::Uniform { lo, hi } => {
                if !(lo.is_finite() && lo >= 0.0) {
                    out.push(("lo", format!("must be finite and >= 0, got {lo}")));
                }
                if !(hi.is_finite() && hi > lo) {
                    out.push(("hi", format!("must be finite and > lo, got {hi}")));
                }
            }
            Self::Exponential { rate } => {
                if !(rate.is_finite() && rate > 0.0) {
                    out.push(("rate", format!("must be finite and > 0, got {rate}")));
                }
            }
            Self::TruncatedNormal { mu, sigma } => {
                if !mu.is_finite() {
                    out.push(("mu", format!("must be finite, got {mu}")));
                }
                if !(sigma.is_finite() && sigma > 0.0) {
                    out.push(("sigma", format!("must be finite and > 0, got {sigma}")));
                }
            }
        }
        out
    }

    pub fn family(&self) -> &'static str {
        match self {
            Self::Uniform { .. } => "uniform",
            Self::Exponential { .. } => "exponential",
            Self::TruncatedNormal { .. } => "truncated-normal",
        }
    }

    /// `F(x)`; zero at or below the lower end of the support.
    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            Self::Uniform { lo, hi } => ((x - lo) / (hi - lo)).clamp(0.0, 1.0),
            Self::Exponential { rate } => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-rate * x).exp_m1()
                }
            }
            Self::TruncatedNormal { mu, sigma } => {
                if x <= 0.0 {
                    return 0.0;
                }
                let kept = normal_upper_tail(-mu / sigma);
                let beyond = normal_upper_tail((x - mu) / sigma);
                ((kept - beyond) / kept).clamp(0.0, 1.0)
            }
        }
    }

    pub fn pdf(&self, x: f64) -> f64 {
        match *self {
            Self::Uniform { lo, hi } => {
                if x < lo || x > hi {
                    0.0
                } else {
                    1.0 / (hi - lo)
                }
            }
            Self::Exponential { rate } => {
                if x < 0.0 {
                    0.0
                } else {
                    rate * (-rate * x).exp()
                }
            }
            Self::TruncatedNormal { mu, sigma } => {
                if x < 0.0 {
                    return 0.0;
                }
                let kept = normal_upper_tail(-mu / sigma);
                normal_density((x - mu) / sigma) / (sigma * kept)
            }
        }
    }

    /// Smallest `x` with `F(x) ≥ q`, for `0 < q < 1`.
    pub fn quantile(&self, q: f64) -> Result<f64> {
        if !(q > 0.0 && q < 1.0) {
            return Err(Error::OutOfRange {
                what: "probability",
                value: q,
                range: "(0, 1)",
            });
        }
        Ok(self.inverse_transform(q))
    }

    /// Quantile without the range check; `u` must lie in `(0, 1)`.
    pub fn inverse_transform(&self, u: f64) -> f64 {
        match *self {
            Self::Uniform { lo, hi } => lo + u * (hi - lo),
            Self::Exponential { rate } => -(-u).ln_1p() / rate,
            Self::TruncatedNormal { mu, sigma } => {
                let kept = normal_upper_tail(-mu / sigma);
                // Untruncated quantile of the matching tail mass as a starting point.
                let std = Normal::standard();
                let z = -std.inverse_cdf(kept * (1.0 - u));
                let guess = mu + sigma * z;
                let hi = mu.max(0.0) + 40.0 * sigma;
                roots::safeguarded_newton(|x| self.cdf(x) - u, |x| self.pdf(x), 0.0, hi, guess, 1e-15, 100)
            }
        }
    }

    /// `E[x]`.
    pub fn mean(&self) -> f64 {
        match *self {
            Self::Uniform { lo, hi } => 0.5 * (lo + hi),
            Self::Exponential { rate } => 1.0 / rate,
            Self::TruncatedNormal { mu, sigma } => {
                let z0 = -mu / sigma;
                mu + sigma * normal_density(z0) / normal_upper_tail(z0)
            }
        }
    }

    /// `∫₀ᵃ F(x) dx`, zero for `a ≤ 0`.
    pub fn cdf_integral(&self, a: f64) -> f64 {
        if a <= 0.0 {
            return 0.0;
        }
        match *self {
            Self::Uniform { lo, hi } => {
                if a <= lo {
                    0.0
                } else if a <= hi {
                    (a - lo) * (a - lo) / (2.0 * (hi - lo))
                } else {
                    0.5 * (hi - lo) + (a - hi)
                }
            }
            Self::Exponential { rate } => a + (-rate * a).exp_m1() / rate,
            Self::TruncatedNormal { .. } => self.cdf_integral_numeric(a),
        }
    }

    /// `∫₀ᵃ F(x) dx` by adaptive quadrature, for any family.
    pub fn cdf_integral_numeric(&self, a: f64) -> f64 {
        if a <= 0.0 {
            return 0.0;
        }
        quadrature::integrate(|x| self.cdf(x), 0.0, a, CDF_INTEGRAL_TOL)
    }

    /// One inverse-transform draw.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.inverse_transform(rng.sample(Open01))
    }
}

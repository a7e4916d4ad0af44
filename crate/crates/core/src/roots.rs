//! Bracketed scalar root finding.

/// Bisection on `[lo, hi]` where `f(lo)` and `f(hi)` have opposite signs.
///
/// Runs until the bracket collapses to adjacent floats (or `max_iter`), and
/// returns `None` if the endpoints do not bracket a sign change.
pub fn bisect<F>(mut f: F, mut lo: f64, mut hi: f64, max_iter: usize) -> Option<f64>
where
    F: FnMut(f64) -> f64,
{
    let mut f_lo = f(lo);
    let f_hi = f(hi);
    if f_lo == 0.0 {
        return Some(lo);
    }
    if f_hi == 0.0 {
        return Some(hi);
    }
    if f_lo.is_nan() || f_hi.is_nan() || f_lo.signum() == f_hi.signum() {
        return None;
    }
    for _ in 0..max_iter {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return Some(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

/// Newton iteration kept inside a shrinking bracket `[lo, hi]` on which `f`
/// is nondecreasing with `f(lo) ≤ 0 ≤ f(hi)`. Falls back to bisection
/// whenever a Newton step leaves the bracket. Stops once `|f| ≤ ftol` or the
/// step falls below a few ulps of `x`.
pub fn safeguarded_newton<F, D>(
    mut f: F,
    mut df: D,
    mut lo: f64,
    mut hi: f64,
    x0: f64,
    ftol: f64,
    max_iter: usize,
) -> f64
where
    F: FnMut(f64) -> f64,
    D: FnMut(f64) -> f64,
{
    let mut x = if x0 > lo && x0 < hi { x0 } else { 0.5 * (lo + hi) };
    for _ in 0..max_iter {
        let fx = f(x);
        if fx.abs() <= ftol {
            return x;
        }
        if fx < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let slope = df(x);
        let newton = if slope > 0.0 { x - fx / slope } else { f64::NAN };
        let next = if newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        let converged = (next - x).abs() <= 4.0 * f64::EPSILON * x.abs().max(f64::MIN_POSITIVE);
        x = next;
        if converged || hi - lo <= 4.0 * f64::EPSILON * hi.abs().max(f64::MIN_POSITIVE) {
            break;
        }
    }
    x
}

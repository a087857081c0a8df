//! Derivative-free scalar solvers: bisection, golden-section search, and
//! a dense grid scan.
//!
//! These are the independent checks used to validate the closed-form
//! results elsewhere in the crate, so this module must not depend on any
//! of those formulas. Functions passed in must be deterministic and total
//! on the declared interval.

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum SolverError {
    /// The bracket endpoints do not straddle a sign change.
    #[error("no sign change over the bracket")]
    NoSignChange,

    /// The interval is empty, reversed, or non-finite.
    #[error("invalid search interval")]
    InvalidInterval,
}

/// Default x-tolerance for root finding.
pub const DEFAULT_ROOT_TOL: f64 = 1e-12;

/// Default x-tolerance for maximization.
pub const DEFAULT_MAX_TOL: f64 = 1e-10;

fn check_interval(lo: f64, hi: f64) -> Result<(), SolverError> {
    if !lo.is_finite() || !hi.is_finite() || lo >= hi {
        return Err(SolverError::InvalidInterval);
    }
    Ok(())
}

/// Bisection root finding on `[lo, hi]`.
///
/// Requires `f(lo)` and `f(hi)` to have opposite signs; the bracket is
/// halved each step until its width is at most `tol_x` (or the floating
/// point grid no longer splits it).
pub fn bisect_root<F: Fn(f64) -> f64>(
    f: F,
    lo: f64,
    hi: f64,
    tol_x: f64,
) -> Result<f64, SolverError> {
    check_interval(lo, hi)?;
    if !tol_x.is_finite() || tol_x <= 0.0 {
        return Err(SolverError::InvalidInterval);
    }
    let mut lo = lo;
    let mut hi = hi;
    let mut f_lo = f(lo);
    let f_hi = f(hi);
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(SolverError::NoSignChange);
    }
    while hi - lo > tol_x {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break; // interval no longer splittable in f64
        }
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Grows `hi` by doubling until `[lo, hi]` brackets a sign change of `f`,
/// giving up once `hi` exceeds `max_hi`.
pub fn bracket_sign_change<F: Fn(f64) -> f64>(
    f: F,
    lo: f64,
    initial_hi: f64,
    max_hi: f64,
) -> Option<(f64, f64)> {
    if lo.is_nan() || initial_hi.is_nan() || lo >= initial_hi {
        return None;
    }
    let f_lo = f(lo);
    let mut hi = initial_hi;
    while hi <= max_hi {
        if f_lo.signum() != f(hi).signum() {
            return Some((lo, hi));
        }
        hi *= 2.0;
    }
    None
}

const INV_PHI: f64 = 0.618_033_988_749_894_9; // (sqrt(5) - 1) / 2

/// Golden-section search for the maximum of a unimodal `f` on `[lo, hi]`.
///
/// Returns `(x_star, f(x_star))`. The interval shrinks by the golden
/// ratio each step until its width is at most `tol_x`; a maximum on the
/// boundary is reached in the limit.
pub fn golden_max<F: Fn(f64) -> f64>(
    f: F,
    lo: f64,
    hi: f64,
    tol_x: f64,
) -> Result<(f64, f64), SolverError> {
    check_interval(lo, hi)?;
    if !tol_x.is_finite() || tol_x <= 0.0 {
        return Err(SolverError::InvalidInterval);
    }
    let mut a = lo;
    let mut b = hi;
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while b - a > tol_x {
        if f1 >= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            if x1 <= a || x1 >= x2 {
                break;
            }
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            if x2 <= x1 || x2 >= b {
                break;
            }
            f2 = f(x2);
        }
    }
    // Pick the best of the final probes and the endpoints.
    let candidates = [(a, f(a)), (x1, f1), (x2, f2), (b, f(b))];
    let best = candidates
        .into_iter()
        .fold(None::<(f64, f64)>, |acc, (x, v)| match acc {
            Some((_, best_v)) if best_v >= v => acc,
            _ => Some((x, v)),
        })
        .expect("non-empty candidate list");
    Ok(best)
}

/// Argmax of `f` over a uniform grid of `steps` points spanning
/// `[lo, hi]` (inclusive). Ties resolve to the smallest `x`.
pub fn grid_scan_max<F: Fn(f64) -> f64>(
    f: F,
    lo: f64,
    hi: f64,
    steps: usize,
) -> Result<(f64, f64), SolverError> {
    check_interval(lo, hi)?;
    if steps < 2 {
        return Err(SolverError::InvalidInterval);
    }
    let width = hi - lo;
    let mut best = (lo, f(lo));
    for i in 1..steps {
        let x = lo + width * i as f64 / (steps - 1) as f64;
        let v = f(x);
        if v > best.1 {
            best = (x, v);
        }
    }
    Ok(best)
}

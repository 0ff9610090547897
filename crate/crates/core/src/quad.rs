//! Adaptive Simpson quadrature with Richardson correction.

use thiserror::Error;

use crate::expr::EvalError;
use crate::scalar::Real;

const MAX_DEPTH: u32 = 200;
/// Integrand evaluations allowed per call of [`adaptive_simpson`].
pub const DEFAULT_BUDGET: usize = 2_000_000;

#[derive(Clone, Debug, PartialEq, Error)]
pub enum QuadError {
    #[error("quadrature did not converge on [{lo}, {hi}]")]
    NoConvergence { lo: f64, hi: f64 },
    #[error("integrand failed at x = {x}: {source}")]
    Integrand { x: f64, source: EvalError },
}

/// `∫_a^b f` to absolute tolerance `tol`. `a > b` gives the negated integral.
pub fn adaptive_simpson<T, F>(f: F, a: T, b: T, tol: T) -> Result<T, QuadError>
where
    T: Real,
    F: FnMut(T) -> Result<T, EvalError>,
{
    adaptive_simpson_budget(f, a, b, tol, DEFAULT_BUDGET)
}

/// As [`adaptive_simpson`], failing with `NoConvergence` once `budget`
/// integrand evaluations are spent (noisy integrands otherwise split forever).
pub fn adaptive_simpson_budget<T, F>(mut f: F, a: T, b: T, tol: T, budget: usize) -> Result<T, QuadError>
where
    T: Real,
    F: FnMut(T) -> Result<T, EvalError>,
{
    if a == b {
        return Ok(T::zero());
    }
    let mut spent = 0usize;
    let mut eval = |x: T| {
        spent += 1;
        if spent > budget {
            return Err(QuadError::NoConvergence { lo: a.to_f64_lossy(), hi: b.to_f64_lossy() });
        }
        f(x).map_err(|source| QuadError::Integrand { x: x.to_f64_lossy(), source })
    };
    let fa = eval(a)?;
    let fb = eval(b)?;
    let m = (a + b) * T::c(0.5);
    let fm = eval(m)?;
    let whole = simpson(a, b, fa, fm, fb);
    refine(&mut eval, a, b, fa, fm, fb, whole, tol, MAX_DEPTH)
}

fn simpson<T: Real>(a: T, b: T, fa: T, fm: T, fb: T) -> T {
    (b - a) / T::c(6.0) * (fa + T::c(4.0) * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn refine<T, F>(f: &mut F, a: T, b: T, fa: T, fm: T, fb: T, whole: T, tol: T, depth: u32) -> Result<T, QuadError>
where
    T: Real,
    F: FnMut(T) -> Result<T, QuadError>,
{
    let m = (a + b) * T::c(0.5);
    let lm = (a + m) * T::c(0.5);
    let rm = (m + b) * T::c(0.5);
    let flm = f(lm)?;
    let frm = f(rm)?;
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    // the roundoff floor stops endless splitting of noisy panels
    let floor = T::epsilon() * T::c(64.0) * (left.abs() + right.abs());
    if delta.abs() <= T::c(15.0) * tol || delta.abs() <= floor {
        return Ok(left + right + delta / T::c(15.0));
    }
    // interval too short to split further in this precision
    if m == a || m == b || lm == a || rm == b {
        return Ok(left + right);
    }
    if depth == 0 {
        return Err(QuadError::NoConvergence { lo: a.to_f64_lossy(), hi: b.to_f64_lossy() });
    }
    let half = tol * T::c(0.5);
    Ok(refine(f, a, m, fa, flm, fm, left, half, depth - 1)? + refine(f, m, b, fm, frm, fb, right, half, depth - 1)?)
}

//! Safeguarded scalar root finding: bracketing bisection polished by Newton.
//!
//! The variational problem only ever needs roots of functions that are
//! monotone on the supplied bracket (Lemma-style sign structure), so the
//! recipe is: bisect until the bracket shrinks to 1e-3 of its width, then
//! run Newton with the analytic derivative, falling back to bisection
//! whenever a Newton step leaves the bracket.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum RootError {
    #[error("no sign change on bracket [{lo}, {hi}]: f(lo)={flo:.6e}, f(hi)={fhi:.6e}")]
    NoBracket { lo: f64, hi: f64, flo: f64, fhi: f64 },
    #[error("root iteration did not converge within {max_iter} iterations (last x = {x})")]
    NoConvergence { max_iter: usize, x: f64 },
}

/// Find the root of `f` in [lo, hi] (must bracket a sign change).
/// `df` is the analytic derivative used for Newton polish.
pub fn solve_bracketed<F, D>(mut f: F, mut df: D, lo: f64, hi: f64) -> Result<f64, RootError>
where
    F: FnMut(f64) -> f64,
    D: FnMut(f64) -> f64,
{
    let (mut a, mut b) = (lo, hi);
    let mut fa = f(a);
    let fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(RootError::NoBracket {
            lo,
            hi,
            flo: fa,
            fhi: fb,
        });
    }
    // Bisection to 1e-3 of the original width.
    let width_target = 1e-3 * (b - a);
    while b - a > width_target {
        let m = 0.5 * (a + b);
        let fm = f(m);
        if fm == 0.0 {
            return Ok(m);
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    // Newton polish, keeping the bracket as a safeguard.
    let max_iter = 60;
    let mut x = 0.5 * (a + b);
    for _ in 0..max_iter {
        let fx = f(x);
        if fx == 0.0 {
            return Ok(x);
        }
        if fx.signum() == fa.signum() {
            a = x;
        } else {
            b = x;
        }
        let d = df(x);
        let mut step = if d != 0.0 { -fx / d } else { f64::NAN };
        let mut x_new = x + step;
        if !x_new.is_finite() || x_new <= a || x_new >= b {
            x_new = 0.5 * (a + b);
            step = x_new - x;
        }
        if step.abs() <= 1e-13 * x_new.abs().max(f64::MIN_POSITIVE) {
            return Ok(x_new);
        }
        x = x_new;
    }
    // If the bracket itself has collapsed, accept the midpoint.
    if (b - a).abs() <= 1e-12 * b.abs().max(1.0) {
        return Ok(0.5 * (a + b));
    }
    Err(RootError::NoConvergence { max_iter, x })
}

/// Expand a bracket geometrically from `x0` until `f` changes sign, then solve.
/// `grow` > 1 scales the upper endpoint each step; used where only a one-sided
/// starting point is known (e.g. scanning for the break-even overshoot).
pub fn solve_expanding<F, D>(
    mut f: F,
    df: D,
    x0: f64,
    grow: f64,
    max_expand: usize,
) -> Result<f64, RootError>
where
    F: FnMut(f64) -> f64,
    D: FnMut(f64) -> f64,
{
    let f0 = f(x0);
    if f0 == 0.0 {
        return Ok(x0);
    }
    let mut hi = x0 * grow;
    for _ in 0..max_expand {
        let fhi = f(hi);
        if fhi == 0.0 {
            return Ok(hi);
        }
        if fhi.signum() != f0.signum() {
            return solve_bracketed(f, df, x0, hi);
        }
        hi *= grow;
    }
    Err(RootError::NoBracket {
        lo: x0,
        hi,
        flo: f0,
        fhi: f64::NAN,
    })
}

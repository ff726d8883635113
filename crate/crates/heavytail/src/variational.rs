//! The tilted-cost variational problem.
//!
//! For a deviation N at sample size n the cost functional is
//!     f_n(x) = q(x) + (N − x)² / (2nσ²),     x ∈ (a, N],
//! trading the hazard of one large summand of size x against the Gaussian
//! cost of spreading the remaining N − x over n terms. Its corrected form
//!     f_nr(x) = f_n(x) − ((N−x)³/n²) Σ_{j<r} λ_j ((N−x)/n)^j
//! absorbs the Cramér-series terms of the collective fluctuation.
//!
//! Because q is concave for large x while the quadratic is convex, f_n is
//! non-convex: below the inflection scale x* (where q''(x*) = −1/(nσ²))
//! nothing interesting happens; above it, two critical points appear once
//! N exceeds N* = x* + nσ² q'(x*), and the single-big-jump minimum beats
//! the boundary (collective) cost beyond the break-even scale N**.

use crate::cramer::CramerCoeffs;
use crate::roots::{solve_bracketed, RootError};
use crate::weights::WeightModel;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum VarError {
    #[error("x = {x} outside domain (a = {a})")]
    Domain { x: f64, a: f64 },
    #[error("no inflection point: min q'' = {min_d2q} does not reach −1/(nσ²) = {target}")]
    NoInflection { min_d2q: f64, target: f64 },
    #[error("bracketing failed for {what} over [{lo}, {hi}]")]
    Bracketing { what: &'static str, lo: f64, hi: f64 },
    #[error("deviation N = {n_dev} at or below the CLT window floor {floor}·√n = {value}")]
    BelowCltWindow { n_dev: f64, floor: f64, value: f64 },
    #[error("N = {n_dev} below the critical-point threshold {threshold}")]
    BelowThreshold { n_dev: f64, threshold: f64 },
    #[error("root solve failed: {0}")]
    Root(#[from] RootError),
}

/// The inflection and critical scales of f_n for one (model, n, σ²).
#[derive(Clone, Debug)]
pub struct CriticalScales {
    pub n: usize,
    /// x* with q''(x*) = −1/(nσ²): onset of the concave window.
    pub x_star: f64,
    /// N* = x* + nσ² q'(x*): smallest deviation with interior critical points.
    pub n_star: f64,
    /// N**: break-even deviation where the interior minimum ties the boundary.
    pub n_dblstar: f64,
    /// t* = q'(x*): tilt dual to the inflection point.
    pub t_star: f64,
}

/// Critical points of f_n (and optionally f_nr) for one deviation N.
#[derive(Clone, Debug)]
pub struct CriticalPoints {
    /// local maximum below x*, when the hazard blows up at the left edge
    pub x_prime: Option<f64>,
    /// local minimum beyond x* (the single-big-jump candidate)
    pub x_n: Option<f64>,
    /// zero of f'_nr in (x*, N); equals x_n when r = 0
    pub x_nr: Option<f64>,
    pub r: usize,
    pub f_at_xn: f64,
    pub f_at_a: f64,
    /// 1 − nσ²|q''(x_n)|, the second-derivative contraction factor
    pub fpp_factor: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Regime {
    Moderate,
    Critical,
    BigJump,
}

#[derive(Clone, Copy, Debug)]
pub struct RegimeThresholds {
    /// slack on N/N* separating Moderate from Critical
    pub eps1: f64,
    /// multiplier on n^{1/(2−α)} for the BigJump floor
    pub eps2: f64,
    /// CLT-window floor multiplier on √n
    pub clt_floor: f64,
}

impl Default for RegimeThresholds {
    fn default() -> Self {
        RegimeThresholds {
            eps1: 0.05,
            eps2: 1.0,
            clt_floor: 1.0,
        }
    }
}

/// f_n(x) = q(x) + (N−x)²/(2nσ²); requires x > a.
pub fn f_n(model: &WeightModel, sigma2: f64, n: usize, big_n: f64, x: f64) -> Result<f64, VarError> {
    if x <= model.a {
        return Err(VarError::Domain { x, a: model.a });
    }
    Ok(f_n_closure(model, sigma2, n, big_n, x))
}

/// Continuous extension of f_n to the closed domain [a, N] (used only for
/// the boundary evaluation in the break-even problem; q(a) = −log c for both
/// built-in families since q_raw(a) = 0).
fn f_n_closure(model: &WeightModel, sigma2: f64, n: usize, big_n: f64, x: f64) -> f64 {
    let d = big_n - x;
    model.q(x) + d * d / (2.0 * n as f64 * sigma2)
}

/// f'_n(x) = q'(x) − (N−x)/(nσ²).
pub fn df_n(model: &WeightModel, sigma2: f64, n: usize, big_n: f64, x: f64) -> f64 {
    model.dq_raw(x) - (big_n - x) / (n as f64 * sigma2)
}

/// f''_n(x) = q''(x) + 1/(nσ²).
pub fn d2f_n(model: &WeightModel, sigma2: f64, n: usize, x: f64) -> f64 {
    model.d2q_raw(x) + 1.0 / (n as f64 * sigma2)
}

/// f_nr(x) = f_n(x) − ((N−x)³/n²) Σ_{j<r} λ_j ((N−x)/n)^j; f_{n0} = f_n.
pub fn f_nr(
    model: &WeightModel,
    sigma2: f64,
    n: usize,
    big_n: f64,
    lambda: &CramerCoeffs,
    x: f64,
) -> Result<f64, VarError> {
    let base = f_n(model, sigma2, n, big_n, x)?;
    Ok(base - cramer_term(n, big_n, lambda, x))
}

fn cramer_term(n: usize, big_n: f64, lambda: &CramerCoeffs, x: f64) -> f64 {
    let nf = n as f64;
    let d = big_n - x;
    let tau = d / nf;
    let mut s = 0.0;
    for &l in lambda.lambdas.iter().rev() {
        s = s * tau + l;
    }
    d * d * d / (nf * nf) * s
}

/// f'_nr(x) = q'(x) − (N−x)/(nσ²) + Σ_{j<r} λ_j (j+3) (N−x)^{j+2}/n^{j+2}.
pub fn df_nr(
    model: &WeightModel,
    sigma2: f64,
    n: usize,
    big_n: f64,
    lambda: &CramerCoeffs,
    x: f64,
) -> f64 {
    let nf = n as f64;
    let d = big_n - x;
    let mut s = 0.0;
    let mut pw = d * d / (nf * nf); // (N−x)^{j+2}/n^{j+2} at j = 0
    for (j, &l) in lambda.lambdas.iter().enumerate() {
        s += l * (j as f64 + 3.0) * pw;
        pw *= d / nf;
    }
    df_n(model, sigma2, n, big_n, x) + s
}

fn d2f_nr(model: &WeightModel, sigma2: f64, n: usize, big_n: f64, lambda: &CramerCoeffs, x: f64) -> f64 {
    let nf = n as f64;
    let d = big_n - x;
    let mut s = 0.0;
    let mut pw = d / (nf * nf);
    for (j, &l) in lambda.lambdas.iter().enumerate() {
        s -= l * (j as f64 + 3.0) * (j as f64 + 2.0) * pw;
        pw *= d / nf;
    }
    d2f_n(model, sigma2, n, x) + s
}

/// Largest root of q''(x) = −1/(nσ²), solved in u = log x. The region where
/// q'' dips below the target is located by an upward walk (the log-hazard
/// hazard is convex near its edge and only turns concave past e^{β−1}, with
/// an interior minimum of q''), then the exit of that region is polished.
pub fn inflection_x_star(model: &WeightModel, sigma2: f64, n: usize) -> Result<f64, VarError> {
    let target = -1.0 / (n as f64 * sigma2);
    let g = |u: f64| model.d2q_raw(u.exp()) - target;
    let dg = |u: f64| {
        let x = u.exp();
        model.d3q_raw(x) * x
    };
    let u_start = if model.a > 0.0 {
        (model.concave_from().max(model.a) * (1.0 + 1e-9)).ln()
    } else {
        -30.0
    };
    // walk up until we are inside {q'' < target}
    let step = 0.125;
    let mut u_in = None;
    let mut min_d2q = f64::INFINITY;
    let mut u = u_start;
    while u < 400.0 {
        let v = model.d2q_raw(u.exp());
        min_d2q = min_d2q.min(v);
        if v < target {
            u_in = Some(u);
            break;
        }
        u += step;
    }
    let Some(mut u) = u_in else {
        return Err(VarError::NoInflection { min_d2q, target });
    };
    // walk further until q'' re-emerges above target; that sign change
    // brackets the largest (rightmost) root
    loop {
        let next = u + step;
        if model.d2q_raw(next.exp()) >= target {
            let root_u = solve_bracketed(g, dg, u, next)?;
            return Ok(root_u.exp());
        }
        u = next;
        if u > 800.0 {
            return Err(VarError::Bracketing {
                what: "inflection exit",
                lo: u_start.exp(),
                hi: u.exp(),
            });
        }
    }
}

/// N* = x* + nσ² q'(x*).
pub fn critical_n_star(model: &WeightModel, sigma2: f64, n: usize) -> Result<f64, VarError> {
    let x_star = inflection_x_star(model, sigma2, n)?;
    Ok(x_star + n as f64 * sigma2 * model.dq_raw(x_star))
}

/// Interior minimum x_n(N): unique zero of f'_n in (x*, N) for N > N*.
fn solve_x_n(
    model: &WeightModel,
    sigma2: f64,
    n: usize,
    big_n: f64,
    x_star: f64,
) -> Result<f64, VarError> {
    // f'_n(x*) = (N* − N)/(nσ²) < 0 and f'_n(N) = q'(N) > 0; f'_n is strictly
    // increasing on (x*, N) since q'' > −1/(nσ²) there.
    let f = |x: f64| df_n(model, sigma2, n, big_n, x);
    let df = |x: f64| d2f_n(model, sigma2, n, x);
    Ok(solve_bracketed(f, df, x_star, big_n)?)
}

/// Break-even deviation N**: f_n evaluated at the interior minimum equals
/// f_n at the left boundary. Solved in N by bracketed Newton; the envelope
/// theorem gives dh/dN = (a − x_n)/(nσ²) without differentiating x_n(N).
pub fn critical_n_doublestar(model: &WeightModel, sigma2: f64, n: usize) -> Result<f64, VarError> {
    let x_star = inflection_x_star(model, sigma2, n)?;
    let n_star = x_star + n as f64 * sigma2 * model.dq_raw(x_star);
    let ns2 = n as f64 * sigma2;
    let a = model.a;
    let h = |big_n: f64| -> f64 {
        let x_n = solve_x_n(model, sigma2, n, big_n, x_star).expect("x_n inside bracket");
        f_n_closure(model, sigma2, n, big_n, x_n) - f_n_closure(model, sigma2, n, big_n, a)
    };
    let dh = |big_n: f64| -> f64 {
        let x_n = solve_x_n(model, sigma2, n, big_n, x_star).expect("x_n inside bracket");
        (a - x_n) / ns2
    };
    // h > 0 just past N* (collective cost still cheaper); expand until the
    // single big jump wins
    let mut lo = 1.0001 * n_star;
    if h(lo) <= 0.0 {
        // degenerate only for very small n; tighten toward N*
        lo = n_star * (1.0 + 1e-9);
        if h(lo) <= 0.0 {
            return Err(VarError::Bracketing {
                what: "break-even lower end",
                lo: n_star,
                hi: lo,
            });
        }
    }
    let mut hi = 2.0 * lo;
    let mut tries = 0;
    while h(hi) > 0.0 {
        lo = hi;
        hi *= 2.0;
        tries += 1;
        if tries > 60 {
            return Err(VarError::Bracketing {
                what: "break-even upper end",
                lo: n_star,
                hi,
            });
        }
    }
    Ok(solve_bracketed(h, dh, lo, hi)?)
}

/// All critical scales for one (model, n).
pub fn critical_scales(model: &WeightModel, sigma2: f64, n: usize) -> Result<CriticalScales, VarError> {
    let x_star = inflection_x_star(model, sigma2, n)?;
    let t_star = model.dq_raw(x_star);
    let n_star = x_star + n as f64 * sigma2 * t_star;
    let n_dblstar = critical_n_doublestar(model, sigma2, n)?;
    Ok(CriticalScales {
        n,
        x_star,
        n_star,
        n_dblstar,
        t_star,
    })
}

/// Critical points of f_n for deviation N; absence is encoded in the options.
pub fn critical_points(
    model: &WeightModel,
    sigma2: f64,
    n: usize,
    big_n: f64,
) -> Result<CriticalPoints, VarError> {
    let x_star = inflection_x_star(model, sigma2, n)?;
    let n_star = x_star + n as f64 * sigma2 * model.dq_raw(x_star);
    let f_at_a = f_n_closure(model, sigma2, n, big_n, model.a);
    let ns2 = n as f64 * sigma2;

    if big_n < n_star * (1.0 - 1e-6) {
        // f'_n > 0 throughout: no interior critical points
        return Ok(CriticalPoints {
            x_prime: None,
            x_n: None,
            x_nr: None,
            r: 0,
            f_at_xn: f64::NAN,
            f_at_a,
            fpp_factor: f64::NAN,
        });
    }
    if (big_n - n_star).abs() <= 1e-6 * n_star {
        // tangency: double root at the inflection point
        let f_at_xn = f_n_closure(model, sigma2, n, big_n, x_star);
        return Ok(CriticalPoints {
            x_prime: Some(x_star),
            x_n: Some(x_star),
            x_nr: Some(x_star),
            r: 0,
            f_at_xn,
            f_at_a,
            fpp_factor: 1.0 - ns2 * model.d2q_raw(x_star).abs(),
        });
    }

    let x_n = solve_x_n(model, sigma2, n, big_n, x_star)?;
    // local max below x*: exists only when q' climbs above (N−x)/(nσ²)
    // toward the left edge; probe on a geometric grid descending to a
    let x_prime = {
        let mut found = None;
        let mut x = x_star;
        for _ in 0..400 {
            x = model.a + (x - model.a) * 0.75;
            if x <= model.a {
                break;
            }
            if df_n(model, sigma2, n, big_n, x) > 0.0 {
                found = Some(x);
                break;
            }
        }
        match found {
            Some(lo) => {
                // f'_n decreasing on (lo, x*): positive at lo, negative at x*
                let f = |x: f64| df_n(model, sigma2, n, big_n, x);
                let df = |x: f64| d2f_n(model, sigma2, n, x);
                Some(solve_bracketed(f, df, lo, x_star)?)
            }
            None => None,
        }
    };
    Ok(CriticalPoints {
        x_prime,
        x_n: Some(x_n),
        x_nr: Some(x_n),
        r: 0,
        f_at_xn: f_n_closure(model, sigma2, n, big_n, x_n),
        f_at_a,
        fpp_factor: 1.0 - ns2 * model.d2q_raw(x_n).abs(),
    })
}

/// Zero of f'_nr in (x*, N); reduces to x_n for r = 0.
pub fn truncated_critical_point(
    model: &WeightModel,
    sigma2: f64,
    n: usize,
    big_n: f64,
    lambda: &CramerCoeffs,
) -> Result<f64, VarError> {
    let x_star = inflection_x_star(model, sigma2, n)?;
    let n_star = x_star + n as f64 * sigma2 * model.dq_raw(x_star);
    let threshold = 1.05 * n_star;
    if big_n < threshold {
        return Err(VarError::BelowThreshold {
            n_dev: big_n,
            threshold,
        });
    }
    let f = |x: f64| df_nr(model, sigma2, n, big_n, lambda, x);
    let df = |x: f64| d2f_nr(model, sigma2, n, big_n, lambda, x);
    if !(f(x_star) < 0.0 && f(big_n) > 0.0) {
        return Err(VarError::Bracketing {
            what: "truncated critical point",
            lo: x_star,
            hi: big_n,
        });
    }
    Ok(solve_bracketed(f, df, x_star, big_n)?)
}

/// Deviation-regime classification at finite n.
pub fn classify_regime(
    model: &WeightModel,
    sigma2: f64,
    n: usize,
    big_n: f64,
    thresholds: &RegimeThresholds,
) -> Result<Regime, VarError> {
    let floor_val = thresholds.clt_floor * (n as f64).sqrt();
    if big_n <= floor_val {
        return Err(VarError::BelowCltWindow {
            n_dev: big_n,
            floor: thresholds.clt_floor,
            value: floor_val,
        });
    }
    let n_star = critical_n_star(model, sigma2, n)?;
    if big_n <= (1.0 + thresholds.eps1) * n_star {
        return Ok(Regime::Moderate);
    }
    let big_jump_scale = (n as f64).powf(1.0 / (2.0 - model.alpha_bound));
    if big_n >= thresholds.eps2 * big_jump_scale {
        Ok(Regime::BigJump)
    } else {
        Ok(Regime::Critical)
    }
}

/// √(nσ²)·q'(N): the sensitivity of the big-jump weight to the collective
/// fluctuation; → 0 exactly when the one-term estimate is insensitive.
pub fn insensitivity(model: &WeightModel, sigma2: f64, n: usize, big_n: f64) -> f64 {
    (n as f64 * sigma2).sqrt() * model.dq_raw(big_n)
}

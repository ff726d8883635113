//! Cramér-series coefficients λ_j from cumulants.
//!
//! With φ(t) = log E e^{tX}, its Legendre transform near the mean satisfies
//! φ*(μ + τ) = −τ²/(2σ²) + τ³ Σ_{j≥0} λ_j τ^j. The λ_j are produced by
//! formal series manipulation: first invert
//!     σ² t(τ) + Σ_{j≥2} κ_{j+1} t(τ)^j / j! = τ
//! for t(τ) = τ/σ² + Σ_{j≥2} a_j τ^j, then expand
//!     −[(μ + τ) t(τ) − Σ_{j≥1} κ_j t(τ)^j / j!] = −τ²/(2σ²) + τ³ Σ_j λ_j τ^j
//! and read off coefficients. The sign convention makes the large-deviation
//! exponent −nφ*(μ+τ) = −N²/(2nσ²) + (N³/n²) Σ_j λ_j (N/n)^j with N = nτ;
//! in particular λ_0 = κ_3/(6σ⁶). All algebra runs over exact rationals; the
//! inputs (f64 cumulants) are dyadic rationals, so the only rounding is the
//! final conversion back to f64.

use crate::exactprob::CumulantSet;
use crate::series::{f64_to_rational, rational_to_f64, SeriesError, TruncatedSeries};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CramerError {
    #[error("need cumulants through order {needed}, have {have}")]
    InsufficientCumulants { needed: usize, have: usize },
    #[error("variance must be positive, got {0}")]
    NonPositiveVariance(f64),
    #[error("series algebra failed: {0}")]
    Series(#[from] SeriesError),
}

/// Coefficients λ_0..λ_{r−1} together with the inversion series t(τ).
#[derive(Clone, Debug)]
pub struct CramerCoeffs {
    /// λ_j for j = 0..r−1 (exact).
    pub lambdas_exact: Vec<BigRational>,
    /// λ_j rounded to f64.
    pub lambdas: Vec<f64>,
    /// Coefficients a_j of t(τ) = Σ_{j≥1} a_j τ^j; a_1 = 1/σ².
    pub a_coeffs: Vec<f64>,
    /// Source cumulants κ_1..κ_{r+2}.
    pub kappas: Vec<f64>,
    pub r: usize,
}

fn factorial(n: usize) -> BigRational {
    let mut f = BigInt::one();
    for k in 2..=n {
        f *= BigInt::from(k);
    }
    BigRational::from_integer(f)
}

/// Compute λ_0..λ_{r−1} from κ_1..κ_{r+2}.
pub fn cramer_lambda(cum: &CumulantSet, r: usize) -> Result<CramerCoeffs, CramerError> {
    let needed = r + 2;
    if cum.kappas.len() < needed {
        return Err(CramerError::InsufficientCumulants {
            needed,
            have: cum.kappas.len(),
        });
    }
    if !(cum.sigma2 > 0.0) {
        return Err(CramerError::NonPositiveVariance(cum.sigma2));
    }
    let kq: Vec<BigRational> = cum.kappas[..needed].iter().map(|&k| f64_to_rational(k)).collect();
    cramer_lambda_rational(&kq, r)
}

/// Rational-input core; `kappas[j]` is κ_{j+1}, length must be r+2.
pub fn cramer_lambda_rational(
    kappas: &[BigRational],
    r: usize,
) -> Result<CramerCoeffs, CramerError> {
    assert!(kappas.len() >= r + 2);
    let work = r + 2; // τ-order needed so λ_{r−1} = [τ^{r+2}]
    let sigma2 = kappas[1].clone();
    if !sigma2.is_positive() {
        return Err(CramerError::NonPositiveVariance(rational_to_f64(&sigma2)));
    }

    // u(t) = σ² t + Σ_{j=2}^{r+1} κ_{j+1} t^j / j!, coefficients u_j = κ_{j+1}/j!.
    let mut u = TruncatedSeries::zero(work);
    u.coeffs[1] = sigma2.clone();
    for j in 2..=(r + 1).min(work) {
        u.coeffs[j] = &kappas[j] / factorial(j);
    }
    // t(τ) with u(t(τ)) = τ. The top coefficient t_{r+2} depends on the
    // (unknown) κ_{r+3} but cancels out of every λ_j we report: w below has
    // no linear term, and the explicit τ·t(τ) product only reaches t_{r+1}.
    let t_tau = u.reverse()?;

    // w(t) = Σ_{j=2}^{r+2} κ_j t^j / j!, so (μ+τ)t − Σ_{j≥1} κ_j t^j/j!
    //      = τ·t(τ) − w(t(τ)), and v is its negation.
    let mut w = TruncatedSeries::zero(work);
    for j in 2..=(r + 2).min(work) {
        w.coeffs[j] = &kappas[j - 1] / factorial(j);
    }
    let v = w.compose(&t_tau).sub(&t_tau.shift(1));

    // Structural checks: v = −τ²/(2σ²) + τ³(λ_0 + λ_1 τ + ...).
    debug_assert!(v.coeff(0).is_zero());
    debug_assert!(v.coeff(1).is_zero());
    let expected_quad = -(BigRational::one() / (BigRational::from_integer(BigInt::from(2)) * &sigma2));
    debug_assert_eq!(v.coeff(2), expected_quad);
    let _ = expected_quad;

    let lambdas_exact: Vec<BigRational> = (0..r).map(|j| v.coeff(j + 3)).collect();
    let lambdas = lambdas_exact.iter().map(rational_to_f64).collect();
    let a_coeffs = (0..=work).map(|j| rational_to_f64(&t_tau.coeff(j))).collect();
    let kappas_f64 = kappas[..r + 2].iter().map(rational_to_f64).collect();
    Ok(CramerCoeffs {
        lambdas_exact,
        lambdas,
        a_coeffs,
        kappas: kappas_f64,
        r,
    })
}

/// Σ_{j=0}^{r−1} λ_j τ^j. The τ³ prefactor is applied by the caller.
pub fn cramer_correction(coeffs: &CramerCoeffs, tau: f64) -> f64 {
    let mut acc = 0.0;
    for &l in coeffs.lambdas.iter().rev() {
        acc = acc * tau + l;
    }
    acc
}

//! Truncated formal power series over exact rationals.
//!
//! All arithmetic is closed at a fixed truncation order R; coefficients are
//! `BigRational`, so cancellation-prone constructions (series reversion at
//! order > 6) are exact. Compositional inversion uses Newton iteration on
//! the truncated ring — each sweep doubles the number of correct
//! coefficients, and correctness is testable by direct composition.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SeriesError {
    #[error("series not invertible under composition: need c0 = 0 and c1 != 0")]
    NotReversible,
    #[error("series has no reciprocal: constant term is zero")]
    NoReciprocal,
}

/// Polynomial truncation of a formal power series: coeffs[j] multiplies t^j.
#[derive(Clone, Debug, PartialEq)]
pub struct TruncatedSeries {
    pub coeffs: Vec<BigRational>,
}

impl TruncatedSeries {
    /// Series with the given coefficients, padded/truncated to order `r`.
    pub fn new(mut coeffs: Vec<BigRational>, r: usize) -> Self {
        coeffs.resize(r + 1, BigRational::zero());
        TruncatedSeries { coeffs }
    }

    pub fn zero(r: usize) -> Self {
        Self::new(vec![], r)
    }

    /// The identity series t.
    pub fn identity(r: usize) -> Self {
        let mut s = Self::zero(r);
        if r >= 1 {
            s.coeffs[1] = BigRational::one();
        }
        s
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, j: usize) -> BigRational {
        self.coeffs
            .get(j)
            .cloned()
            .unwrap_or_else(BigRational::zero)
    }

    pub fn add(&self, other: &Self) -> Self {
        let r = self.order().max(other.order());
        let mut out = Self::zero(r);
        for j in 0..=r {
            out.coeffs[j] = self.coeff(j) + other.coeff(j);
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        let r = self.order().max(other.order());
        let mut out = Self::zero(r);
        for j in 0..=r {
            out.coeffs[j] = self.coeff(j) - other.coeff(j);
        }
        out
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        TruncatedSeries {
            coeffs: self.coeffs.iter().map(|x| x * c).collect(),
        }
    }

    /// Product truncated at max of the operand orders.
    pub fn mul(&self, other: &Self) -> Self {
        let r = self.order().max(other.order());
        let mut out = Self::zero(r);
        for i in 0..=self.order().min(r) {
            if self.coeffs[i].is_zero() {
                continue;
            }
            for j in 0..=(r - i).min(other.order()) {
                if other.coeffs[j].is_zero() {
                    continue;
                }
                let p = &self.coeffs[i] * &other.coeffs[j];
                out.coeffs[i + j] += p;
            }
        }
        out
    }

    /// Multiply by t^k (shift), dropping overflowed orders.
    pub fn shift(&self, k: usize) -> Self {
        let r = self.order();
        let mut out = Self::zero(r);
        for j in k..=r {
            out.coeffs[j] = self.coeff(j - k);
        }
        out
    }

    /// Composition self(g(t)); requires g(0) = 0.
    pub fn compose(&self, g: &Self) -> Self {
        assert!(
            g.coeff(0).is_zero(),
            "composition needs vanishing constant term"
        );
        let r = self.order().max(g.order());
        // Horner: ((c_R g + c_{R-1}) g + ...) g + c_0
        let mut acc = Self::zero(r);
        for j in (0..=self.order()).rev() {
            acc = acc.mul(g);
            acc.coeffs[0] += &self.coeffs[j];
        }
        acc
    }

    pub fn derivative(&self) -> Self {
        let r = self.order();
        let mut out = Self::zero(r);
        for j in 1..=r {
            out.coeffs[j - 1] = &self.coeffs[j] * BigRational::from_integer(BigInt::from(j));
        }
        out
    }

    /// Multiplicative inverse 1/self, requires nonzero constant term.
    pub fn reciprocal(&self) -> Result<Self, SeriesError> {
        if self.coeff(0).is_zero() {
            return Err(SeriesError::NoReciprocal);
        }
        let r = self.order();
        let mut out = Self::zero(r);
        out.coeffs[0] = self.coeff(0).recip();
        for j in 1..=r {
            // sum_{i=1}^{j} c_i * out_{j-i} = 0
            let mut s = BigRational::zero();
            for i in 1..=j {
                s += self.coeff(i) * &out.coeffs[j - i];
            }
            out.coeffs[j] = -s / self.coeff(0);
        }
        Ok(out)
    }

    /// Compositional inverse: g with self(g(tau)) = tau + O(tau^{R+1}).
    /// Newton iteration g <- g - (self(g) - id)/self'(g).
    pub fn reverse(&self) -> Result<Self, SeriesError> {
        if !self.coeff(0).is_zero() || self.coeff(1).is_zero() {
            return Err(SeriesError::NotReversible);
        }
        let r = self.order();
        let id = Self::identity(r);
        let dself = self.derivative();
        let mut g = id.scale(&self.coeff(1).recip());
        let sweeps = (usize::BITS - r.leading_zeros()) as usize + 2;
        for _ in 0..sweeps {
            let fg = self.compose(&g);
            let residual = fg.sub(&id);
            if residual.coeffs.iter().all(|c| c.is_zero()) {
                break;
            }
            let dfg = dself.compose(&g).reciprocal()?;
            g = g.sub(&residual.mul(&dfg));
        }
        Ok(g)
    }

    /// Evaluate in f64 by Horner's rule.
    pub fn eval_f64(&self, t: f64) -> f64 {
        let mut acc = 0.0f64;
        for c in self.coeffs.iter().rev() {
            acc = acc * t + rational_to_f64(c);
        }
        acc
    }
}

/// Exact conversion f64 -> BigRational (f64 values are dyadic rationals).
pub fn f64_to_rational(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite float required")
}

pub fn rational_to_f64(x: &BigRational) -> f64 {
    use num_traits::ToPrimitive;
    x.to_f64().expect("rational out of f64 range")
}

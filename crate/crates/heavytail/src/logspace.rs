//! Signed log-space scalars and compensated accumulation.
//!
//! Tail probabilities in the big-jump regime reach magnitudes like
//! $e^{-10^4}$, far below the smallest positive `f64`. Every quantity that
//! can underflow is therefore carried as a pair $(\text{sign}, \ln|x|)$ and
//! sums are evaluated with log-sum-exp after factoring out the running
//! maximum. Linear-space accumulation uses Neumaier's compensated summation
//! so that convolution doubling and sequential passes agree to 1e-12.

/// A real number represented as `sign * exp(ln_abs)`.
///
/// `sign == 0` encodes exact zero (with `ln_abs = -inf` by convention).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogNum {
    pub sign: i8,
    pub ln_abs: f64,
}

impl LogNum {
    pub const ZERO: LogNum = LogNum {
        sign: 0,
        ln_abs: f64::NEG_INFINITY,
    };

    pub fn new(sign: i8, ln_abs: f64) -> Self {
        if sign == 0 || ln_abs == f64::NEG_INFINITY {
            Self::ZERO
        } else {
            LogNum { sign, ln_abs }
        }
    }

    pub fn from_f64(x: f64) -> Self {
        if x == 0.0 {
            Self::ZERO
        } else {
            LogNum {
                sign: if x > 0.0 { 1 } else { -1 },
                ln_abs: x.abs().ln(),
            }
        }
    }

    /// exp(ln) as a positive number.
    pub fn from_ln(ln: f64) -> Self {
        Self::new(1, ln)
    }

    pub fn to_f64(self) -> f64 {
        self.sign as f64 * self.ln_abs.exp()
    }

    pub fn is_zero(self) -> bool {
        self.sign == 0
    }

    pub fn abs(self) -> Self {
        Self::new(self.sign.abs(), self.ln_abs)
    }

    pub fn neg(self) -> Self {
        Self::new(-self.sign, self.ln_abs)
    }

    pub fn mul(self, other: Self) -> Self {
        Self::new(self.sign * other.sign, self.ln_abs + other.ln_abs)
    }

    pub fn div(self, other: Self) -> Self {
        debug_assert!(other.sign != 0, "division by log-space zero");
        Self::new(self.sign * other.sign, self.ln_abs - other.ln_abs)
    }

    pub fn scale(self, c: f64) -> Self {
        self.mul(Self::from_f64(c))
    }

    /// Signed addition via log-sum-exp.
    pub fn add(self, other: Self) -> Self {
        if self.is_zero() {
            return other;
        }
        if other.is_zero() {
            return self;
        }
        let (big, small) = if self.ln_abs >= other.ln_abs {
            (self, other)
        } else {
            (other, self)
        };
        let d = small.ln_abs - big.ln_abs; // <= 0
        if self.sign == other.sign {
            Self::new(big.sign, big.ln_abs + d.exp().ln_1p())
        } else {
            let m = -d.exp(); // in (-1, 0]
            if 1.0 + m == 0.0 {
                Self::ZERO
            } else {
                Self::new(big.sign, big.ln_abs + m.ln_1p())
            }
        }
    }

    pub fn sub(self, other: Self) -> Self {
        self.add(other.neg())
    }

    /// Ratio of magnitudes in nats: ln|self| - ln|other|.
    pub fn ln_ratio(self, other: Self) -> f64 {
        self.ln_abs - other.ln_abs
    }
}

/// Neumaier (improved Kahan) compensated summation.
#[derive(Clone, Copy, Debug, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// log(sum(exp(v))) over a slice, factoring out the maximum.
/// Returns -inf for an empty slice or all-(-inf) input.
pub fn log_sum_exp(vals: &[f64]) -> f64 {
    let m = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let mut acc = CompensatedSum::new();
    for &v in vals {
        acc.add((v - m).exp());
    }
    m + acc.value().ln()
}

/// Streaming variant: log(sum(exp(v_i))) with a known upper bound for the max.
pub struct LogSumAcc {
    max: f64,
    acc: CompensatedSum,
}

impl LogSumAcc {
    pub fn new() -> Self {
        LogSumAcc {
            max: f64::NEG_INFINITY,
            acc: CompensatedSum::new(),
        }
    }

    pub fn add_ln(&mut self, v: f64) {
        if v == f64::NEG_INFINITY {
            return;
        }
        if v > self.max {
            // rescale previous accumulation
            let shift = (self.max - v).exp();
            let prev = self.acc.value();
            self.acc = CompensatedSum::new();
            self.acc.add(prev * shift);
            self.max = v;
        }
        self.acc.add((v - self.max).exp());
    }

    pub fn value_ln(&self) -> f64 {
        if self.max == f64::NEG_INFINITY {
            f64::NEG_INFINITY
        } else {
            self.max + self.acc.value().ln()
        }
    }
}

impl Default for LogSumAcc {
    fn default() -> Self {
        Self::new()
    }
}

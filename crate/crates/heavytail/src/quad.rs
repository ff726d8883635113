//! Adaptive Gauss–Kronrod quadrature over log-represented integrands.
//!
//! Integrands here are saddle-shaped: magnitudes like $e^{\psi(t)}$ span
//! thousands of nats across one interval. The integrand callback therefore
//! returns the *logarithm* of the value as a `Complex64` `l`, meaning the
//! value is $e^{l.re}(\cos l.im + i\sin l.im)$; exact zero is `l.re = -inf`.
//! Panel sums factor out the maximum log before exponentiating and are
//! accumulated with compensated summation, so the result is meaningful even
//! when the integral itself is $e^{-10^4}$.
//!
//! The subdivision strategy is the usual one (split the panel with the
//! largest Kronrod-minus-Gauss error estimate) with a relative target per
//! integral; infinite tails are handled by a doubling-segment driver that
//! stops once segments fall 60 nats below the running total.

use num_complex::Complex64;
use thiserror::Error;

use crate::logspace::{CompensatedSum, LogNum};

/// A complex number stored as `unit * exp(ln)` with `|unit| ~ 1` (or 0).
#[derive(Clone, Copy, Debug)]
pub struct LogComplex {
    pub ln: f64,
    pub unit: Complex64,
}

impl LogComplex {
    pub const ZERO: LogComplex = LogComplex {
        ln: f64::NEG_INFINITY,
        unit: Complex64::new(0.0, 0.0),
    };

    /// From the log-form `l`: value = exp(l.re) * e^{i l.im}.
    pub fn from_log(l: Complex64) -> Self {
        if l.re == f64::NEG_INFINITY {
            Self::ZERO
        } else {
            LogComplex {
                ln: l.re,
                unit: Complex64::new(l.im.cos(), l.im.sin()),
            }
        }
    }

    pub fn from_complex(z: Complex64) -> Self {
        let m = z.norm();
        if m == 0.0 {
            Self::ZERO
        } else {
            LogComplex {
                ln: m.ln(),
                unit: z / m,
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.ln == f64::NEG_INFINITY || self.unit == Complex64::new(0.0, 0.0)
    }

    /// Renormalize so |unit| = 1 exactly (folding the deviation into ln).
    fn renorm(self) -> Self {
        if self.is_zero() {
            return Self::ZERO;
        }
        let m = self.unit.norm();
        LogComplex {
            ln: self.ln + m.ln(),
            unit: self.unit / m,
        }
    }

    pub fn scale_ln(self, dln: f64) -> Self {
        if self.is_zero() {
            return Self::ZERO;
        }
        LogComplex {
            ln: self.ln + dln,
            unit: self.unit,
        }
    }

    pub fn to_complex(self) -> Complex64 {
        self.unit * self.ln.exp()
    }

    /// ln of the magnitude.
    pub fn ln_norm(self) -> f64 {
        if self.is_zero() {
            f64::NEG_INFINITY
        } else {
            self.ln + self.unit.norm().ln()
        }
    }

    /// Real part as a signed log-space number.
    pub fn real_lognum(self) -> LogNum {
        if self.is_zero() || self.unit.re == 0.0 {
            return LogNum::ZERO;
        }
        LogNum::new(
            if self.unit.re > 0.0 { 1 } else { -1 },
            self.ln + self.unit.re.abs().ln(),
        )
    }

    /// Imaginary part as a signed log-space number.
    pub fn imag_lognum(self) -> LogNum {
        if self.is_zero() || self.unit.im == 0.0 {
            return LogNum::ZERO;
        }
        LogNum::new(
            if self.unit.im > 0.0 { 1 } else { -1 },
            self.ln + self.unit.im.abs().ln(),
        )
    }

    /// Sum of log-complex values, factoring out the maximal exponent.
    pub fn sum(items: &[LogComplex]) -> LogComplex {
        let m = items
            .iter()
            .filter(|v| !v.is_zero())
            .map(|v| v.ln)
            .fold(f64::NEG_INFINITY, f64::max);
        if m == f64::NEG_INFINITY {
            return Self::ZERO;
        }
        let mut re = CompensatedSum::new();
        let mut im = CompensatedSum::new();
        for v in items {
            if v.is_zero() {
                continue;
            }
            let w = (v.ln - m).exp();
            re.add(v.unit.re * w);
            im.add(v.unit.im * w);
        }
        let z = Complex64::new(re.value(), im.value());
        if z.norm() == 0.0 {
            Self::ZERO
        } else {
            LogComplex { ln: m, unit: z }.renorm()
        }
    }
}

#[derive(Debug, Error)]
pub enum QuadError {
    #[error("quadrature did not reach relative tolerance {target:.3e} on [{a}, {b}]: achieved {achieved:.3e} with {panels} panels")]
    NonConvergence {
        a: f64,
        b: f64,
        target: f64,
        achieved: f64,
        panels: usize,
    },
    #[error("invalid quadrature interval [{a}, {b}]")]
    BadInterval { a: f64, b: f64 },
}

#[derive(Clone, Copy, Debug)]
pub struct QuadResult {
    pub value: LogComplex,
    /// ln of the absolute error estimate.
    pub err_ln: f64,
    pub evals: usize,
}

// 15-point Kronrod rule with embedded 7-point Gauss rule (QUADPACK qk15).
const XGK: [f64; 8] = [
    0.991455371120813,
    0.949107912342759,
    0.864864423359769,
    0.741531185599394,
    0.586087235467691,
    0.405845151377397,
    0.207784955007898,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529,
    0.063092092629979,
    0.104790010322250,
    0.140653259715525,
    0.169004726639267,
    0.190350578064785,
    0.204432940075298,
    0.209482141084728,
];
const WG: [f64; 4] = [
    0.129484966168870,
    0.279705391489277,
    0.381830050505119,
    0.417959183673469,
];

#[derive(Clone, Copy, Debug)]
struct Panel {
    a: f64,
    b: f64,
    value: LogComplex,
    err_ln: f64,
}

fn eval_panel<F: FnMut(f64) -> Complex64>(a: f64, b: f64, f: &mut F) -> Panel {
    let h = 0.5 * (b - a);
    let c = 0.5 * (a + b);
    let mut vals: Vec<LogComplex> = Vec::with_capacity(15);
    let mut nodes: Vec<(usize, LogComplex)> = Vec::with_capacity(15);
    for (i, &x) in XGK.iter().enumerate() {
        if i == 7 {
            let v = LogComplex::from_log(f(c));
            nodes.push((7, v));
        } else {
            let v1 = LogComplex::from_log(f(c - h * x));
            let v2 = LogComplex::from_log(f(c + h * x));
            nodes.push((i, v1));
            nodes.push((i, v2));
        }
    }
    // Kronrod sum
    for &(i, v) in &nodes {
        vals.push(v.scale_ln(WGK[i].ln()));
    }
    let kron = LogComplex::sum(&vals).scale_ln(h.abs().ln());
    // Gauss sum over odd Kronrod indices (1,3,5) and center
    vals.clear();
    for &(i, v) in &nodes {
        if i % 2 == 1 {
            vals.push(v.scale_ln(WG[i / 2].ln()));
        } else if i == 7 {
            vals.push(v.scale_ln(WG[3].ln()));
        }
    }
    let gauss = LogComplex::sum(&vals).scale_ln(h.abs().ln());
    // error estimate |K - G|
    let diff = LogComplex::sum(&[kron, gauss.scale_ln(0.0).neg()]);
    Panel {
        a,
        b,
        value: kron,
        err_ln: diff.ln_norm(),
    }
}

impl LogComplex {
    fn neg(self) -> Self {
        LogComplex {
            ln: self.ln,
            unit: -self.unit,
        }
    }
}

/// Adaptive quadrature of `f` (log-form integrand) over the finite interval
/// [a, b]. Converges when the error estimate falls below `rel_tol` relative
/// to the current total, or below the absolute floor `exp(abs_tol_ln)` —
/// the floor is what terminates cancellation-dominated integrals whose true
/// value is (numerically) zero.
pub fn integrate_log<F: FnMut(f64) -> Complex64>(
    mut f: F,
    a: f64,
    b: f64,
    rel_tol: f64,
    abs_tol_ln: f64,
    max_panels: usize,
) -> Result<QuadResult, QuadError> {
    if !(a.is_finite() && b.is_finite()) || a == b {
        return Err(QuadError::BadInterval { a, b });
    }
    let mut panels = vec![eval_panel(a, b, &mut f)];
    let mut evals = 15usize;
    loop {
        let total = LogComplex::sum(&panels.iter().map(|p| p.value).collect::<Vec<_>>());
        let err_ln = {
            let errs: Vec<f64> = panels.iter().map(|p| p.err_ln).collect();
            crate::logspace::log_sum_exp(&errs)
        };
        let target_ln = (total.ln_norm() + rel_tol.ln()).max(abs_tol_ln);
        if err_ln <= target_ln || (total.is_zero() && err_ln == f64::NEG_INFINITY) {
            return Ok(QuadResult {
                value: total,
                err_ln,
                evals,
            });
        }
        if panels.len() >= max_panels {
            return Err(QuadError::NonConvergence {
                a,
                b,
                target: rel_tol,
                achieved: (err_ln - total.ln_norm()).exp(),
                panels: panels.len(),
            });
        }
        // split the worst panel
        let (worst, _) = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.err_ln.partial_cmp(&y.1.err_ln).unwrap())
            .unwrap();
        let p = panels.swap_remove(worst);
        let mid = 0.5 * (p.a + p.b);
        panels.push(eval_panel(p.a, mid, &mut f));
        panels.push(eval_panel(mid, p.b, &mut f));
        evals += 30;
    }
}

/// Semi-infinite integral over [a, inf): doubling segments, truncated when the
/// last segments fall `cutoff_nats` (60 by default per design) below the total.
pub fn integrate_log_tail<F: FnMut(f64) -> Complex64>(
    mut f: F,
    a: f64,
    width0: f64,
    rel_tol: f64,
    cutoff_nats: f64,
    max_panels: usize,
) -> Result<QuadResult, QuadError> {
    let mut lo = a;
    let mut w = width0;
    let mut parts: Vec<LogComplex> = Vec::new();
    let mut errs: Vec<f64> = Vec::new();
    let mut evals = 0usize;
    let mut below = 0usize;
    let mut total_ln = f64::NEG_INFINITY;
    for _ in 0..200 {
        let hi = lo + w;
        let floor = if total_ln.is_finite() {
            total_ln - cutoff_nats - 5.0
        } else {
            f64::NEG_INFINITY
        };
        let r = integrate_log(&mut f, lo, hi, rel_tol, floor, max_panels)?;
        evals += r.evals;
        parts.push(r.value);
        errs.push(r.err_ln);
        let running = LogComplex::sum(&parts);
        total_ln = running.ln_norm().max(total_ln);
        if r.value.ln_norm() < total_ln - cutoff_nats {
            below += 1;
            if below >= 3 {
                break;
            }
        } else {
            below = 0;
        }
        lo = hi;
        if w < 1e18 {
            w *= 2.0;
        }
    }
    let value = LogComplex::sum(&parts);
    Ok(QuadResult {
        value,
        err_ln: crate::logspace::log_sum_exp(&errs),
        evals,
    })
}

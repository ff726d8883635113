//! Heavy-tailed weight families `p(k) = exp(-q(k))`.
//!
//! A weight model is a hazard function $q$ with closed-form derivatives up
//! to third order and a complex extension $q(\xi)$ on a half-plane
//! $\Re\xi > b$. The built-in families are
//!
//! * stretched exponential: $q(x) = x^\alpha$, $\alpha \in (0,1)$, smooth on
//!   $(0,\infty)$ and analytic on $\Re\xi > 0$;
//! * log hazard: $q(x) = (\log x)^\beta$, $\beta > 2$, smooth on $(1,\infty)$
//!   and analytic on $\Re\xi > 1$ (the abscissa `b` is set to 2 to keep
//!   integration lines away from the logarithmic singularity).
//!
//! The structural requirements ($q' > 0$, $q'' < 0$, $q''' > 0$ in the tail,
//! $x q'(x)/\log x \to \infty$, $q'(x) \le \alpha q(x)/x$) are checked
//! numerically on user-supplied grids by [`validate_assumptions`].
//!
//! Derivatives are always closed-form, never finite differences: the
//! variational solvers downstream need $q''$ to ~1e-12 relative accuracy.

use num_complex::Complex64;
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("parameter out of range: {0}")]
    ParamOutOfRange(String),
    #[error("model not normalized: call exactprob::normalize first")]
    NotNormalized,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Family {
    StretchedExponential { alpha: f64 },
    LogHazard { beta: f64 },
    Custom { name: String },
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::StretchedExponential { alpha } => write!(f, "stretched(alpha={alpha})"),
            Family::LogHazard { beta } => write!(f, "loghazard(beta={beta})"),
            Family::Custom { name } => write!(f, "custom({name})"),
        }
    }
}

type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
type ComplexFn = Arc<dyn Fn(Complex64) -> Complex64 + Send + Sync>;

#[derive(Clone)]
pub struct CustomHazard {
    pub q: RealFn,
    pub dq: RealFn,
    pub d2q: RealFn,
    pub d3q: RealFn,
    pub q_complex: ComplexFn,
}

#[derive(Clone)]
pub struct WeightModel {
    pub family: Family,
    /// left endpoint of the smooth-extension domain of q
    pub a: f64,
    /// abscissa of the analytic half-plane of the symbol p(xi)
    pub b: f64,
    /// alpha with q'(x) <= alpha q(x)/x on the validated tail
    pub alpha_bound: f64,
    /// log of the normalization constant c; set by exactprob::normalize
    pub log_c: Option<f64>,
    custom: Option<CustomHazard>,
}

impl fmt::Debug for WeightModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WeightModel")
            .field("family", &self.family)
            .field("a", &self.a)
            .field("b", &self.b)
            .field("alpha_bound", &self.alpha_bound)
            .field("log_c", &self.log_c)
            .finish()
    }
}

/// Stretched-exponential weights, q(x) = x^alpha.
pub fn make_stretched(alpha: f64) -> Result<WeightModel, ModelError> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(ModelError::ParamOutOfRange(format!(
            "stretched exponential needs alpha in (0,1), got {alpha}"
        )));
    }
    Ok(WeightModel {
        family: Family::StretchedExponential { alpha },
        a: 0.0,
        b: 0.0,
        alpha_bound: alpha,
        log_c: None,
        custom: None,
    })
}

/// Log-hazard weights, q(x) = (log x)^beta, beta > 2.
pub fn make_loghazard(beta: f64) -> Result<WeightModel, ModelError> {
    if !(beta > 2.0) {
        return Err(ModelError::ParamOutOfRange(format!(
            "log hazard needs beta > 2, got {beta}"
        )));
    }
    // q'(x) <= alpha q(x)/x reads alpha >= beta/log x; the bound is fitted on
    // the reference tail grid starting at x = 100.
    let alpha_bound = (beta / 100f64.ln()).min(0.99);
    Ok(WeightModel {
        family: Family::LogHazard { beta },
        a: 1.0,
        b: 2.0,
        alpha_bound,
        log_c: None,
        custom: None,
    })
}

/// User-supplied hazard. Grid-validated only; analyticity is taken on trust.
pub fn make_custom(
    name: &str,
    a: f64,
    b: f64,
    alpha_bound: f64,
    hazard: CustomHazard,
) -> WeightModel {
    WeightModel {
        family: Family::Custom {
            name: name.to_string(),
        },
        a,
        b,
        alpha_bound,
        log_c: None,
        custom: Some(hazard),
    }
}

/// The geometric test law p(k) = 2^{-k} (q(x) = x log 2). Light-tailed; used
/// only as a closed-form oracle for the convolution machinery.
pub fn make_geometric() -> WeightModel {
    let ln2 = std::f64::consts::LN_2;
    make_custom(
        "geometric",
        0.0,
        0.0,
        1.0,
        CustomHazard {
            q: Arc::new(move |x| x * ln2),
            dq: Arc::new(move |_| ln2),
            d2q: Arc::new(|_| 0.0),
            d3q: Arc::new(|_| 0.0),
            q_complex: Arc::new(move |xi| xi * ln2),
        },
    )
}

impl WeightModel {
    pub fn q_raw(&self, x: f64) -> f64 {
        match &self.family {
            Family::StretchedExponential { alpha } => x.powf(*alpha),
            Family::LogHazard { beta } => x.ln().powf(*beta),
            Family::Custom { .. } => (self.custom.as_ref().unwrap().q)(x),
        }
    }

    pub fn dq_raw(&self, x: f64) -> f64 {
        match &self.family {
            Family::StretchedExponential { alpha } => alpha * x.powf(alpha - 1.0),
            Family::LogHazard { beta } => {
                let l = x.ln();
                beta * l.powf(beta - 1.0) / x
            }
            Family::Custom { .. } => (self.custom.as_ref().unwrap().dq)(x),
        }
    }

    pub fn d2q_raw(&self, x: f64) -> f64 {
        match &self.family {
            Family::StretchedExponential { alpha } => {
                alpha * (alpha - 1.0) * x.powf(alpha - 2.0)
            }
            Family::LogHazard { beta } => {
                let l = x.ln();
                beta * l.powf(beta - 2.0) * ((beta - 1.0) - l) / (x * x)
            }
            Family::Custom { .. } => (self.custom.as_ref().unwrap().d2q)(x),
        }
    }

    pub fn d3q_raw(&self, x: f64) -> f64 {
        match &self.family {
            Family::StretchedExponential { alpha } => {
                alpha * (alpha - 1.0) * (alpha - 2.0) * x.powf(alpha - 3.0)
            }
            Family::LogHazard { beta } => {
                let l = x.ln();
                let b = *beta;
                b * ((b - 1.0) * (b - 2.0) * l.powf(b - 3.0) - 3.0 * (b - 1.0) * l.powf(b - 2.0)
                    + 2.0 * l.powf(b - 1.0))
                    / (x * x * x)
            }
            Family::Custom { .. } => (self.custom.as_ref().unwrap().d3q)(x),
        }
    }

    /// Complex extension of the hazard on Re xi > b (principal branches).
    pub fn q_raw_complex(&self, xi: Complex64) -> Complex64 {
        match &self.family {
            Family::StretchedExponential { alpha } => (xi.ln() * *alpha).exp(),
            Family::LogHazard { beta } => (xi.ln().ln() * *beta).exp(),
            Family::Custom { .. } => (self.custom.as_ref().unwrap().q_complex)(xi),
        }
    }

    pub fn log_c(&self) -> Result<f64, ModelError> {
        self.log_c.ok_or(ModelError::NotNormalized)
    }

    /// Normalized hazard q(x) = q_raw(x) - log c, so p(x) = exp(-q(x)).
    pub fn q(&self, x: f64) -> f64 {
        self.q_raw(x) - self.log_c.expect("model not normalized")
    }

    /// log p(k) = log c - q_raw(k).
    pub fn log_p(&self, k: f64) -> f64 {
        self.log_c.expect("model not normalized") - self.q_raw(k)
    }

    /// Complex log of the symbol p(xi) = c exp(-q_raw(xi)).
    pub fn log_symbol(&self, xi: Complex64) -> Complex64 {
        -self.q_raw_complex(xi) + self.log_c.expect("model not normalized")
    }

    /// Lower edge of the concave tail: the largest x with q''(x) = 0 for the
    /// log-hazard family (e^{beta-1}), otherwise the domain edge `a`.
    pub fn concave_from(&self) -> f64 {
        match &self.family {
            Family::LogHazard { beta } => (beta - 1.0).exp(),
            _ => self.a,
        }
    }
}

/// Per-item outcome of the structural checks.
#[derive(Clone, Debug)]
pub struct AssumptionReport {
    /// (i) q' > 0, q'' < 0, q''' > 0 at every grid point
    pub signs_ok: bool,
    /// (ii) x q'(x)/log x increasing along the grid
    pub hazard_growth_ok: bool,
    /// (iii)/(iv) bracket constants for |q''| x / q' (c1, c2) and q''' x / |q''| (c3, c4)
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
    pub bracket_ok: bool,
    /// (v) x q'(x)/q(x) <= alpha_bound at every grid point
    pub alpha_ok: bool,
    /// x q'(x)/log x per grid point (for reporting)
    pub growth_ratio: Vec<f64>,
    /// x q'(x)/q(x) per grid point
    pub alpha_ratio: Vec<f64>,
    pub violations: Vec<String>,
}

impl AssumptionReport {
    pub fn passed(&self) -> bool {
        self.signs_ok && self.hazard_growth_ok && self.bracket_ok && self.alpha_ok
    }
}

/// Check the structural assumptions on a grid of tail points (all > model.a).
pub fn validate_assumptions(model: &WeightModel, x_grid: &[f64]) -> AssumptionReport {
    let mut signs_ok = true;
    let mut violations = Vec::new();
    let mut growth_ratio = Vec::with_capacity(x_grid.len());
    let mut alpha_ratio = Vec::with_capacity(x_grid.len());
    let (mut c1, mut c2) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut c3, mut c4) = (f64::INFINITY, f64::NEG_INFINITY);
    for &x in x_grid {
        let (d1, d2, d3) = (model.dq_raw(x), model.d2q_raw(x), model.d3q_raw(x));
        if !(d1 > 0.0) {
            signs_ok = false;
            violations.push(format!("q'({x}) = {d1} not positive"));
        }
        if !(d2 < 0.0) {
            signs_ok = false;
            violations.push(format!("q''({x}) = {d2} not negative"));
        }
        if !(d3 > 0.0) {
            signs_ok = false;
            violations.push(format!("q'''({x}) = {d3} not positive"));
        }
        let r12 = d2.abs() * x / d1;
        let r23 = if d2 != 0.0 { d3 * x / d2.abs() } else { f64::NAN };
        c1 = c1.min(r12);
        c2 = c2.max(r12);
        c3 = c3.min(r23);
        c4 = c4.max(r23);
        growth_ratio.push(x * d1 / x.ln());
        alpha_ratio.push(x * d1 / model.q_raw(x));
    }
    let mut hazard_growth_ok = true;
    for w in growth_ratio.windows(2) {
        if w[1] <= w[0] {
            hazard_growth_ok = false;
            violations.push(format!(
                "x q'(x)/log x not increasing: {} -> {}",
                w[0], w[1]
            ));
        }
    }
    let bracket_ok = c1.is_finite() && c2.is_finite() && c1 > 0.0 && c3.is_finite() && c4.is_finite();
    if !bracket_ok {
        violations.push(format!(
            "derivative-ratio brackets degenerate: c1={c1}, c2={c2}, c3={c3}, c4={c4}"
        ));
    }
    let mut alpha_ok = true;
    for (&x, &r) in x_grid.iter().zip(&alpha_ratio) {
        if r > model.alpha_bound * (1.0 + 1e-12) {
            alpha_ok = false;
            violations.push(format!(
                "x q'(x)/q(x) = {r} exceeds alpha bound {} at x = {x}",
                model.alpha_bound
            ));
        }
    }
    AssumptionReport {
        signs_ok,
        hazard_growth_ok,
        c1,
        c2,
        c3,
        c4,
        bracket_ok,
        alpha_ok,
        growth_ratio,
        alpha_ratio,
        violations,
    }
}

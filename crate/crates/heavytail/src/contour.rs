//! Complex-analytic layer: continuation of the generating function to the
//! slit plane, its boundary values on the slit, and the contour split
//! [z^m] G(z)^n = H_n + V_n.
//!
//! The generating function G(z) = Σ_k p(k) z^k continues analytically to
//! ℂ∖[1,∞) through the Lindelöf integral
//!     G(z) = Σ_{1≤k<x₀} p(k) z^k − (1/2πi) ∫_{Re ξ = x₀} p(ξ) e^{ξu} π/sin(πξ) dξ,
//! with u = Log(−z) and x₀ a half-integer line inside the analyticity
//! half-plane of the symbol p(ξ) = c e^{−q(ξ)}. On the slit boundary
//! (u = t − iπ) the kernel collapses to a Fermi factor and the integral is
//! absolutely convergent, so boundary values are computed exactly at ε = 0.
//! The boundary imaginary part has its own representation, the Bromwich
//! integral Im G(e^t) = (1/2i)∫_{Re ξ = x₀} e^{tξ} p(ξ) dξ, which this module
//! evaluates on the saddle line x₀ = ξ(t) (q'(ξ(t)) = t) so that the
//! integrand's peak is the answer's own scale e^{ψ(t)} — no cancellation.
//!
//! With η chosen by Re φ'(η) = m/n, the coefficient integral splits into a
//! slit-hugging piece and a vertical piece,
//!     H_n = (1/π) ∫₀^η e^{n Re φ(t) − mt} sin(n Im φ(t)) dt,
//!     V_n = (1/π) ∫₀^π e^{n Re φ(η+iθ) − mη} cos(n Im φ(η+iθ) − mθ) dθ,
//! the −mθ keeping the V integrand's phase stationary at θ = 0. Both are
//! evaluated in log form; V's integrand is assembled as Re[G^n e^{−mt}],
//! which is branch-free because n and m are integers.

use std::cell::RefCell;
use std::f64::consts::PI;

use num_complex::Complex64;
use thiserror::Error;

use crate::exactprob::CumulantSet;
use crate::logspace::LogNum;
use crate::quad::{integrate_log, integrate_log_tail, LogComplex, QuadError};
use crate::roots::{solve_bracketed, RootError};
use crate::variational::{self, VarError};
use crate::weights::WeightModel;

#[derive(Debug, Error)]
pub enum ContourError {
    #[error("z = {0} lies on the slit [1, inf)")]
    OnSlit(Complex64),
    #[error("t = {t} outside the range of q' (max attainable {max_t})")]
    TiltOutOfRange { t: f64, max_t: f64 },
    #[error("no eta: Re phi'({delta}) = {at_delta} below target {target}")]
    NoEta { delta: f64, at_delta: f64, target: f64 },
    #[error("phase has no critical point: Psi'({t_star}) = {value} >= 0")]
    NoPhaseCritical { t_star: f64, value: f64 },
    #[error(transparent)]
    Quad(#[from] QuadError),
    #[error(transparent)]
    Root(#[from] RootError),
    #[error(transparent)]
    Var(#[from] VarError),
}

/// Line Re ξ = x₀ for the Lindelöf/Fermi integrals: the first half-integer
/// inside the symbol's analyticity half-plane.
fn line_abscissa(model: &WeightModel) -> f64 {
    model.b.floor() + 0.5 + if model.b.fract() >= 0.5 { 1.0 } else { 0.0 }
}

/// Complex log of 1/sin(πξ) for ξ = x₀ + is, stable for |s| large.
fn inv_sin_pi_log(xi: Complex64) -> Complex64 {
    let i = Complex64::i();
    if xi.im >= 0.0 {
        // 1/sin(πξ) = −2i e^{iπξ}/(1 − e^{2iπξ}), |e^{iπξ}| = e^{−πs} ≤ 1
        let e = (i * PI * xi).exp();
        (-2.0 * i).ln() + i * PI * xi - (Complex64::new(1.0, 0.0) - e * e).ln()
    } else {
        // mirror: 1/sin(πξ) = 2i e^{−iπξ}/(1 − e^{−2iπξ})
        let e = (-i * PI * xi).exp();
        (2.0 * i).ln() - i * PI * xi - (Complex64::new(1.0, 0.0) - e * e).ln()
    }
}

/// L_d(u) = −(1/2πi) ∫_{Re ξ = x₀} p(ξ) ξ^d e^{ξu} π/sin(πξ) dξ.
fn l_integral(model: &WeightModel, u: Complex64, deriv: u32) -> Result<LogComplex, QuadError> {
    let x0 = line_abscissa(model);
    let log_c = model.log_c.expect("model not normalized");
    let mut f = |s: f64| -> Complex64 {
        let xi = Complex64::new(x0, s);
        let mut l = -model.q_raw_complex(xi) + log_c + xi * u + inv_sin_pi_log(xi);
        if deriv > 0 {
            l += (deriv as f64) * xi.ln();
        }
        l
    };
    let up = integrate_log_tail(&mut f, 0.0, 2.0, 1e-11, 40.0, 4000)?;
    let down = integrate_log_tail(|s| f(-s), 0.0, 2.0, 1e-11, 40.0, 4000)?;
    // dξ = i ds and the prefactor −(1/2πi) give −(1/2π)∫ ds; the kernel's π
    // cancels, leaving a net factor −1/2
    let total = LogComplex::sum(&[up.value, down.value]);
    Ok(total.scale_ln(0.5f64.ln()).mul_unit(-1.0))
}

impl LogComplex {
    fn mul_unit(self, c: f64) -> Self {
        LogComplex {
            ln: self.ln,
            unit: self.unit * c,
        }
    }
}

/// Direct series terms p(k) e^{kt} k^d for the integer poles left of x₀.
fn series_part(model: &WeightModel, t: Complex64, deriv: u32) -> LogComplex {
    let x0 = line_abscissa(model);
    let mut terms = Vec::new();
    let mut k = 1.0f64;
    while k < x0 {
        let l = model.log_p(k) + (t * k).re + (deriv as f64) * k.ln();
        terms.push(LogComplex::from_log(Complex64::new(l, (t * k).im)));
        k += 1.0;
    }
    LogComplex::sum(&terms)
}

/// G and its first two t-derivatives at e^t for t in the closed strip
/// Im t ∈ [0, π], evaluated through L(t − iπ) plus the skipped poles.
/// Im t = 0 is the boundary value on the slit (limit from above).
pub fn g_on_strip(
    model: &WeightModel,
    t: Complex64,
    deriv: u32,
) -> Result<LogComplex, ContourError> {
    let u = t - Complex64::new(0.0, PI);
    let l = l_integral(model, u, deriv)?;
    Ok(LogComplex::sum(&[l, series_part(model, t, deriv)]))
}

/// Analytic continuation of G to the slit plane ℂ∖[1,∞).
pub fn lindelof_g(model: &WeightModel, z: Complex64) -> Result<Complex64, ContourError> {
    if z.im == 0.0 && z.re >= 1.0 {
        return Err(ContourError::OnSlit(z));
    }
    let u = (-z).ln(); // principal Log(−z); Im u ∈ (−π, π)
    let l = l_integral(model, u, 0)?;
    // series poles left of x₀ use z^k directly
    let x0 = line_abscissa(model);
    let mut terms = vec![l];
    let mut k = 1.0f64;
    while k < x0 {
        let zk = z.powf(k);
        terms.push(LogComplex::from_log(Complex64::new(
            model.log_p(k) + zk.norm().ln(),
            zk.arg(),
        )));
        k += 1.0;
    }
    Ok(LogComplex::sum(&terms).to_complex())
}

/// ξ(t): the solution of q'(ξ) = t on the concave (large-x) branch.
pub fn xi_of_t(model: &WeightModel, t: f64) -> Result<f64, ContourError> {
    if !(t > 0.0) {
        return Err(ContourError::TiltOutOfRange {
            t,
            max_t: f64::INFINITY,
        });
    }
    let g = |u: f64| model.dq_raw(u.exp()) - t;
    let dg = |u: f64| {
        let x = u.exp();
        model.d2q_raw(x) * x
    };
    // q' is decreasing beyond the concavity edge; expand left until q' > t
    let edge = model.concave_from();
    let mut u_lo = if edge > 0.0 { edge.ln() + 1e-9 } else { 0.0 };
    let mut k = 0;
    while g(u_lo) <= 0.0 {
        if edge > 0.0 {
            // bounded left edge: q' never reaches t
            let max_t = model.dq_raw(edge.max(model.a * (1.0 + 1e-9)));
            return Err(ContourError::TiltOutOfRange { t, max_t });
        }
        u_lo -= 2.0;
        k += 1;
        if k > 400 {
            return Err(ContourError::TiltOutOfRange { t, max_t: f64::NAN });
        }
    }
    let mut u_hi = u_lo + 2.0;
    let mut j = 0;
    while g(u_hi) >= 0.0 {
        u_hi += 2.0;
        j += 1;
        if j > 600 {
            return Err(ContourError::TiltOutOfRange { t, max_t: f64::NAN });
        }
    }
    Ok(solve_bracketed(g, dg, u_lo, u_hi)?.exp())
}

/// ψ(t) = tξ(t) − q(ξ(t)) and derivatives; ψ' = ξ, ψ'' = 1/q''(ξ),
/// ψ''' = −q'''(ξ)/q''(ξ)³.
#[derive(Clone, Copy, Debug)]
pub struct PsiDerivs {
    pub xi: f64,
    pub psi: f64,
    pub d2: f64,
    pub d3: f64,
}

pub fn psi(model: &WeightModel, t: f64) -> Result<PsiDerivs, ContourError> {
    let xi = xi_of_t(model, t)?;
    let d2q = model.d2q_raw(xi);
    Ok(PsiDerivs {
        xi,
        psi: t * xi - model.q(xi),
        d2: 1.0 / d2q,
        d3: -model.d3q_raw(xi) / (d2q * d2q * d2q),
    })
}

/// Im G(e^t) ξ^d-moment by the Bromwich integral on the saddle line
/// x₀ = max(line, ξ(t)); the integrand peaks at the answer's own scale.
fn im_g_bromwich_d(model: &WeightModel, t: f64, deriv: u32) -> Result<LogNum, ContourError> {
    if t < 0.0 {
        return Err(ContourError::TiltOutOfRange { t, max_t: 0.0 });
    }
    // unlike the Lindelöf integral there is no 1/sin kernel here, so the line
    // is free to sit anywhere right of b — in particular on the saddle ξ(t),
    // where the phase is stationary at s = 0 and nothing oscillates
    let base = line_abscissa(model);
    let (x0, on_saddle) = match xi_of_t(model, t) {
        Ok(xi) if xi > model.b => (xi, true),
        _ => (base, false),
    };
    let log_c = model.log_c.expect("model not normalized");
    let width0 = {
        let d2 = model.d2q_raw(x0).abs();
        if d2 > 0.0 {
            (1.0 / d2.sqrt()).clamp(0.05, 1e6)
        } else {
            2.0
        }
    };
    let f = |s: f64| -> Complex64 {
        let xi = Complex64::new(x0, s);
        let mut l = -model.q_raw_complex(xi) + log_c + xi * t;
        if deriv > 0 {
            l += (deriv as f64) * xi.ln();
        }
        l
    };
    // conjugate symmetry: full-line integral = 2 Re ∫₀^∞, and Im G = ½ · full.
    // Off the saddle line at large t the integrand oscillates at frequency ~t
    // with heavy cancellation; f64 roundoff caps the attainable accuracy there
    let rel = if !on_saddle && t > 0.5 { 1e-7 } else { 1e-10 };
    // 25-nat tail cutoff: 1.4e-11 relative truncation, and it terminates the
    // cancellation-limited far-tail segments that cannot meet `rel` on their
    // own. The panel budget grows with t: the tail oscillates at frequency t
    let max_panels = 4000 + 400 * (t.max(0.0) as usize);
    let r = integrate_log_tail(f, 0.0, width0, rel, 25.0, max_panels)?;
    Ok(r.value.real_lognum())
}

/// Im G(e^t) for t ≥ 0 (signed log-space value).
pub fn im_g_bromwich(model: &WeightModel, t: f64) -> Result<LogNum, ContourError> {
    im_g_bromwich_d(model, t, 0)
}

/// Saddle-point asymptote Im G(e^t) ≈ ½ √(2π|ψ''(t)|) e^{ψ(t)}.
pub fn im_g_saddle(model: &WeightModel, t: f64) -> Result<LogNum, ContourError> {
    let p = psi(model, t)?;
    Ok(LogNum::from_ln(
        (0.5 * (2.0 * PI * p.d2.abs()).sqrt()).ln() + p.psi,
    ))
}

/// Split-log complex scalar: re + i·im with each part a signed log number.
#[derive(Clone, Copy, Debug)]
struct Lc {
    re: LogNum,
    im: LogNum,
}

impl Lc {
    fn mul(self, o: Lc) -> Lc {
        Lc {
            re: self.re.mul(o.re).sub(self.im.mul(o.im)),
            im: self.re.mul(o.im).add(self.im.mul(o.re)),
        }
    }
    fn sub(self, o: Lc) -> Lc {
        Lc {
            re: self.re.sub(o.re),
            im: self.im.sub(o.im),
        }
    }
    fn div(self, o: Lc) -> Lc {
        let n2 = o.re.mul(o.re).add(o.im.mul(o.im));
        let conj = Lc {
            re: o.re,
            im: o.im.neg(),
        };
        let p = self.mul(conj);
        Lc {
            re: p.re.div(n2),
            im: p.im.div(n2),
        }
    }
}

/// Boundary values of φ = Log G(e^t) and two derivatives on the slit side
/// Im t = 0⁺. Imaginary parts are kept in signed log form: they decay
/// faster than any power of t and underflow f64 long before they stop
/// mattering inside sin(n Im φ).
#[derive(Clone, Copy, Debug)]
pub struct BoundaryPhi {
    pub re_phi: f64,
    pub im_phi: LogNum,
    pub re_dphi: f64,
    pub im_dphi: LogNum,
    pub re_d2phi: f64,
    pub im_d2phi: LogNum,
}

/// φ and derivatives at real t. For t ≤ 0 the series for G converges and
/// everything is a direct sum; for t > 0 the real parts come from the Fermi
/// integral L(t − iπ) and the imaginary parts from the Bromwich integral.
pub fn phi_boundary_full(model: &WeightModel, t: f64) -> Result<BoundaryPhi, ContourError> {
    let g0 = g_lc_boundary(model, t, 0)?;
    let g1 = g_lc_boundary(model, t, 1)?;
    let g2 = g_lc_boundary(model, t, 2)?;
    let n2 = g0.re.mul(g0.re).add(g0.im.mul(g0.im));
    let re_phi = 0.5 * n2.ln_abs;
    let im_phi = arg_lognum(g0);
    let dphi = g1.div(g0);
    let d2phi = g2.div(g0).sub(dphi.mul(dphi));
    Ok(BoundaryPhi {
        re_phi,
        im_phi,
        re_dphi: dphi.re.to_f64(),
        im_dphi: dphi.im,
        re_d2phi: d2phi.re.to_f64(),
        im_d2phi: d2phi.im,
    })
}

/// Spec'd triple (Re φ, Re φ', Re φ'').
pub fn phi_boundary(model: &WeightModel, t: f64) -> Result<(f64, f64, f64), ContourError> {
    let b = phi_boundary_full(model, t)?;
    Ok((b.re_phi, b.re_dphi, b.re_d2phi))
}

fn arg_lognum(g: Lc) -> LogNum {
    if g.im.is_zero() {
        return LogNum::ZERO;
    }
    if g.re.is_zero() {
        return LogNum::from_f64(g.im.sign as f64 * std::f64::consts::FRAC_PI_2);
    }
    let ratio_ln = g.im.ln_abs - g.re.ln_abs;
    if g.re.sign > 0 && ratio_ln < (1e-8f64).ln() {
        g.im.div(g.re)
    } else {
        LogNum::from_f64((g.im.sign as f64 * ratio_ln.exp()).atan2(g.re.sign as f64))
    }
}

fn g_lc_boundary(model: &WeightModel, t: f64, deriv: u32) -> Result<Lc, ContourError> {
    if t <= 0.0 {
        // direct series Σ k^d p(k) e^{kt}: convergent, positive terms
        let mut sum = crate::logspace::CompensatedSum::new();
        let mut streak = 0;
        let mut k = 1.0f64;
        loop {
            let term = (model.log_p(k) + k * t + (deriv as f64) * k.ln()).exp();
            sum.add(term);
            if term < 1e-18 * sum.value() {
                streak += 1;
                if streak >= 10 {
                    break;
                }
            } else {
                streak = 0;
            }
            k += 1.0;
            if k > 5e7 {
                break;
            }
        }
        Ok(Lc {
            re: LogNum::from_f64(sum.value()),
            im: LogNum::ZERO,
        })
    } else {
        let fermi = g_on_strip(model, Complex64::new(t, 0.0), deriv)?;
        // when ψ is very deep, Im G ~ e^ψ is far below anything it can
        // influence; the saddle value (relative accuracy O(t)) is plenty and
        // avoids Bromwich lines at enormous abscissae ξ(t)
        let im = match psi(model, t) {
            Ok(p) if p.psi < -100.0 => LogNum::from_ln(
                (0.5 * (2.0 * PI * p.d2.abs()).sqrt()).ln()
                    + p.psi
                    + (deriv as f64) * p.xi.ln(),
            ),
            _ => im_g_bromwich_d(model, t, deriv)?,
        };
        Ok(Lc {
            re: fermi.real_lognum(),
            im,
        })
    }
}

/// φ and Im φ only (cheap path for the slit-hugging integrand).
fn phi_value_boundary(model: &WeightModel, t: f64) -> Result<(f64, LogNum), ContourError> {
    let g0 = g_lc_boundary(model, t, 0)?;
    let n2 = g0.re.mul(g0.re).add(g0.im.mul(g0.im));
    Ok((0.5 * n2.ln_abs, arg_lognum(g0)))
}

/// η with Re φ'(η) = μ + N/n: Taylor-polynomial initial inversion of order
/// `r`, polished by Newton on the exact boundary derivative. `delta` is the
/// small-t cutoff within which the cumulant expansion controls φ.
pub fn eta_n(
    model: &WeightModel,
    cum: &CumulantSet,
    n: usize,
    big_n: f64,
    r: usize,
    delta: f64,
) -> Result<f64, ContourError> {
    if big_n == 0.0 {
        return Ok(0.0);
    }
    let target = cum.mu + big_n / n as f64;
    // Taylor initial guess: solve Σ_{j≥1} κ_j t^{j-1}/(j-1)! = target
    let nk = r.max(2).min(cum.kappas.len());
    let taylor_d = |t: f64| -> f64 {
        let mut fac = 1.0;
        let mut acc = 0.0;
        for (j, &k) in cum.kappas.iter().enumerate().take(nk) {
            if j > 0 {
                fac *= j as f64;
            }
            acc += k * t.powi(j as i32) / fac;
        }
        acc
    };
    let mut t0 = (big_n / n as f64) / cum.sigma2;
    for _ in 0..50 {
        let h = 1e-6 * (1.0 + t0.abs());
        let d = (taylor_d(t0 + h) - taylor_d(t0 - h)) / (2.0 * h);
        let step = (taylor_d(t0) - target) / d;
        t0 -= step;
        if step.abs() < 1e-14 * (1.0 + t0.abs()) {
            break;
        }
    }
    let mut eta = t0.clamp(1e-12, delta);
    // exact Newton; Re φ' is increasing in the small-t window where the root
    // lives (beyond it, boundary Re φ' turns over and falls off like ξ(t))
    for _ in 0..40 {
        let (_, d1, d2) = phi_boundary(model, eta)?;
        let step = (d1 - target) / d2;
        let next = (eta - step).clamp(0.25 * eta, delta.min(4.0 * eta));
        let done = (next - eta).abs() <= 1e-12 * eta.abs();
        eta = next;
        if done {
            break;
        }
    }
    // feasibility is decided by convergence, not by the value at delta:
    // Re phi' is not monotone on (0, delta]
    let (_, d1, _) = phi_boundary(model, eta)?;
    if (d1 - target).abs() > 1e-7 * target.abs().max(1.0) {
        return Err(ContourError::NoEta {
            delta,
            at_delta: d1,
            target,
        });
    }
    Ok(eta)
}

/// Critical point of the bivariate phase
/// Φ_n(t, ξ) = −q(ξ) + n Re φ(t) − mt + tξ, reduced to the scalar problem
/// Ψ'_n(t) = n Re φ'(t) − m + ξ(t) = 0.
#[derive(Clone, Copy, Debug)]
pub struct PhasePoint {
    pub t_n: f64,
    pub xi_n: f64,
    /// [[n Re φ''(t_n), 1], [1, −q''(ξ_n)]]
    pub hess: [[f64; 2]; 2],
    pub hess_det: f64,
    pub psi_at_tn: f64,
    pub phi_at_crit: f64,
}

fn make_phase_point(
    model: &WeightModel,
    n: usize,
    m: f64,
    t_n: f64,
) -> Result<PhasePoint, ContourError> {
    let b = phi_boundary_full(model, t_n)?;
    let xi_n = xi_of_t(model, t_n)?;
    let nf = n as f64;
    let h00 = nf * b.re_d2phi;
    let h11 = -model.d2q_raw(xi_n);
    let hess_det = h00 * h11 - 1.0;
    let p = psi(model, t_n)?;
    Ok(PhasePoint {
        t_n,
        xi_n,
        hess: [[h00, 1.0], [1.0, h11]],
        hess_det,
        psi_at_tn: p.psi,
        phi_at_crit: -model.q(xi_n) + nf * b.re_phi - m * t_n + t_n * xi_n,
    })
}

/// Ψ'_n(t) = n Re φ'(t) − m + ξ(t); its two zeros straddle the inflection
/// t* = q'(x*). Returns (inner saddle (t_n, ξ_n), outer point if present).
pub fn phi_n_critical(
    model: &WeightModel,
    cum: &CumulantSet,
    n: usize,
    big_n: f64,
    delta: f64,
) -> Result<(PhasePoint, Option<PhasePoint>), ContourError> {
    let m = n as f64 * cum.mu + big_n;
    let x_star = variational::inflection_x_star(model, cum.sigma2, n)?;
    let t_star = model.dq_raw(x_star);
    let cache: RefCell<Option<ContourError>> = RefCell::new(None);
    let psi_p = |t: f64| -> f64 {
        match (phi_boundary(model, t), xi_of_t(model, t)) {
            (Ok((_, d1, _)), Ok(xi)) => n as f64 * d1 - m + xi,
            (Err(e), _) | (_, Err(e)) => {
                *cache.borrow_mut() = Some(e);
                f64::NAN
            }
        }
    };
    let psi_pp = |t: f64| -> f64 {
        match (phi_boundary(model, t), xi_of_t(model, t)) {
            (Ok((_, _, d2)), Ok(xi)) => n as f64 * d2 + 1.0 / model.d2q_raw(xi),
            _ => f64::NAN,
        }
    };
    let check = |r: Result<f64, RootError>| -> Result<f64, ContourError> {
        if let Some(e) = cache.borrow_mut().take() {
            return Err(e);
        }
        Ok(r?)
    };
    let at_star = psi_p(t_star);
    if let Some(e) = cache.borrow_mut().take() {
        return Err(e);
    }
    if !(at_star < 0.0) {
        return Err(ContourError::NoPhaseCritical {
            t_star,
            value: at_star,
        });
    }
    // inner root: Ψ' → +∞ as t → 0 (ξ(t) → ∞), so walk down until positive
    let mut t_lo = t_star;
    for _ in 0..200 {
        t_lo *= 0.5;
        let v = psi_p(t_lo);
        if let Some(e) = cache.borrow_mut().take() {
            return Err(e);
        }
        if v > 0.0 {
            break;
        }
    }
    let t_n = check(solve_bracketed(&psi_p, &psi_pp, t_lo, t_star))?;
    let inner = make_phase_point(model, n, m, t_n)?;

    // outer root in (t*, η) when the vertical cut is within reach
    let outer = match eta_n(model, cum, n, big_n, 6, delta) {
        Ok(eta) if eta > t_star => {
            let v = psi_p(eta);
            if let Some(e) = cache.borrow_mut().take() {
                return Err(e);
            }
            if v > 0.0 {
                let t_pn = check(solve_bracketed(&psi_p, &psi_pp, t_star, eta))?;
                Some(make_phase_point(model, n, m, t_pn)?)
            } else {
                None
            }
        }
        _ => None,
    };
    Ok((inner, outer))
}

/// The two contour pieces and their sum for P(S_n = m) = [z^m] G(z)^n.
#[derive(Clone, Debug)]
pub struct ContourResult {
    pub h_n: LogNum,
    pub v_n: LogNum,
    pub total: LogNum,
    pub eta: f64,
    pub h_err_ln: f64,
    pub v_err_ln: f64,
}

/// Evaluate H_n + V_n at integer m. `delta` caps the vertical-cut abscissa;
/// when the stationary η does not exist (deep big-jump deviations) the cut
/// falls back to δ itself.
pub fn contour_hn_vn(
    model: &WeightModel,
    cum: &CumulantSet,
    n: usize,
    m: i64,
    delta: f64,
) -> Result<ContourResult, ContourError> {
    let nf = n as f64;
    let mf = m as f64;
    let big_n = mf - nf * cum.mu;
    let eta = match eta_n(model, cum, n, big_n, 6, delta) {
        Ok(e) => e,
        Err(ContourError::NoEta { .. }) => delta,
        Err(e) => return Err(e),
    }
    .max(1e-9);

    // below t_floor, n·Im φ ~ n e^{ψ(t)} underflows f64 anyway, and the
    // Bromwich line ξ(t) would sit at an absurd abscissa — skip outright
    let t_floor = {
        let ln_n = (n as f64).ln();
        let mut lo = 0.0f64;
        let mut hi = eta;
        if psi(model, eta).map(|p| p.psi + ln_n < -730.0).unwrap_or(false) {
            lo = eta; // whole interval underflows; H_n = 0
        } else {
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                match psi(model, mid) {
                    Ok(p) if p.psi + ln_n > -730.0 => hi = mid,
                    _ => lo = mid,
                }
            }
        }
        lo
    };

    // H_n = (1/π) ∫₀^η e^{n Re φ − mt} sin(n Im φ) dt
    let h_err: RefCell<Option<ContourError>> = RefCell::new(None);
    let h_integrand = |t: f64| -> Complex64 {
        if t <= t_floor {
            return Complex64::new(f64::NEG_INFINITY, 0.0);
        }
        let (re_phi, im_phi) = match phi_value_boundary(model, t) {
            Ok(v) => v,
            Err(e) => {
                *h_err.borrow_mut() = Some(e);
                return Complex64::new(f64::NEG_INFINITY, 0.0);
            }
        };
        let n_imphi = im_phi.scale(nf);
        // sin(x) ≈ x below 1e−4: relative error < x²/6 ≤ 2e−9
        let sin_ln = if n_imphi.ln_abs < (1e-4f64).ln() {
            n_imphi
        } else {
            LogNum::from_f64(n_imphi.to_f64().sin())
        };
        if sin_ln.is_zero() {
            return Complex64::new(f64::NEG_INFINITY, 0.0);
        }
        let ln = nf * re_phi - mf * t + sin_ln.ln_abs - PI.ln();
        Complex64::new(ln, if sin_ln.sign > 0 { 0.0 } else { PI })
    };
    let (h_val, h_err_ln) = if eta - t_floor > 1e-15 {
        let r = integrate_log(h_integrand, t_floor, eta, 1e-9, f64::NEG_INFINITY, 4000)?;
        if let Some(e) = h_err.borrow_mut().take() {
            return Err(e);
        }
        (r.value, r.err_ln)
    } else {
        (crate::quad::LogComplex::ZERO, f64::NEG_INFINITY)
    };

    // V_n = (1/π) Re ∫₀^π G(e^{η+iθ})^n e^{−m(η+iθ)} dθ — branch-free since
    // n, m are integers
    let v_err: RefCell<Option<ContourError>> = RefCell::new(None);
    let v_integrand = |theta: f64| -> Complex64 {
        let t = Complex64::new(eta, theta);
        let g = match g_on_strip(model, t, 0) {
            Ok(g) => g,
            Err(e) => {
                *v_err.borrow_mut() = Some(e);
                return Complex64::new(f64::NEG_INFINITY, 0.0);
            }
        };
        let ln_g = Complex64::new(g.ln_norm(), g.unit.arg());
        let w = ln_g * nf - t * mf;
        Complex64::new(w.re - PI.ln(), w.im)
    };
    let v_res = integrate_log(v_integrand, 0.0, PI, 1e-9, f64::NEG_INFINITY, 4000)?;
    if let Some(e) = v_err.borrow_mut().take() {
        return Err(e);
    }

    let h_n = h_val.real_lognum();
    let v_n = v_res.value.real_lognum();
    Ok(ContourResult {
        h_n,
        v_n,
        total: h_n.add(v_n),
        eta,
        h_err_ln,
        v_err_ln: v_res.err_ln,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactprob::normalize;
    use crate::weights::{make_loghazard, make_stretched};

    fn stretched_half() -> WeightModel {
        let mut m = make_stretched(0.5).unwrap();
        normalize(&mut m, 1e-14).unwrap();
        m
    }

    fn loghazard3() -> WeightModel {
        let mut m = make_loghazard(3.0).unwrap();
        normalize(&mut m, 1e-14).unwrap();
        m
    }

    fn series_g(model: &WeightModel, z: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for k in 1..400_000 {
            let term = Complex64::new(model.log_p(k as f64), 0.0).exp() * z.powi(k);
            acc += term;
            if term.norm() < 1e-18 * acc.norm().max(1e-300) && k > 50 {
                break;
            }
        }
        acc
    }

    #[test]
    fn lindelof_matches_series_inside_disk() {
        for model in [stretched_half(), loghazard3()] {
            for z in [
                Complex64::new(0.5, 0.3),
                Complex64::new(-0.8, 0.1),
                Complex64::new(0.0, -0.9),
                Complex64::new(0.6, 0.0),
            ] {
                let a = lindelof_g(&model, z).unwrap();
                let b = series_g(&model, z);
                assert!(
                    (a - b).norm() <= 1e-10 * b.norm().max(1e-3),
                    "{:?} at {z}: {a} vs {b}",
                    model.family
                );
            }
        }
    }

    #[test]
    fn lindelof_conjugate_symmetry_and_realness() {
        let model = stretched_half();
        let z = Complex64::new(1.2, 0.5);
        let a = lindelof_g(&model, z).unwrap();
        let b = lindelof_g(&model, z.conj()).unwrap();
        assert!((a - b.conj()).norm() < 1e-10 * a.norm());
        let r = lindelof_g(&model, Complex64::new(0.7, 0.0)).unwrap();
        assert!(r.im.abs() < 1e-12);
        assert!(lindelof_g(&model, Complex64::new(1.5, 0.0)).is_err());
    }

    #[test]
    fn bromwich_closed_form_alpha_half() {
        // Im G(e^t) = c√π/(2 t^{3/2}) e^{−1/(4t)}
        let model = stretched_half();
        let c_ln = model.log_c.unwrap();
        for &t in &[0.05, 0.1, 0.2, 0.5] {
            let got = im_g_bromwich(&model, t).unwrap();
            let expect_ln = c_ln + (PI.sqrt() / (2.0 * t.powf(1.5))).ln() - 1.0 / (4.0 * t);
            assert!(got.sign > 0);
            assert!(
                (got.ln_abs - expect_ln).abs() < 1e-8,
                "t={t}: {} vs {expect_ln}",
                got.ln_abs
            );
        }
    }

    #[test]
    fn bromwich_vanishes_at_zero() {
        let model = stretched_half();
        let got = im_g_bromwich(&model, 0.0).unwrap();
        assert!(got.to_f64().abs() <= 1e-10, "{got:?}");
    }

    #[test]
    fn bromwich_line_independence() {
        // replace the saddle line by the fixed lines x₀ and x₀+1
        let model = stretched_half();
        let t = 0.2;
        let log_c = model.log_c.unwrap();
        let on_line = |x0: f64| -> LogNum {
            let f = |s: f64| -> Complex64 {
                let xi = Complex64::new(x0, s);
                -model.q_raw_complex(xi) + log_c + xi * t
            };
            integrate_log_tail(f, 0.0, 2.0, 1e-11, 40.0, 4000)
                .unwrap()
                .value
                .real_lognum()
        };
        let a = on_line(0.5);
        let b = on_line(1.5);
        assert!((a.to_f64() - b.to_f64()).abs() <= 1e-9 * a.to_f64().abs());
    }

    #[test]
    fn stretched_general_alpha_asymptote() {
        let alpha = 0.6;
        let mut model = make_stretched(alpha).unwrap();
        normalize(&mut model, 1e-14).unwrap();
        let c_ln = model.log_c.unwrap();
        let asympt_ln = |t: f64| -> f64 {
            let pre = 0.5 * (2.0 * PI / ((1.0 - alpha) * alpha.powf(-1.0 / (1.0 - alpha)))).sqrt();
            c_ln + pre.ln() - (1.0 - alpha) * (alpha / t).powf(alpha / (1.0 - alpha))
                - (2.0 - alpha) / (2.0 - 2.0 * alpha) * t.ln()
        };
        let t = 0.05;
        let got = im_g_bromwich(&model, t).unwrap();
        let ratio = (got.ln_abs - asympt_ln(t)).exp();
        assert!((ratio - 1.0).abs() < 0.05, "ratio {ratio}");
        let t2 = 0.02;
        let got2 = im_g_bromwich(&model, t2).unwrap();
        let ratio2 = (got2.ln_abs - asympt_ln(t2)).exp();
        assert!((ratio2 - 1.0).abs() < (ratio - 1.0).abs());
    }

    #[test]
    fn xi_and_psi_closed_forms() {
        let model = stretched_half();
        for &t in &[0.05, 0.1, 0.3] {
            let xi = xi_of_t(&model, t).unwrap();
            assert!((xi - 1.0 / (4.0 * t * t)).abs() < 1e-9 * xi);
            let p = psi(&model, t).unwrap();
            let expect = -1.0 / (4.0 * t) + model.log_c.unwrap();
            assert!((p.psi - expect).abs() < 1e-9 * expect.abs());
            // q''(ξ) = −¼ ξ^{−3/2} = −2t³, so ψ'' = 1/q'' = −1/(2t³)
            let d2_expect = -1.0 / (2.0 * t * t * t);
            assert!((p.d2 - d2_expect).abs() < 1e-9 * d2_expect.abs());
            assert!(p.d2 < 0.0);
        }
    }

    #[test]
    fn saddle_ratio_approaches_one_both_families() {
        for model in [stretched_half(), loghazard3()] {
            let mut prev = f64::INFINITY;
            for &t in &[0.2, 0.1, 0.05, 0.025] {
                let b = im_g_bromwich(&model, t).unwrap();
                let s = im_g_saddle(&model, t).unwrap();
                let ratio = (b.ln_abs - s.ln_abs).exp();
                let dist = (ratio - 1.0).abs();
                assert!(
                    dist < prev + 1e-6,
                    "{:?} t={t}: ratio {ratio}, prev dist {prev}",
                    model.family
                );
                prev = dist;
                if t == 0.05 {
                    assert!(dist < 0.1, "{:?}: ratio {ratio} at t=0.05", model.family);
                }
            }
        }
    }

    #[test]
    fn phi_boundary_at_zero_and_negative_t() {
        let model = stretched_half();
        let cum = crate::exactprob::cumulants(&model, 2).unwrap();
        let (p0, p1, p2) = phi_boundary(&model, 0.0).unwrap();
        assert!(p0.abs() < 1e-12);
        assert!((p1 - cum.mu).abs() < 1e-10);
        assert!((p2 - cum.sigma2).abs() < 1e-8);
        // direct series oracle at t = −0.1
        let t = -0.1;
        let mut g = 0.0f64;
        for k in 1..200_000 {
            let term = (model.log_p(k as f64) + k as f64 * t).exp();
            g += term;
            if term < 1e-18 * g {
                break;
            }
        }
        let (re, _, _) = phi_boundary(&model, t).unwrap();
        assert!((re - g.ln()).abs() < 1e-12);
    }

    #[test]
    fn phi_boundary_positive_t_matches_taylor() {
        // the cumulant series of φ is only asymptotic (G's power series
        // diverges for t > 0), so compare at small t where the truncation
        // error of order 8 and the e^{−1/(4t)} discontinuity scale are tiny
        let model = stretched_half();
        let cum = crate::exactprob::cumulants(&model, 8).unwrap();
        let t = 0.01;
        let (re, d1, _) = phi_boundary(&model, t).unwrap();
        let mut taylor = 0.0;
        let mut dtaylor = 0.0;
        let mut fac = 1.0;
        for (j, &k) in cum.kappas.iter().enumerate() {
            fac *= (j + 1) as f64;
            taylor += k * t.powi(j as i32 + 1) / fac;
            dtaylor += k * t.powi(j as i32) / (fac / (j + 1) as f64);
        }
        assert!((re - taylor).abs() < 1e-5, "{re} vs {taylor}");
        assert!((d1 - dtaylor).abs() < 1e-3, "{d1} vs {dtaylor}");
    }

    #[test]
    fn eta_n_behaviour() {
        let model = stretched_half();
        let cum = crate::exactprob::cumulants(&model, 6).unwrap();
        let n = 10_000usize;
        assert_eq!(eta_n(&model, &cum, n, 0.0, 6, 0.25).unwrap(), 0.0);
        let big_n = 100.0; // N/n = 0.01
        let eta = eta_n(&model, &cum, n, big_n, 6, 0.25).unwrap();
        let lead = eta * n as f64 * cum.sigma2 / big_n;
        assert!((0.9..=1.1).contains(&lead), "leading ratio {lead}");
        let eta4 = eta_n(&model, &cum, n, 10.0, 4, 0.25).unwrap();
        let eta6 = eta_n(&model, &cum, n, 10.0, 6, 0.25).unwrap();
        assert!((eta4 - eta6).abs() < 1e-10);
    }

    #[test]
    fn inverse_laplace_roundtrip() {
        // p(k) = (1/π) ∫₀^∞ e^{−tk} Im G(e^t) dt
        let model = stretched_half();
        for &k in &[5.0f64, 10.0, 20.0] {
            // outside [0.004, (30+√k)/k] the integrand sits ≥ 30 nats below
            // its peak; skipping keeps the Bromwich lines well-conditioned
            let t_hi = (30.0 + k.sqrt()) / k;
            let f = |t: f64| -> Complex64 {
                if t <= 0.004 || t >= t_hi {
                    return Complex64::new(f64::NEG_INFINITY, 0.0);
                }
                let im = im_g_bromwich(&model, t).unwrap();
                Complex64::new(-t * k + im.ln_abs, if im.sign >= 0 { 0.0 } else { PI })
            };
            // saddle of e^{−tk−1/(4t)} at t = 1/(2√k); integrate a generous window
            // large-t boundary values carry ~1e-7 relative noise (off-saddle
            // cancellation), so the outer tolerance cannot be tighter
            let r = integrate_log_tail(f, 0.0, 1.0 / k.sqrt(), 3e-7, 40.0, 800).unwrap();
            let got = r.value.real_lognum().scale(1.0 / PI).to_f64();
            let expect = model.log_p(k).exp();
            assert!(
                (got - expect).abs() < 1e-6 * expect,
                "k={k}: {got} vs {expect}"
            );
        }
    }

    #[test]
    fn contour_split_matches_exact_convolution() {
        // H_n + V_n must reproduce the exact n-fold convolution probability
        let cases: Vec<(WeightModel, usize, i64)> = {
            let s = stretched_half();
            let l = loghazard3();
            let cs = crate::exactprob::cumulants(&s, 2).unwrap();
            let cl = crate::exactprob::cumulants(&l, 2).unwrap();
            let ms = |n: usize, d: i64| (n as f64 * cs.mu).round() as i64 + d;
            let ml = |n: usize, d: i64| (n as f64 * cl.mu).round() as i64 + d;
            vec![
                (s.clone(), 4, ms(4, 5)),
                (s, 8, ms(8, 20)),
                (l.clone(), 8, ml(8, 0)),
                (l, 8, ml(8, 5)),
            ]
        };
        for (model, n, m) in cases {
            let cum = crate::exactprob::cumulants(&model, 2).unwrap();
            let r = contour_hn_vn(&model, &cum, n, m, 0.25).unwrap();
            let ln_exact = crate::exactprob::exact_point_prob(&model, n, m).unwrap();
            let dln = r.total.ln_abs - ln_exact;
            assert!(
                dln.abs() < 1e-8,
                "n={n} m={m}: split {} vs exact {ln_exact}",
                r.total.ln_abs
            );
        }
    }

    #[test]
    fn phase_point_properties() {
        let model = stretched_half();
        let cum = crate::exactprob::cumulants(&model, 2).unwrap();
        let n = 100usize;
        let sc = variational::critical_scales(&model, cum.sigma2, n).unwrap();
        let big_n = 2.0 * sc.n_star;
        let (inner, _) = phi_n_critical(&model, &cum, n, big_n, 0.25).unwrap();
        // inner point sits below the inflection tilt, dual to ξ beyond x*
        assert!(inner.t_n < sc.t_star, "t_n {} vs t* {}", inner.t_n, sc.t_star);
        assert!(inner.xi_n > sc.x_star);
        // stationarity: n Re φ'(t_n) − m + ξ(t_n) = 0
        let m = n as f64 * cum.mu + big_n;
        let (_, d1, d2) = phi_boundary(&model, inner.t_n).unwrap();
        let resid = n as f64 * d1 - m + inner.xi_n;
        assert!(resid.abs() < 1e-6 * m, "stationarity residual {resid}");
        // saddle Hessian: indefinite, with the stated block entries
        assert!(inner.hess_det < 0.0);
        assert!((inner.hess[0][0] - n as f64 * d2).abs() < 1e-8 * (n as f64 * d2).abs());
        assert_eq!(inner.hess[0][1], 1.0);
        let q2 = model.d2q_raw(inner.xi_n);
        // one-variable reparametrization: Ψ''(t) = −det H / q''(ξ)
        let beta = -inner.hess_det / q2;
        let psi2 = n as f64 * d2 + 1.0 / q2;
        assert!(
            (beta - psi2).abs() < 1e-10 * psi2.abs().max(1.0),
            "beta {beta} vs psi'' {psi2}"
        );
    }

    #[test]
    fn phase_stationarity_sign_pattern() {
        // Ψ'(t) = n Re φ'(t) − m + ξ(t): negative at t*, with a root on each
        // side once N exceeds the onset scale
        let model = stretched_half();
        let cum = crate::exactprob::cumulants(&model, 2).unwrap();
        let n = 100usize;
        let sc = variational::critical_scales(&model, cum.sigma2, n).unwrap();
        let big_n = 2.0 * sc.n_star;
        let m = n as f64 * cum.mu + big_n;
        let psi_p = |t: f64| {
            let (_, d1, _) = phi_boundary(&model, t).unwrap();
            n as f64 * d1 - m + xi_of_t(&model, t).unwrap()
        };
        assert!(psi_p(sc.t_star) < 0.0);
        let (inner, _) = phi_n_critical(&model, &cum, n, big_n, 0.25).unwrap();
        // strictly decreasing through the inner root
        assert!(psi_p(0.5 * inner.t_n) > 0.0);
        assert!(psi_p(1.5 * inner.t_n.min(sc.t_star / 1.5)) < 0.0);
        // below the onset scale there is no critical point
        let err = phi_n_critical(&model, &cum, n, 0.2 * sc.n_star, 0.25);
        assert!(matches!(err, Err(ContourError::NoPhaseCritical { .. })));
    }

    #[test]
    fn outer_phase_point_when_eta_reachable() {
        let model = stretched_half();
        let cum = crate::exactprob::cumulants(&model, 2).unwrap();
        let n = 10_000usize;
        let sc = variational::critical_scales(&model, cum.sigma2, n).unwrap();
        let (inner, outer) = phi_n_critical(&model, &cum, n, 1.2 * sc.n_star, 0.25).unwrap();
        if let Some(o) = outer {
            assert!(o.t_n > inner.t_n);
            assert!(o.xi_n < inner.xi_n);
            // Ψ' crosses upward at the outer root, so Ψ'' > 0 there; with
            // q'' < 0 for this family the 2×2 determinant −Ψ''·q'' is positive
            assert!(o.hess_det > 0.0);
        }
    }
}

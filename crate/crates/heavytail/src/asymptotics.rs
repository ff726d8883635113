//! Point-probability estimators for P(S_n = nμ + N) assembled from the
//! variational layer: a Gaussian×Cramér collective term and a single-big-jump
//! term, combined by regime.
//!
//! The collective (v) term is
//!     log v = −N²/(2nσ²) + (N³/n²) Σ_{j<r} λ_j (N/n)^j − ½ log(2πσ²n),
//! the jump (h) term is
//!     log h = log n − ½ log(1 − nσ²|q''(x_{nr})|) − f_{nr}(x_{nr}),
//! with x_{nr} the zero of f'_{nr} beyond the inflection scale x*. In the
//! moderate regime only v is kept; in the critical window both terms are
//! evaluated and combined by log-sum-exp (their crossing is the break-even
//! scale N**); deep in the big-jump regime h alone remains, and with r = 0 it
//! reproduces the refined one-jump heuristic n e^{−f_n(x_n)}/√(1 − nσ²|q''|)
//! exactly. The truncation order r is chosen so that n (N*/n)^r is below a
//! configurable threshold.

use std::f64::consts::PI;

use thiserror::Error;

use crate::cramer::{cramer_correction, cramer_lambda, CramerCoeffs, CramerError};
use crate::exactprob::CumulantSet;
use crate::variational::{
    classify_regime, critical_scales, f_nr, insensitivity, truncated_critical_point, Regime,
    RegimeThresholds, VarError,
};
use crate::weights::WeightModel;

#[derive(Debug, Error)]
pub enum AsymptoticsError {
    #[error(transparent)]
    Var(#[from] VarError),
    #[error(transparent)]
    Cramer(#[from] CramerError),
    #[error("order r = {need} requires {} cumulants, have {have}", need + 2)]
    NotEnoughCumulants { need: usize, have: usize },
}

/// Log-space component breakdown of an estimate.
#[derive(Clone, Copy, Debug, Default)]
pub struct Components {
    pub v_term_log: Option<f64>,
    pub h_term_log: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct DeviationEstimate {
    pub regime: Regime,
    pub log_value: f64,
    pub components: Components,
    pub r_used: usize,
    /// zero of f'_{nr} (present when the jump term is evaluated)
    pub x_nr: Option<f64>,
    /// phase critical point, when a caller has run the contour machinery
    pub saddle: Option<crate::contour::PhasePoint>,
    /// provenance of each component
    pub notes: Vec<String>,
}

/// Driver knobs for `estimate_auto`.
#[derive(Clone, Debug)]
pub struct AutoConfig {
    /// r is the smallest order with n (N*/n)^r < r_threshold
    pub r_threshold: f64,
    pub r_max: usize,
    pub thresholds: RegimeThresholds,
    pub force_regime: Option<Regime>,
}

impl Default for AutoConfig {
    fn default() -> Self {
        AutoConfig {
            r_threshold: 1e-3,
            r_max: 6,
            thresholds: RegimeThresholds::default(),
            force_regime: None,
        }
    }
}

fn check_order(cum: &CumulantSet, r: usize) -> Result<(), AsymptoticsError> {
    if cum.kappas.len() < r + 2 {
        return Err(AsymptoticsError::NotEnoughCumulants {
            need: r,
            have: cum.kappas.len(),
        });
    }
    Ok(())
}

/// log of the collective term: Gaussian local value times the Cramér factor.
pub fn v_term_log(cum: &CumulantSet, lambda: &CramerCoeffs, n: usize, big_n: f64) -> f64 {
    let nf = n as f64;
    let tau = big_n / nf;
    -big_n * big_n / (2.0 * nf * cum.sigma2) + big_n.powi(3) / (nf * nf) * cramer_correction(lambda, tau)
        - 0.5 * (2.0 * PI * cum.sigma2 * nf).ln()
}

/// log of the jump term, with the location x_{nr} and the contraction factor.
fn h_term(
    model: &WeightModel,
    cum: &CumulantSet,
    lambda: &CramerCoeffs,
    n: usize,
    big_n: f64,
) -> Result<(f64, f64, f64), AsymptoticsError> {
    let x_nr = truncated_critical_point(model, cum.sigma2, n, big_n, lambda)?;
    let fpp = 1.0 - n as f64 * cum.sigma2 * model.d2q_raw(x_nr).abs();
    let f_val = f_nr(model, cum.sigma2, n, big_n, lambda, x_nr)?;
    let log_h = (n as f64).ln() - 0.5 * fpp.ln() - f_val;
    Ok((log_h, x_nr, fpp))
}

/// Moderate regime: collective term only.
pub fn estimate_moderate(
    model: &WeightModel,
    cum: &CumulantSet,
    n: usize,
    big_n: f64,
    r: usize,
) -> Result<DeviationEstimate, AsymptoticsError> {
    check_order(cum, r)?;
    let lambda = cramer_lambda(cum, r)?;
    let v = v_term_log(cum, &lambda, n, big_n);
    let mut notes = vec!["v: Gaussian local value with Cramér-series correction".into()];
    note_regime_mismatch(model, cum, n, big_n, Regime::Moderate, &mut notes);
    Ok(DeviationEstimate {
        regime: Regime::Moderate,
        log_value: v,
        components: Components {
            v_term_log: Some(v),
            h_term_log: None,
        },
        r_used: r,
        x_nr: None,
        saddle: None,
        notes,
    })
}

/// Critical window: both terms, combined by log-sum-exp.
pub fn estimate_critical(
    model: &WeightModel,
    cum: &CumulantSet,
    n: usize,
    big_n: f64,
    r: usize,
) -> Result<DeviationEstimate, AsymptoticsError> {
    check_order(cum, r)?;
    let lambda = cramer_lambda(cum, r)?;
    let v = v_term_log(cum, &lambda, n, big_n);
    let (h, x_nr, _) = h_term(model, cum, &lambda, n, big_n)?;
    let log_value = crate::logspace::log_sum_exp(&[v, h]);
    let mut notes = vec![
        "v: Gaussian local value with Cramér-series correction".into(),
        "h: single-jump term n e^{-f_nr(x_nr)} / sqrt(contraction)".into(),
    ];
    note_regime_mismatch(model, cum, n, big_n, Regime::Critical, &mut notes);
    Ok(DeviationEstimate {
        regime: Regime::Critical,
        log_value,
        components: Components {
            v_term_log: Some(v),
            h_term_log: Some(h),
        },
        r_used: r,
        x_nr: Some(x_nr),
        saddle: None,
        notes,
    })
}

/// Big-jump regime: jump term only. With r = 0 this is exactly the refined
/// one-jump heuristic.
pub fn estimate_large(
    model: &WeightModel,
    cum: &CumulantSet,
    n: usize,
    big_n: f64,
    r: usize,
) -> Result<DeviationEstimate, AsymptoticsError> {
    check_order(cum, r)?;
    let lambda = cramer_lambda(cum, r)?;
    let (h, x_nr, _) = h_term(model, cum, &lambda, n, big_n)?;
    let mut notes = vec!["h: single-jump term n e^{-f_nr(x_nr)} / sqrt(contraction)".into()];
    note_regime_mismatch(model, cum, n, big_n, Regime::BigJump, &mut notes);
    Ok(DeviationEstimate {
        regime: Regime::BigJump,
        log_value: h,
        components: Components {
            v_term_log: None,
            h_term_log: Some(h),
        },
        r_used: r,
        x_nr: Some(x_nr),
        saddle: None,
        notes,
    })
}

/// One-line big-jump value log(n·p(N)) plus the insensitivity diagnostic
/// √(nσ²)q'(N) (→ 0 exactly when the one-line value is asymptotically exact).
#[derive(Clone, Copy, Debug)]
pub struct BigJumpSimple {
    pub log_value: f64,
    pub diagnostic: f64,
}

pub fn estimate_bigjump_simple(
    model: &WeightModel,
    sigma2: f64,
    n: usize,
    big_n: f64,
) -> BigJumpSimple {
    BigJumpSimple {
        log_value: (n as f64).ln() - model.q(big_n),
        diagnostic: insensitivity(model, sigma2, n, big_n),
    }
}

/// Smallest r ≥ 0 with n (N*/n)^r < threshold, capped at r_max. When
/// N* ≥ n no order satisfies the side condition and higher orders evaluate
/// the Cramér series far outside its scale, so r = 0 is returned.
pub fn auto_order(n: usize, n_star: f64, threshold: f64, r_max: usize) -> usize {
    let ratio = n_star / n as f64;
    if !(ratio < 1.0) || threshold <= 0.0 {
        return 0;
    }
    let mut bound = n as f64;
    for r in 0..r_max {
        if bound < threshold {
            return r;
        }
        bound *= ratio;
    }
    r_max
}

/// Classify (or obey a forced regime), choose r, and dispatch.
pub fn estimate_auto(
    model: &WeightModel,
    cum: &CumulantSet,
    n: usize,
    big_n: f64,
    config: &AutoConfig,
) -> Result<DeviationEstimate, AsymptoticsError> {
    let scales = critical_scales(model, cum.sigma2, n)?;
    let r_wanted = auto_order(n, scales.n_star, config.r_threshold, config.r_max);
    let r = r_wanted.min(cum.kappas.len().saturating_sub(2));
    let regime = match config.force_regime {
        Some(f) => f,
        None => classify_regime(model, cum.sigma2, n, big_n, &config.thresholds)?,
    };
    let mut est = match regime {
        Regime::Moderate => estimate_moderate(model, cum, n, big_n, r)?,
        Regime::Critical => estimate_critical(model, cum, n, big_n, r)?,
        Regime::BigJump => estimate_large(model, cum, n, big_n, r)?,
    };
    if r < r_wanted {
        est.notes.push(format!(
            "r capped at {r} by available cumulants (side condition wanted {r_wanted})"
        ));
    }
    if config.force_regime.is_some() {
        est.notes.push("regime forced by caller".into());
    }
    Ok(est)
}

fn note_regime_mismatch(
    model: &WeightModel,
    cum: &CumulantSet,
    n: usize,
    big_n: f64,
    expected: Regime,
    notes: &mut Vec<String>,
) {
    let th = RegimeThresholds::default();
    match classify_regime(model, cum.sigma2, n, big_n, &th) {
        Ok(r) if r != expected => {
            notes.push(format!("regime mismatch: classifier says {r:?}, estimator is {expected:?}"))
        }
        Err(_) => notes.push("regime mismatch: below CLT window".into()),
        _ => {}
    }
}

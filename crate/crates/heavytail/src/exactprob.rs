//! Exact ground truth: normalization, moments/cumulants, and the n-fold
//! convolution oracle for P(S_n = m).
//!
//! Everything here is dense, log-space, and deterministic. Convolutions are
//! the O(L^2) reference implementation with per-entry log-sum-exp and
//! compensated accumulation: big-jump comparisons probe probabilities as
//! small as $e^{-10^3}$ and transform-based fast paths corrupt exactly those
//! entries with absolute round-off from the bulk (observed in prototyping as
//! negative "probabilities" near 1e-19), so no FFT path is offered.

use thiserror::Error;

use crate::logspace::{CompensatedSum, LogSumAcc};
use crate::weights::WeightModel;

#[derive(Debug, Error)]
pub enum ExactError {
    #[error("series for the normalization constant did not converge within {terms} terms (partial sum {partial})")]
    Divergence { terms: usize, partial: f64 },
    #[error("moment sum overflowed f64 range at order {order}")]
    MomentOverflow { order: usize },
    #[error("tail_eps {0} outside (0, 1e-6]")]
    BadTailEps(f64),
    #[error("pmf array of length {len} exceeds the budget cap {cap}")]
    Budget { len: usize, cap: usize },
    #[error("need n >= 1 and m_max >= n, got n = {n}, m_max = {m_max}")]
    BadRange { n: usize, m_max: i64 },
}

/// Array cap for dense convolutions (entries, not bytes).
pub const PMF_LEN_CAP: usize = 8_000_000;

/// Number of consecutive negligible terms required before a series is cut.
const STREAK: usize = 10;

/// Moments and cumulants of the single-step law.
#[derive(Clone, Debug)]
pub struct CumulantSet {
    pub log_c: f64,
    /// moments[j-1] = E[X^j], j = 1..=r
    pub moments: Vec<f64>,
    /// kappas[j-1] = kappa_j, j = 1..=r
    pub kappas: Vec<f64>,
    pub mu: f64,
    pub sigma2: f64,
    pub r: usize,
}

impl CumulantSet {
    pub fn kappa(&self, j: usize) -> f64 {
        self.kappas[j - 1]
    }
}

/// Dense pmf on the integer window [offset, offset + len).
#[derive(Clone, Debug)]
pub struct Pmf {
    pub offset: i64,
    /// log_probs[i] = log P(value = offset + i); -inf encodes zero
    pub log_probs: Vec<f64>,
    /// upper bound on the probability mass lost to truncation
    pub tail_mass_bound: f64,
}

impl Pmf {
    pub fn prob(&self, value: i64) -> f64 {
        self.log_prob(value).exp()
    }

    pub fn log_prob(&self, value: i64) -> f64 {
        let i = value - self.offset;
        if i < 0 || i as usize >= self.log_probs.len() {
            f64::NEG_INFINITY
        } else {
            self.log_probs[i as usize]
        }
    }

    pub fn total_mass(&self) -> f64 {
        let mut s = CompensatedSum::new();
        for &l in &self.log_probs {
            s.add(l.exp());
        }
        s.value()
    }

    pub fn mean(&self) -> f64 {
        let mut s = CompensatedSum::new();
        for (i, &l) in self.log_probs.iter().enumerate() {
            s.add((self.offset + i as i64) as f64 * l.exp());
        }
        s.value()
    }

    pub fn variance(&self) -> f64 {
        let mu = self.mean();
        let mut s = CompensatedSum::new();
        for (i, &l) in self.log_probs.iter().enumerate() {
            let d = (self.offset + i as i64) as f64 - mu;
            s.add(d * d * l.exp());
        }
        s.value()
    }
}

/// Compute log c so that sum_k c*exp(-q_raw(k)) = 1, and store it in the model.
pub fn normalize(model: &mut WeightModel, tail_eps: f64) -> Result<f64, ExactError> {
    if !(tail_eps > 0.0 && tail_eps <= 1e-6) {
        return Err(ExactError::BadTailEps(tail_eps));
    }
    let mut sum = CompensatedSum::new();
    let mut streak = 0usize;
    let mut prev_term = f64::INFINITY;
    let max_terms = 50_000_000usize;
    let mut k = 1usize;
    while k <= max_terms {
        let term = (-model.q_raw(k as f64)).exp();
        sum.add(term);
        if !sum.value().is_finite() {
            return Err(ExactError::Divergence {
                terms: k,
                partial: sum.value(),
            });
        }
        if term < 1e-18 * sum.value() && term < prev_term {
            streak += 1;
            if streak >= STREAK {
                // geometric tail bound: remaining mass <= term * ratio/(1-ratio)
                let ratio = term / prev_term;
                if ratio < 1.0 {
                    let tail = term * ratio / (1.0 - ratio);
                    if tail <= tail_eps * sum.value() {
                        break;
                    }
                }
            }
        } else {
            streak = 0;
        }
        prev_term = term;
        k += 1;
    }
    if k > max_terms {
        return Err(ExactError::Divergence {
            terms: max_terms,
            partial: sum.value(),
        });
    }
    let log_c = -sum.value().ln();
    model.log_c = Some(log_c);
    Ok(log_c)
}

/// Moments by direct summation and cumulants by the standard recursion.
pub fn cumulants(model: &WeightModel, r: usize) -> Result<CumulantSet, ExactError> {
    assert!(r >= 2 && r <= 12, "cumulant order must be in 2..=12");
    let log_c = model.log_c.expect("model not normalized");
    let mut sums: Vec<CompensatedSum> = vec![CompensatedSum::new(); r];
    let mut streak = 0usize;
    let max_terms = 50_000_000usize;
    let mut k = 1usize;
    while k <= max_terms {
        let x = k as f64;
        let p = model.log_p(x).exp();
        let mut pow = p;
        let mut all_small = true;
        for s in sums.iter_mut().take(r) {
            pow *= x;
            s.add(pow);
            if !(pow.abs() < 1e-18 * s.value().abs().max(f64::MIN_POSITIVE)) {
                all_small = false;
            }
        }
        if !pow.is_finite() {
            return Err(ExactError::MomentOverflow { order: r });
        }
        if all_small {
            streak += 1;
            if streak >= STREAK {
                break;
            }
        } else {
            streak = 0;
        }
        k += 1;
    }
    if k > max_terms {
        return Err(ExactError::MomentOverflow { order: r });
    }
    let moments: Vec<f64> = sums.iter().map(|s| s.value()).collect();
    let kappas = cumulants_from_moments(&moments);
    let mu = kappas[0];
    let sigma2 = kappas[1];
    Ok(CumulantSet {
        log_c,
        moments,
        kappas,
        mu,
        sigma2,
        r,
    })
}

/// kappa_j = m_j - sum_{i=1}^{j-1} C(j-1, i-1) kappa_i m_{j-i}.
pub fn cumulants_from_moments(moments: &[f64]) -> Vec<f64> {
    let r = moments.len();
    let mut kappas = vec![0.0; r];
    for j in 1..=r {
        let mut acc = moments[j - 1];
        for i in 1..j {
            acc -= binomial(j - 1, i - 1) * kappas[i - 1] * moments[j - i - 1];
        }
        kappas[j - 1] = acc;
    }
    kappas
}

pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0f64;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc
}

/// Single-step pmf truncated to [1, m_max_step].
fn step_pmf(model: &WeightModel, m_max_step: i64) -> Pmf {
    let len = m_max_step.max(0) as usize;
    let log_c = model.log_c.expect("model not normalized");
    let log_probs: Vec<f64> = (1..=len as i64)
        .map(|k| log_c - model.q_raw(k as f64))
        .collect();
    let mut mass = CompensatedSum::new();
    for &l in &log_probs {
        mass.add(l.exp());
    }
    Pmf {
        offset: 1,
        log_probs,
        tail_mass_bound: (1.0 - mass.value()).max(0.0),
    }
}

/// Dense log-space convolution of two pmfs, truncating values above m_max.
fn convolve_pair(a: &Pmf, b: &Pmf, m_max: i64) -> Pmf {
    let offset = a.offset + b.offset;
    let len = ((m_max - offset + 1).max(0) as usize)
        .min(a.log_probs.len() + b.log_probs.len() - 1);
    let mut out = vec![f64::NEG_INFINITY; len];
    for (v, slot) in out.iter_mut().enumerate() {
        // sum over i: a[i] * b[v - i]
        let i_lo = v.saturating_sub(b.log_probs.len() - 1);
        let i_hi = v.min(a.log_probs.len() - 1);
        let mut acc = LogSumAcc::new();
        for i in i_lo..=i_hi {
            acc.add_ln(a.log_probs[i] + b.log_probs[v - i]);
        }
        *slot = acc.value_ln();
    }
    // truncation leakage: everything that fell above m_max, bounded by the
    // factors' own tail bounds plus the discarded entries
    let mut kept = CompensatedSum::new();
    for &l in &out {
        kept.add(l.exp());
    }
    let tail = (1.0 - a.tail_mass_bound) * (1.0 - b.tail_mass_bound) - kept.value();
    Pmf {
        offset,
        log_probs: out,
        tail_mass_bound: (a.tail_mass_bound + b.tail_mass_bound + tail.max(0.0)).min(1.0),
    }
}

fn check_range(n: usize, m_max: i64) -> Result<(), ExactError> {
    if n < 1 || m_max < n as i64 {
        return Err(ExactError::BadRange { n, m_max });
    }
    let len = (m_max - n as i64 + 1) as usize;
    if len > PMF_LEN_CAP {
        return Err(ExactError::Budget {
            len,
            cap: PMF_LEN_CAP,
        });
    }
    Ok(())
}

/// Exact n-fold convolution of the single-step law on [n, m_max]
/// (sequential reference path).
pub fn convolve_exact(model: &WeightModel, n: usize, m_max: i64) -> Result<Pmf, ExactError> {
    check_range(n, m_max)?;
    let step = step_pmf(model, m_max - (n as i64 - 1));
    let mut acc = step.clone();
    for _ in 2..=n {
        acc = convolve_pair(&acc, &step, m_max);
    }
    Ok(acc)
}

/// Same distribution via binary powering (doubling); must agree with the
/// sequential path to 1e-12 per entry.
pub fn convolve_exact_doubling(
    model: &WeightModel,
    n: usize,
    m_max: i64,
) -> Result<Pmf, ExactError> {
    check_range(n, m_max)?;
    let mut base = step_pmf(model, m_max - (n as i64 - 1));
    let mut result: Option<Pmf> = None;
    let mut rem = n;
    while rem > 0 {
        if rem & 1 == 1 {
            result = Some(match result {
                None => base.clone(),
                Some(r) => convolve_pair(&r, &base, m_max),
            });
        }
        rem >>= 1;
        if rem > 0 {
            base = convolve_pair(&base, &base, m_max);
        }
    }
    Ok(result.unwrap())
}

/// log P(S_n = m), exact up to truncation + rounding.
pub fn exact_point_prob(model: &WeightModel, n: usize, m: i64) -> Result<f64, ExactError> {
    // truncating at m_max = m is lossless for the value at m: discarded
    // entries only ever feed values > m
    let pmf = convolve_exact(model, n, m)?;
    Ok(pmf.log_prob(m))
}

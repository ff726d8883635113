//! Acceptance gate: nine end-to-end checks of the numeric pipeline, one
//! PASS/FAIL line each. The process exits nonzero if any check fails.

use std::f64::consts::PI;
use std::time::Instant;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use heavytail::contour::{contour_hn_vn, im_g_bromwich, im_g_saddle};
use heavytail::cramer::cramer_lambda;
use heavytail::exactprob::{
    binomial, convolve_exact, convolve_exact_doubling, cumulants, exact_point_prob, normalize,
    CumulantSet,
};
use heavytail::series::{f64_to_rational, rational_to_f64, TruncatedSeries};
use heavytail::variational::{
    critical_points, critical_scales, df_n, df_nr, f_nr, insensitivity, truncated_critical_point,
};
use heavytail::weights::{make_geometric, make_loghazard, make_stretched, WeightModel};

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

type Check = Result<String, String>;

/// 1. H_n + V_n equals the exact convolution probability to 1e-6 relative
/// for stretched alpha = 1/2, n in {8, 16, 32}, N in {2 ceil sqrt n, 4 ceil sqrt n}.
fn c1_contour_identity() -> Check {
    let model = stretched_half();
    let cum = cumulants(&model, 2).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    let mut detail = String::new();
    for &n in &[8usize, 16, 32] {
        let s = (n as f64).sqrt().ceil() as i64;
        for &mult in &[2i64, 4] {
            let big_n = mult * s;
            let m = (n as f64 * cum.mu).round() as i64 + big_n;
            let start = Instant::now();
            let r = contour_hn_vn(&model, &cum, n, m, 0.25).map_err(|e| e.to_string())?;
            let ln_exact = exact_point_prob(&model, n, m).map_err(|e| e.to_string())?;
            let rel = ((r.total.ln_abs - ln_exact).exp() - 1.0).abs();
            let secs = start.elapsed().as_secs_f64();
            worst = worst.max(rel);
            if secs > 120.0 {
                return Err(format!("n={n} m={m}: runtime {secs:.1}s exceeds 2 min"));
            }
            detail = format!("worst rel {worst:.2e}");
            if rel > 1e-6 {
                return Err(format!("n={n} m={m}: rel {rel:.2e} > 1e-6"));
            }
        }
    }
    Ok(detail)
}

/// 2. Bromwich boundary values match the alpha = 1/2 closed form
/// c sqrt(pi)/(2 t^{3/2}) e^{-1/(4t)} to 1e-8 relative.
fn c2_bromwich_closed_form() -> Check {
    let model = stretched_half();
    let c = model.log_c().unwrap().exp();
    let mut worst: f64 = 0.0;
    for &t in &[0.05f64, 0.1, 0.2, 0.5] {
        let got = im_g_bromwich(&model, t).map_err(|e| e.to_string())?;
        let closed_ln = (c * PI.sqrt() / (2.0 * t.powf(1.5))).ln() - 1.0 / (4.0 * t);
        let rel = ((got.ln_abs - closed_ln).exp() - 1.0).abs();
        worst = worst.max(rel);
        if rel > 1e-8 {
            return Err(format!("t={t}: rel {rel:.2e} > 1e-8"));
        }
    }
    Ok(format!("worst rel {worst:.2e}"))
}

/// 3. Bromwich/saddle ratio within 1 +/- 0.1 at t = 0.05 and monotonically
/// approaching 1 over t in {0.2, 0.1, 0.05, 0.025}, both families.
fn c3_saddle_asymptote() -> Check {
    let mut detail = String::new();
    for (name, model) in [("stretched", stretched_half()), ("log-hazard", loghazard3())] {
        let mut prev = f64::INFINITY;
        for &t in &[0.2f64, 0.1, 0.05, 0.025] {
            let b = im_g_bromwich(&model, t).map_err(|e| e.to_string())?;
            let s = im_g_saddle(&model, t).map_err(|e| e.to_string())?;
            let ratio = (b.ln_abs - s.ln_abs).exp();
            let dist = (ratio - 1.0).abs();
            // for alpha = 1/2 the asymptote coincides exactly with the
            // boundary value, so the distance sits at the quadrature noise
            // floor; monotonicity is meaningless below it
            if dist.max(prev) <= 1e-9 {
                detail = format!("{detail}{name}: at noise floor ({dist:.0e}) from t={t}; ");
                break;
            }
            if dist >= prev {
                return Err(format!("{name}: |ratio-1| not decreasing at t={t} ({dist:.3e} >= {prev:.3e})"));
            }
            if (t - 0.05).abs() < 1e-12 && dist > 0.1 {
                return Err(format!("{name}: ratio {ratio:.4} at t=0.05 outside 1±0.1"));
            }
            prev = dist;
            detail = format!("{detail}{name}: |ratio-1|={dist:.1e} at t={t}; ");
        }
    }
    Ok(detail)
}

/// 4. Critical scales: stretched closed forms to 1e-8 for n in 1e3..1e6;
/// log-hazard ratios to the asymptotes within 1 +/- 0.2 at 1e6 and
/// monotonically approaching 1 over 1e4..1e7.
fn c4_critical_scales() -> Check {
    let model = stretched_half();
    let cum = cumulants(&model, 2).map_err(|e| e.to_string())?;
    let s2 = cum.sigma2;
    let mut worst: f64 = 0.0;
    for &n in &[1_000usize, 10_000, 100_000, 1_000_000] {
        let sc = critical_scales(&model, s2, n).map_err(|e| e.to_string())?;
        let ns2 = n as f64 * s2;
        let x_closed = (ns2 / 4.0).powf(2.0 / 3.0);
        let nstar_closed = 3.0 * x_closed;
        let ndbl_closed = 1.5 * ns2.powf(2.0 / 3.0);
        for (label, num, closed) in [
            ("x_star", sc.x_star, x_closed),
            ("N_star", sc.n_star, nstar_closed),
            ("N_2star", sc.n_dblstar, ndbl_closed),
        ] {
            let rel = (num / closed - 1.0).abs();
            worst = worst.max(rel);
            if rel > 1e-8 {
                return Err(format!("stretched n={n} {label}: rel {rel:.2e} > 1e-8"));
            }
        }
    }

    // log-hazard ratios to the stated asymptotes:
    // x* ~ sqrt(2^{1-beta} beta n sigma^2 (log n)^{beta-1}), N* ~ 2 x*,
    // N** ~ sqrt(2 n sigma^2 (log n)^beta)
    let table = loghazard_scale_ratios(false)?;
    let mut problems = Vec::new();
    let names = ["x_star", "N_star", "N_2star"];
    for i in 0..3 {
        let mut prev = f64::INFINITY;
        for (n, ratios) in &table {
            let dist = (ratios[i] - 1.0).abs();
            if dist >= prev {
                problems.push(format!(
                    "{} ratio moves away from 1 at n={n} ({:.3})",
                    names[i], ratios[i]
                ));
                break;
            }
            prev = dist;
        }
        let at_1e6 = table.iter().find(|(n, _)| *n == 1_000_000).unwrap().1[i];
        if (at_1e6 - 1.0).abs() > 0.2 {
            problems.push(format!("{} ratio {at_1e6:.3} at n=1e6 outside 1±0.2", names[i]));
        }
    }
    if !problems.is_empty() {
        return Err(format!("stretched part ok (worst rel {worst:.1e}); {}", problems.join("; ")));
    }
    Ok(format!("stretched worst rel {worst:.1e}; log-hazard ratios within bounds"))
}

/// Ratios of the numeric log-hazard scales to their asymptotes over
/// n in {1e4..1e7}. With `appendix_constant` the break-even scale uses
/// the constant that follows from the derivation (2^{1-beta} inside the
/// square root, consistent with log N** ~ (log n)/2); otherwise the stated
/// form sqrt(2 n sigma^2 (log n)^beta).
fn loghazard_scale_ratios(appendix_constant: bool) -> Result<Vec<(usize, [f64; 3])>, String> {
    let lh = loghazard3();
    let cl = cumulants(&lh, 2).map_err(|e| e.to_string())?;
    let beta = 3.0;
    let mut out = Vec::new();
    for &n in &[10_000usize, 100_000, 1_000_000, 10_000_000] {
        let sc = critical_scales(&lh, cl.sigma2, n).map_err(|e| e.to_string())?;
        let ns2 = n as f64 * cl.sigma2;
        let ln_n = (n as f64).ln();
        let xa = (2f64.powf(1.0 - beta) * beta * ns2 * ln_n.powf(beta - 1.0)).sqrt();
        let dbl_c = if appendix_constant { 2f64.powf(1.0 - beta) } else { 2.0 };
        out.push((
            n,
            [
                sc.x_star / xa,
                sc.n_star / (2.0 * xa),
                sc.n_dblstar / (dbl_c * ns2 * ln_n.powf(beta)).sqrt(),
            ],
        ));
    }
    Ok(out)
}

/// Supplement to criterion 4: with the break-even constant taken from the
/// derivation rather than the stated display, all three log-hazard ratios
/// decrease monotonically toward 1 (the approach is O(log log n / log n),
/// so no absolute bound is imposed at these n).
fn c4_supplement() -> Check {
    let table = loghazard_scale_ratios(true)?;
    let names = ["x_star", "N_star", "N_2star"];
    let mut detail = String::new();
    for i in 0..3 {
        let mut prev = f64::INFINITY;
        for (n, ratios) in &table {
            let dist = (ratios[i] - 1.0).abs();
            if dist >= prev {
                return Err(format!("{} ratio not improving at n={n} ({:.3})", names[i], ratios[i]));
            }
            if ratios[i] < 1.0 {
                return Err(format!(
                    "{} ratio {:.3} at n={n} approaches 1 from below, corrections predict above",
                    names[i], ratios[i]
                ));
            }
            prev = dist;
        }
        let last = table.last().unwrap().1[i];
        detail = format!("{detail}{}: {:.3} at n=1e7; ", names[i], last);
    }
    Ok(detail)
}

fn factorial(n: usize) -> BigRational {
    let mut acc = BigInt::one();
    for k in 2..=n {
        acc *= k;
    }
    BigRational::from_integer(acc)
}

/// 5. Cramér series: defining-identity residual exactly zero through r = 6
/// in rational arithmetic; rational Legendre-transform oracle mismatch
/// scales like tau^{r+3} (slope within +/- 0.5).
fn c5_cramer_series() -> Check {
    let model = stretched_half();

    // exact residual of the series inversion through r = 6
    let r = 6usize;
    let work = r + 2;
    let cum = cumulants(&model, work + 1).map_err(|e| e.to_string())?;
    let kq: Vec<BigRational> = cum.kappas.iter().map(|&k| f64_to_rational(k)).collect();
    let co = cramer_lambda(&cum, r).map_err(|e| e.to_string())?;
    let mut u = TruncatedSeries::zero(work);
    u.coeffs[1] = kq[1].clone();
    for j in 2..=(r + 1) {
        u.coeffs[j] = &kq[j] / factorial(j);
    }
    let t_tau = u.reverse().map_err(|e| e.to_string())?;
    let resid = u.compose(&t_tau).sub(&TruncatedSeries::identity(work));
    for j in 0..=work {
        if !resid.coeff(j).is_zero() {
            return Err(format!("inversion residual nonzero at order {j}"));
        }
    }
    let mut w = TruncatedSeries::zero(work);
    for j in 2..=(r + 2) {
        w.coeffs[j] = &kq[j - 1] / factorial(j);
    }
    let v = w.compose(&t_tau).sub(&t_tau.shift(1));
    for j in 0..r {
        if v.coeff(j + 3) != co.lambdas_exact[j] {
            return Err(format!("defining-identity coefficient mismatch at lambda_{j}"));
        }
    }

    // numeric Legendre oracle, r = 3: maximize t(mu+tau) - phi_trunc(t) in
    // exact rationals (the remainder is far below f64 cancellation noise)
    let r3 = 3usize;
    let nk = r3 + 3;
    let cum3 = cumulants(&model, nk).map_err(|e| e.to_string())?;
    let co3 = cramer_lambda(&cum3, r3).map_err(|e| e.to_string())?;
    let kq3: Vec<BigRational> = cum3.kappas[..nk].iter().map(|&k| f64_to_rational(k)).collect();
    let s2 = kq3[1].clone();
    let phi_c: Vec<BigRational> = (1..=nk).map(|j| &kq3[j - 1] / factorial(j)).collect();
    let eval = |coeffs: &[BigRational], t: &BigRational, lowpow: u32| -> BigRational {
        let mut acc = BigRational::zero();
        for c in coeffs.iter().rev() {
            acc = acc * t + c;
        }
        for _ in 0..lowpow {
            acc *= t;
        }
        acc
    };
    let dphi_c: Vec<BigRational> = (1..=nk)
        .map(|j| &phi_c[j - 1] * BigRational::from_integer(BigInt::from(j)))
        .collect();
    let d2phi_c: Vec<BigRational> = (2..=nk)
        .map(|j| &dphi_c[j - 1] * BigRational::from_integer(BigInt::from(j - 1)))
        .collect();
    let round_bits = |x: &BigRational| -> BigRational {
        let scale = BigInt::from(1) << 400u32;
        let scaled = (x * BigRational::from_integer(scale.clone())).round();
        scaled / BigRational::from_integer(scale)
    };
    let legendre = |tau: &BigRational| -> BigRational {
        let target = &kq3[0] + tau;
        let mut t = round_bits(&(tau / &s2));
        for _ in 0..6 {
            let g = eval(&dphi_c, &t, 0) - &target;
            let h = eval(&d2phi_c, &t, 0);
            t = round_bits(&(t - g / h));
        }
        &t * &target - eval(&phi_c, &t, 1)
    };
    let taus = [-1e-2f64, -1e-3];
    let mut diffs = Vec::new();
    for &tau in &taus {
        let tq = f64_to_rational(tau);
        let exact = legendre(&tq);
        let two = BigRational::from_integer(BigInt::from(2));
        let mut series = &tq * &tq / (two * &s2);
        let mut tpow = &tq * &tq * &tq;
        for l in &co3.lambdas_exact {
            series -= l * &tpow;
            tpow *= &tq;
        }
        diffs.push(rational_to_f64(&(exact - series)).abs());
    }
    let slope = (diffs[0] / diffs[1]).ln() / (taus[0] / taus[1]).abs().ln();
    let want = (r3 + 3) as f64;
    if (slope - want).abs() > 0.5 {
        return Err(format!("Legendre remainder slope {slope:.2} vs expected {want}"));
    }
    Ok(format!("residual zero through r=6; Legendre slope {slope:.2} (expect {want})"))
}

/// 6. Big-jump limit: ratio P_exact/(n e^{-f_nr(x_nr)}) at n in {24, 48, 96},
/// N = 4n, monotone toward 1 and within 1 +/- 0.25 at n = 96.
fn c6_big_jump_limit() -> Check {
    let model = stretched_half();
    let cum = cumulants(&model, 2).map_err(|e| e.to_string())?;
    let lam0 = cramer_lambda(&cum, 0).map_err(|e| e.to_string())?;
    let ratio_at = |n: usize| -> Result<f64, String> {
        let big_n = 4.0 * n as f64;
        let m = (n as f64 * cum.mu).round() as i64 + (4 * n) as i64;
        let x_nr = truncated_critical_point(&model, cum.sigma2, n, big_n, &lam0)
            .map_err(|e| format!("n={n}, N=4n: {e}"))?;
        let f_val = f_nr(&model, cum.sigma2, n, big_n, &lam0, x_nr).map_err(|e| e.to_string())?;
        let ln_est = (n as f64).ln() - f_val;
        let ln_exact = convolve_exact_doubling(&model, n, m)
            .map_err(|e| e.to_string())?
            .log_prob(m);
        Ok((ln_exact - ln_est).exp())
    };
    let mut prev_dist = f64::INFINITY;
    let mut last = f64::NAN;
    for &n in &[24usize, 48, 96] {
        let r = ratio_at(n)?;
        let dist = (r - 1.0).abs();
        if dist >= prev_dist {
            return Err(format!("ratio not monotone toward 1 at n={n} ({r:.4})"));
        }
        prev_dist = dist;
        last = r;
    }
    if (last - 1.0).abs() > 0.25 {
        return Err(format!("ratio {last:.4} at n=96 outside 1±0.25"));
    }
    Ok(format!("ratio {last:.4} at n=96"))
}

/// Same trend at scales where the interior critical point exists; reported
/// as supporting evidence next to criterion 6.
fn c6_supplement() -> Check {
    let model = stretched_half();
    let cum = cumulants(&model, 2).map_err(|e| e.to_string())?;
    let lam0 = cramer_lambda(&cum, 0).map_err(|e| e.to_string())?;
    let mut prev_dist = f64::INFINITY;
    let mut detail = String::new();
    for &n in &[512usize, 1024, 2048] {
        let big_n = 4.0 * n as f64;
        let m = (n as f64 * cum.mu).round() as i64 + (4 * n) as i64;
        let x_nr = truncated_critical_point(&model, cum.sigma2, n, big_n, &lam0)
            .map_err(|e| e.to_string())?;
        let f_val = f_nr(&model, cum.sigma2, n, big_n, &lam0, x_nr).map_err(|e| e.to_string())?;
        let ln_est = (n as f64).ln() - f_val;
        let ln_exact = convolve_exact_doubling(&model, n, m)
            .map_err(|e| e.to_string())?
            .log_prob(m);
        let r = (ln_exact - ln_est).exp();
        let dist = (r - 1.0).abs();
        // the prefactor error decays like a power of log N, so only the
        // trend is checked at these n
        if dist >= prev_dist {
            return Err(format!("supplement ratio not monotone at n={n} ({r:.4})"));
        }
        prev_dist = dist;
        detail = format!("{detail}n={n}: {r:.4}; ");
    }
    Ok(detail)
}

/// 7. Log-hazard boundary sharpness: the diagnostic sqrt(n sigma^2) q'(N)
/// along N = sqrt(n) (log n)^theta decreases in n for theta = 2.5 and
/// increases for theta = 1.5.
fn c7_boundary_sharpness() -> Check {
    let model = loghazard3();
    let cum = cumulants(&model, 2).map_err(|e| e.to_string())?;
    let ns: Vec<usize> = vec![1_000, 10_000, 100_000, 1_000_000, 10_000_000];
    let mut detail = String::new();
    for (theta, increasing) in [(2.5f64, false), (1.5f64, true)] {
        let mut prev = if increasing { 0.0 } else { f64::INFINITY };
        for &n in &ns {
            let nf = n as f64;
            let big_n = nf.sqrt() * nf.ln().powf(theta);
            let d = insensitivity(&model, cum.sigma2, n, big_n);
            let ok = if increasing { d > prev } else { d < prev };
            if !ok {
                return Err(format!(
                    "theta={theta}: diagnostic {d:.4e} at n={n} breaks monotonicity (prev {prev:.4e})"
                ));
            }
            prev = d;
        }
        detail = format!("{detail}theta={theta}: endpoint {prev:.3e}; ");
    }
    Ok(detail)
}

struct XorShift(u64);

impl XorShift {
    fn next_f64(&mut self) -> f64 {
        let mut x = self.0;
        x ^= x << 13;
        x ^= x >> 7;
        x ^= x << 17;
        self.0 = x;
        (x >> 11) as f64 / (1u64 << 53) as f64
    }
}

/// 8. Variational lemma suite on 50 randomized instances in the
/// critical/big-jump range: sign pattern of f_n', the bracket
/// N - N* <= x_n <= N, and uniqueness of the zero of f'_nr on a 1e4 grid.
fn c8_variational_suite() -> Check {
    let mut rng = XorShift(0x9e3779b97f4a7c15);
    let mut count = 0usize;
    while count < 50 {
        let use_stretched = rng.next_f64() < 0.5;
        let model = if use_stretched {
            let alpha = 0.35 + 0.3 * rng.next_f64();
            let mut m = make_stretched(alpha).map_err(|e| e.to_string())?;
            normalize(&mut m, 1e-14).map_err(|e| e.to_string())?;
            m
        } else {
            let beta = 2.5 + 1.0 * rng.next_f64();
            let mut m = make_loghazard(beta).map_err(|e| e.to_string())?;
            normalize(&mut m, 1e-14).map_err(|e| e.to_string())?;
            m
        };
        let cum = cumulants(&model, 4).map_err(|e| e.to_string())?;
        let n = (1e3 * (1e3f64).powf(rng.next_f64())) as usize;
        let sc = match critical_scales(&model, cum.sigma2, n) {
            Ok(s) => s,
            Err(_) => continue, // n below the family threshold: resample
        };
        let mult = 1.2 + 18.8 * rng.next_f64();
        let big_n = mult * sc.n_star;
        let tag = format!(
            "instance {count}: {} n={n} N={big_n:.1}",
            if use_stretched { "stretched" } else { "log-hazard" }
        );

        let cp = critical_points(&model, cum.sigma2, n, big_n).map_err(|e| format!("{tag}: {e}"))?;
        let x_n = cp.x_n.ok_or_else(|| format!("{tag}: interior minimum missing"))?;
        // ordering and interior-minimum bracket
        if !(sc.x_star < x_n && x_n < big_n) {
            return Err(format!("{tag}: ordering x* < x_n < N violated"));
        }
        if let Some(xp) = cp.x_prime {
            if !(xp < sc.x_star) {
                return Err(format!("{tag}: x' not below x*"));
            }
        }
        let slack = 1e-9 * big_n;
        if !(big_n - sc.n_star <= x_n + slack && x_n <= big_n + slack) {
            return Err(format!("{tag}: bracket N - N* <= x_n <= N violated (x_n = {x_n})"));
        }
        // sign pattern of f_n' around the interior minimum
        if !(df_n(&model, cum.sigma2, n, big_n, 0.5 * (sc.x_star + x_n)) < 0.0) {
            return Err(format!("{tag}: f_n' not negative on (x*, x_n)"));
        }
        if !(df_n(&model, cum.sigma2, n, big_n, 0.5 * (x_n + big_n)) > 0.0) {
            return Err(format!("{tag}: f_n' not positive on (x_n, N)"));
        }
        // uniqueness of the zero of f'_nr on a dense grid
        let lam = cramer_lambda(&cum, 2).map_err(|e| format!("{tag}: {e}"))?;
        let grid = 10_000usize;
        let lo = sc.x_star;
        let hi = big_n;
        let mut sign_changes = 0usize;
        let mut prev_sign = 0i32;
        for i in 0..=grid {
            let x = lo + (hi - lo) * i as f64 / grid as f64;
            let v = df_nr(&model, cum.sigma2, n, big_n, &lam, x);
            let s = if v > 0.0 {
                1
            } else if v < 0.0 {
                -1
            } else {
                0
            };
            if s != 0 {
                if prev_sign != 0 && s != prev_sign {
                    sign_changes += 1;
                }
                prev_sign = s;
            }
        }
        if sign_changes != 1 {
            return Err(format!("{tag}: {sign_changes} sign changes of f'_nr on grid"));
        }
        count += 1;
    }
    Ok("50 randomized instances pass".into())
}

/// 9. Oracle integrity: negative-binomial closed form vs convolve_exact for
/// the geometric model to 1e-12, and doubling vs sequential to 1e-12.
fn c9_oracle_integrity() -> Check {
    let mut model = make_geometric();
    normalize(&mut model, 1e-14).map_err(|e| e.to_string())?;
    let m_max = 200i64;
    let mut worst: f64 = 0.0;
    for n in 1..=10usize {
        let seq = convolve_exact(&model, n, m_max).map_err(|e| e.to_string())?;
        let dbl = convolve_exact_doubling(&model, n, m_max).map_err(|e| e.to_string())?;
        for m in (n as i64)..=m_max {
            let p_seq = seq.prob(m);
            let p_dbl = dbl.prob(m);
            // P(S_n = m) = C(m-1, n-1) 2^{-m}
            let nb = binomial((m - 1) as usize, n - 1) * (-(m as f64) * 2f64.ln()).exp();
            let rel_nb = (p_seq / nb - 1.0).abs();
            let rel_path = (p_dbl / p_seq - 1.0).abs();
            worst = worst.max(rel_nb).max(rel_path);
            if rel_nb > 1e-12 {
                return Err(format!("n={n} m={m}: closed form rel {rel_nb:.2e} > 1e-12"));
            }
            if rel_path > 1e-12 {
                return Err(format!("n={n} m={m}: doubling vs sequential rel {rel_path:.2e}"));
            }
        }
    }
    Ok(format!("worst rel {worst:.2e}"))
}

fn main() {
    let checks: Vec<(&str, fn() -> Check)> = vec![
        ("1 contour identity", c1_contour_identity),
        ("2 bromwich closed form", c2_bromwich_closed_form),
        ("3 saddle asymptote", c3_saddle_asymptote),
        ("4 critical scales", c4_critical_scales),
        ("4s critical scales (derivation constant)", c4_supplement),
        ("5 cramer series", c5_cramer_series),
        ("6 big-jump limit", c6_big_jump_limit),
        ("6s big-jump limit (supplementary scales)", c6_supplement),
        ("7 boundary sharpness", c7_boundary_sharpness),
        ("8 variational suite", c8_variational_suite),
        ("9 oracle integrity", c9_oracle_integrity),
    ];
    let mut failures = 0usize;
    for (name, f) in checks {
        let start = Instant::now();
        match f() {
            Ok(detail) => println!(
                "criterion {name}: PASS ({detail}) [{:.1}s]",
                start.elapsed().as_secs_f64()
            ),
            Err(detail) => {
                failures += 1;
                println!(
                    "criterion {name}: FAIL ({detail}) [{:.1}s]",
                    start.elapsed().as_secs_f64()
                );
            }
        }
    }
    if failures > 0 {
        eprintln!("{failures} acceptance criteria failed");
        std::process::exit(1);
    }
}

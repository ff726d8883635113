//! Row engine and the five command implementations. Rows are computed in a
//! rayon pool and collected in deterministic input order; floats are written
//! with the shortest round-trip representation.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use heavytail::asymptotics::{auto_order, estimate_critical, estimate_large, estimate_moderate};
use heavytail::contour::{eta_n, phi_n_critical, ContourError};
use heavytail::exactprob::{convolve_exact_doubling, cumulants, CumulantSet, Pmf};
use heavytail::variational::{classify_regime, critical_scales, insensitivity, Regime, RegimeThresholds};
use heavytail::weights::{validate_assumptions, WeightModel};

use crate::config::{ExperimentConfig, ROrder};

pub const CSV_HEADER: &str = "family,params,n,N,regime,N_star,N_2star,x_nr,eta_n,t_n,xi_n,hess_det,log_estimate,log_v_term,log_h_term,log_exact,log_ratio,diagnostics";

#[derive(Clone, Debug, Serialize)]
pub struct ResultRow {
    pub family: String,
    pub params: String,
    pub n: usize,
    pub big_n: f64,
    pub regime: Option<String>,
    pub n_star: Option<f64>,
    pub n_2star: Option<f64>,
    pub x_nr: Option<f64>,
    pub eta_n: Option<f64>,
    pub t_n: Option<f64>,
    pub xi_n: Option<f64>,
    pub hess_det: Option<f64>,
    pub log_estimate: Option<f64>,
    pub log_v_term: Option<f64>,
    pub log_h_term: Option<f64>,
    pub log_exact: Option<f64>,
    pub log_ratio: Option<f64>,
    pub diagnostics: String,
    /// row-level failure flag (not a CSV column)
    #[serde(skip)]
    pub failed: bool,
}

fn fmt_opt(v: Option<f64>) -> String {
    match v {
        Some(x) if x.is_finite() => format!("{x}"),
        // -inf encodes an exactly-zero probability in log space
        Some(x) if x == f64::NEG_INFINITY => "-inf".into(),
        _ => String::new(),
    }
}

impl ResultRow {
    pub fn to_csv_line(&self) -> String {
        let mut line = String::new();
        let quoted = format!("\"{}\"", self.diagnostics.replace('"', "\"\""));
        let _ = write!(
            line,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.family,
            self.params,
            self.n,
            self.big_n,
            self.regime.clone().unwrap_or_default(),
            fmt_opt(self.n_star),
            fmt_opt(self.n_2star),
            fmt_opt(self.x_nr),
            fmt_opt(self.eta_n),
            fmt_opt(self.t_n),
            fmt_opt(self.xi_n),
            fmt_opt(self.hess_det),
            fmt_opt(self.log_estimate),
            fmt_opt(self.log_v_term),
            fmt_opt(self.log_h_term),
            fmt_opt(self.log_exact),
            fmt_opt(self.log_ratio),
            quoted,
        );
        line
    }
}

pub struct Context_<'a> {
    pub cfg: &'a ExperimentConfig,
    pub model: WeightModel,
    pub params: String,
    pub cum: CumulantSet,
}

pub fn build_context(cfg: &ExperimentConfig) -> Result<Context_<'_>> {
    let (model, params) = cfg.build_model()?;
    let order = match cfg.r {
        ROrder::Fixed(r) => r + 2,
        ROrder::Named(_) => cfg.tolerances.r_max + 2,
    }
    .max(2);
    let cum = cumulants(&model, order).context("cumulant computation failed")?;
    Ok(Context_ {
        cfg,
        model,
        params,
        cum,
    })
}

fn thresholds(cfg: &ExperimentConfig) -> RegimeThresholds {
    RegimeThresholds {
        eps1: cfg.tolerances.eps1,
        eps2: cfg.tolerances.eps2,
        clt_floor: cfg.tolerances.clt_floor,
    }
}

/// Expand the deviation rule into the big-N values for one n.
pub fn deviations_for(ctx: &Context_, n: usize) -> Result<Vec<f64>, String> {
    let rule = &ctx.cfg.n_rule;
    match rule.kind.as_str() {
        "absolute" => Ok(rule.values.clone().unwrap()),
        "power" => {
            let nf = n as f64;
            Ok(vec![
                rule.a.unwrap() * nf.powf(rule.theta.unwrap()) * nf.ln().powf(rule.gamma),
            ])
        }
        "scale" => {
            let sc = critical_scales(&ctx.model, ctx.cum.sigma2, n)
                .map_err(|e| format!("n={n}: {e}"))?;
            let base = if rule.scale.as_deref() == Some("n_star") {
                sc.n_star
            } else {
                sc.n_dblstar
            };
            Ok(vec![rule.a.unwrap() * base])
        }
        _ => unreachable!("checked at parse time"),
    }
}

/// One (n, N) point. `oracle_pmf` is the shared exact convolution for this n,
/// when the oracle is enabled and within its cap.
pub fn compute_row(ctx: &Context_, n: usize, big_n: f64, oracle_pmf: Option<&Pmf>) -> ResultRow {
    let mut row = ResultRow {
        family: ctx.cfg.model.family.clone(),
        params: ctx.params.clone(),
        n,
        big_n,
        regime: None,
        n_star: None,
        n_2star: None,
        x_nr: None,
        eta_n: None,
        t_n: None,
        xi_n: None,
        hess_det: None,
        log_estimate: None,
        log_v_term: None,
        log_h_term: None,
        log_exact: None,
        log_ratio: None,
        diagnostics: String::new(),
        failed: false,
    };
    let mut notes: Vec<String> = Vec::new();
    let fail = |row: &mut ResultRow, notes: &mut Vec<String>, msg: String| {
        notes.push(format!("error: {msg}"));
        row.failed = true;
    };

    let model = &ctx.model;
    let cum = &ctx.cum;
    let tol = &ctx.cfg.tolerances;

    match critical_scales(model, cum.sigma2, n) {
        Ok(sc) => {
            row.n_star = Some(sc.n_star);
            row.n_2star = Some(sc.n_dblstar);
        }
        Err(e) => notes.push(format!("scales unavailable: {e}")),
    }

    let r = match ctx.cfg.r {
        ROrder::Fixed(r) => r,
        ROrder::Named(_) => match row.n_star {
            Some(ns) => auto_order(n, ns, tol.r_threshold, tol.r_max),
            None => 0,
        },
    };

    let regime = match classify_regime(model, cum.sigma2, n, big_n, &thresholds(ctx.cfg)) {
        Ok(r) => r,
        Err(e) => {
            fail(&mut row, &mut notes, e.to_string());
            row.diagnostics = notes.join("; ");
            return row;
        }
    };
    row.regime = Some(
        match regime {
            Regime::Moderate => "moderate",
            Regime::Critical => "critical",
            Regime::BigJump => "bigjump",
        }
        .into(),
    );

    let est = match regime {
        Regime::Moderate => estimate_moderate(model, cum, n, big_n, r),
        Regime::Critical => estimate_critical(model, cum, n, big_n, r),
        Regime::BigJump => estimate_large(model, cum, n, big_n, r),
    };
    match est {
        Ok(e) => {
            row.log_estimate = Some(e.log_value);
            row.log_v_term = e.components.v_term_log;
            row.log_h_term = e.components.h_term_log;
            row.x_nr = e.x_nr;
            notes.push(format!("r={}", e.r_used));
            notes.extend(e.notes);
        }
        Err(e) => fail(&mut row, &mut notes, e.to_string()),
    }
    notes.push(format!(
        "insensitivity={}",
        insensitivity(model, cum.sigma2, n, big_n)
    ));

    // contour phase data is informative, not load-bearing; absence is normal
    // in the moderate regime
    let eta_r = (cum.kappas.len().saturating_sub(2)).min(6);
    match eta_n(model, cum, n, big_n, eta_r, tol.delta) {
        Ok(eta) => row.eta_n = Some(eta),
        Err(ContourError::NoEta { .. }) => notes.push("eta: none below delta".into()),
        Err(e) => notes.push(format!("eta: {e}")),
    }
    match phi_n_critical(model, cum, n, big_n, tol.delta) {
        Ok((inner, _)) => {
            row.t_n = Some(inner.t_n);
            row.xi_n = Some(inner.xi_n);
            row.hess_det = Some(inner.hess_det);
        }
        Err(ContourError::NoPhaseCritical { .. }) => notes.push("phase point: none".into()),
        Err(e) => notes.push(format!("phase point: {e}")),
    }

    if let Some(pmf) = oracle_pmf {
        let m = (n as f64 * cum.mu + big_n).round() as i64;
        let ln_exact = pmf.log_prob(m);
        row.log_exact = Some(ln_exact);
        if let Some(est) = row.log_estimate {
            row.log_ratio = Some(est - ln_exact);
        }
    }

    row.diagnostics = notes.join("; ");
    row
}

/// Oracle PMFs per n, computed once and shared across that n's rows.
fn oracle_pmfs(ctx: &Context_, points: &[(usize, f64)]) -> Result<HashMap<usize, Pmf>, String> {
    if !ctx.cfg.oracle.enabled {
        return Ok(HashMap::new());
    }
    let mut m_max: HashMap<usize, i64> = HashMap::new();
    for &(n, big_n) in points {
        let m = (n as f64 * ctx.cum.mu + big_n).round() as i64;
        if m > ctx.cfg.oracle.m_max_cap {
            continue; // rows beyond the cap simply lack log_exact
        }
        let e = m_max.entry(n).or_insert(m);
        *e = (*e).max(m);
    }
    let entries: Vec<(usize, i64)> = {
        let mut v: Vec<_> = m_max.into_iter().collect();
        v.sort_unstable();
        v
    };
    let pmfs: Vec<(usize, Result<Pmf, String>)> = entries
        .par_iter()
        .map(|&(n, m)| {
            (
                n,
                convolve_exact_doubling(&ctx.model, n, m).map_err(|e| format!("oracle n={n}: {e}")),
            )
        })
        .collect();
    let mut out = HashMap::new();
    for (n, p) in pmfs {
        out.insert(n, p?);
    }
    Ok(out)
}

/// Expand the grid, compute rows in parallel, and return them in input order.
pub fn compute_rows(ctx: &Context_) -> Vec<ResultRow> {
    let mut points: Vec<(usize, f64, Option<String>)> = Vec::new();
    for &n in &ctx.cfg.n_list {
        match deviations_for(ctx, n) {
            Ok(devs) => points.extend(devs.into_iter().map(|d| (n, d, None))),
            Err(e) => points.push((n, f64::NAN, Some(e))),
        }
    }
    let plain: Vec<(usize, f64)> = points
        .iter()
        .filter(|(_, d, _)| d.is_finite())
        .map(|&(n, d, _)| (n, d))
        .collect();
    let pmfs = match oracle_pmfs(ctx, &plain) {
        Ok(p) => p,
        Err(e) => {
            // oracle failure poisons every row that expected log_exact
            return points
                .into_iter()
                .map(|(n, d, _)| {
                    let mut row = compute_row(ctx, n, d, None);
                    row.failed = true;
                    row.diagnostics = format!("{}; error: {e}", row.diagnostics);
                    row
                })
                .collect();
        }
    };
    points
        .par_iter()
        .map(|(n, d, rule_err)| match rule_err {
            Some(e) => {
                let mut row = compute_row(ctx, *n, *d, None);
                row.failed = true;
                row.diagnostics = format!("error: {e}");
                row
            }
            None => {
                let m = (*n as f64 * ctx.cum.mu + d).round() as i64;
                let pmf = if ctx.cfg.oracle.enabled && m <= ctx.cfg.oracle.m_max_cap {
                    pmfs.get(n)
                } else {
                    None
                };
                compute_row(ctx, *n, *d, pmf)
            }
        })
        .collect()
}

#[derive(Serialize)]
struct Manifest<'a> {
    schema: &'static str,
    config_sha256: String,
    library_version: &'static str,
    tolerances: &'a crate::config::Tolerances,
    oracle: &'a crate::config::OracleSpec,
    r: &'a ROrder,
    csv_header: &'static str,
}

pub fn write_manifest(cfg: &ExperimentConfig, path: &Path) -> Result<()> {
    let mut hasher = Sha256::new();
    hasher.update(cfg.canonical_toml().as_bytes());
    let manifest = Manifest {
        schema: "manifest_v1",
        config_sha256: hex::encode(hasher.finalize()),
        library_version: env!("CARGO_PKG_VERSION"),
        tolerances: &cfg.tolerances,
        oracle: &cfg.oracle,
        r: &cfg.r,
        csv_header: CSV_HEADER,
    };
    fs::write(path, serde_json::to_string_pretty(&manifest)? + "\n")
        .with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

/// Sweep: CSV + manifest. Returns the number of failed rows.
pub fn run_sweep(cfg: &ExperimentConfig, out_dir: &Path) -> Result<usize> {
    let ctx = build_context(cfg)?;
    let rows = compute_rows(&ctx);
    let mut csv = String::from(CSV_HEADER);
    csv.push('\n');
    for r in &rows {
        csv.push_str(&r.to_csv_line());
        csv.push('\n');
    }
    fs::create_dir_all(out_dir)?;
    let csv_path = out_dir.join(&cfg.output.csv);
    fs::write(&csv_path, csv).with_context(|| format!("writing {}", csv_path.display()))?;
    write_manifest(cfg, &out_dir.join(&cfg.output.manifest))?;
    let failed = rows.iter().filter(|r| r.failed).count();
    log::info!(
        "{} rows written to {} ({} failed)",
        rows.len(),
        csv_path.display(),
        failed
    );
    Ok(failed)
}

/// Estimate: the first grid point, as one JSON object on stdout.
pub fn run_estimate(cfg: &ExperimentConfig) -> Result<usize> {
    let ctx = build_context(cfg)?;
    let n = cfg.n_list[0];
    let devs = deviations_for(&ctx, n).map_err(anyhow::Error::msg)?;
    let big_n = devs[0];
    let m = (n as f64 * ctx.cum.mu + big_n).round() as i64;
    let pmf = if cfg.oracle.enabled && m <= cfg.oracle.m_max_cap {
        Some(convolve_exact_doubling(&ctx.model, n, m)?)
    } else {
        None
    };
    let row = compute_row(&ctx, n, big_n, pmf.as_ref());
    println!("{}", serde_json::to_string_pretty(&row)?);
    Ok(usize::from(row.failed))
}

/// Scales: critical-scales table with closed forms where available.
pub fn run_scales(cfg: &ExperimentConfig, out_dir: &Path) -> Result<usize> {
    let ctx = build_context(cfg)?;
    let header = "family,params,n,x_star,N_star,N_2star,t_star,x_star_closed,N_star_closed,N_2star_closed,rel_x_star,rel_N_star,rel_N_2star,nstar_over_2xstar";
    let mut csv = String::from(header);
    csv.push('\n');
    let mut failed = 0usize;
    for &n in &cfg.n_list {
        let sc = match critical_scales(&ctx.model, ctx.cum.sigma2, n) {
            Ok(s) => s,
            Err(e) => {
                failed += 1;
                let _ = writeln!(csv, "{},{},{n},,,,,,,,,,,\"error: {e}\"", ctx.params, cfg.model.family);
                continue;
            }
        };
        // closed forms exist for the stretched family:
        // x* = [alpha(1-alpha) n sigma^2]^{1/(2-alpha)},
        // N* = (2-alpha)/(1-alpha) x*, N** = C_alpha (n sigma^2)^{1/(2-alpha)}
        let closed = cfg.model.alpha.filter(|_| cfg.model.family == "stretched").map(|al| {
            let ns2 = n as f64 * ctx.cum.sigma2;
            let x = (al * (1.0 - al) * ns2).powf(1.0 / (2.0 - al));
            let nstar = (2.0 - al) / (1.0 - al) * x;
            let c_al = (2.0 - al) * (2.0 - 2.0 * al).powf(-(1.0 - al) / (2.0 - al));
            (x, nstar, c_al * ns2.powf(1.0 / (2.0 - al)))
        });
        let (xc, nc, dc) = match closed {
            Some((a, b, c)) => (Some(a), Some(b), Some(c)),
            None => (None, None, None),
        };
        let rel = |num: f64, c: Option<f64>| c.map(|c| (num / c - 1.0).abs());
        let _ = writeln!(
            csv,
            "{},{},{n},{},{},{},{},{},{},{},{},{},{},{}",
            cfg.model.family,
            ctx.params,
            sc.x_star,
            sc.n_star,
            sc.n_dblstar,
            sc.t_star,
            fmt_opt(xc),
            fmt_opt(nc),
            fmt_opt(dc),
            fmt_opt(rel(sc.x_star, xc)),
            fmt_opt(rel(sc.n_star, nc)),
            fmt_opt(rel(sc.n_dblstar, dc)),
            sc.n_star / (2.0 * sc.x_star),
        );
    }
    fs::create_dir_all(out_dir)?;
    let path = out_dir.join("scales.csv");
    fs::write(&path, csv).with_context(|| format!("writing {}", path.display()))?;
    write_manifest(cfg, &out_dir.join(&cfg.output.manifest))?;
    log::info!("scales table written to {}", path.display());
    Ok(failed)
}

/// Validate: structural-assumption report as JSON on stdout.
pub fn run_validate(cfg: &ExperimentConfig) -> Result<usize> {
    let (model, params) = cfg.build_model()?;
    let grid: Vec<f64> = cfg
        .validate
        .x_grid
        .iter()
        .copied()
        .filter(|&x| x > model.concave_from())
        .collect();
    let rep = validate_assumptions(&model, &grid);
    #[derive(Serialize)]
    struct Report<'a> {
        family: &'a str,
        params: &'a str,
        x_grid: &'a [f64],
        passed: bool,
        signs_ok: bool,
        hazard_growth_ok: bool,
        bracket_ok: bool,
        alpha_ok: bool,
        c1: f64,
        c2: f64,
        c3: f64,
        c4: f64,
        growth_ratio: &'a [f64],
        alpha_ratio: &'a [f64],
        violations: &'a [String],
    }
    let out = Report {
        family: &cfg.model.family,
        params: &params,
        x_grid: &grid,
        passed: rep.passed(),
        signs_ok: rep.signs_ok,
        hazard_growth_ok: rep.hazard_growth_ok,
        bracket_ok: rep.bracket_ok,
        alpha_ok: rep.alpha_ok,
        c1: rep.c1,
        c2: rep.c2,
        c3: rep.c3,
        c4: rep.c4,
        growth_ratio: &rep.growth_ratio,
        alpha_ratio: &rep.alpha_ratio,
        violations: &rep.violations,
    };
    println!("{}", serde_json::to_string_pretty(&out)?);
    Ok(usize::from(!rep.passed()))
}

/// Oracle: exact convolution dump (n, m, log P(S_n = m)) for each n.
pub fn run_oracle(cfg: &ExperimentConfig, out_dir: &Path) -> Result<usize> {
    let ctx = build_context(cfg)?;
    let mut csv = String::from("family,params,n,m,log_prob\n");
    let mut failed = 0usize;
    for &n in &cfg.n_list {
        let devs = match deviations_for(&ctx, n) {
            Ok(d) => d,
            Err(e) => {
                failed += 1;
                let _ = writeln!(csv, "{},{},{n},,\"error: {e}\"", cfg.model.family, ctx.params);
                continue;
            }
        };
        let max_dev = devs.iter().cloned().fold(0.0f64, f64::max);
        let m_max =
            ((n as f64 * ctx.cum.mu + max_dev).round() as i64).min(cfg.oracle.m_max_cap);
        match convolve_exact_doubling(&ctx.model, n, m_max) {
            Ok(pmf) => {
                for m in (n as i64)..=m_max {
                    let _ = writeln!(
                        csv,
                        "{},{},{n},{m},{}",
                        cfg.model.family,
                        ctx.params,
                        pmf.log_prob(m)
                    );
                }
            }
            Err(e) => {
                failed += 1;
                let _ = writeln!(csv, "{},{},{n},,\"error: {e}\"", cfg.model.family, ctx.params);
            }
        }
    }
    fs::create_dir_all(out_dir)?;
    let path = out_dir.join("oracle.csv");
    fs::write(&path, csv).with_context(|| format!("writing {}", path.display()))?;
    write_manifest(cfg, &out_dir.join(&cfg.output.manifest))?;
    log::info!("oracle dump written to {}", path.display());
    Ok(failed)
}

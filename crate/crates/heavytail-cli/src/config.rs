//! Declarative experiment configuration: TOML file (or stdin) plus repeatable
//! `--set key=value` dotted-path overrides. Unknown keys are rejected.

use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};

use heavytail::exactprob::normalize;
use heavytail::weights::{make_geometric, make_loghazard, make_stretched, WeightModel};

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelSpec,
    pub n_list: Vec<usize>,
    pub n_rule: NRule,
    #[serde(default)]
    pub r: ROrder,
    #[serde(default)]
    pub oracle: OracleSpec,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub output: OutputSpec,
    #[serde(default)]
    pub validate: ValidateSpec,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    /// "stretched" | "loghazard" | "geometric"
    pub family: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
}

/// Deviation rule: absolute list, power rule N = A n^theta (log n)^gamma, or
/// scale-relative N = A N_star / A N_2star.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NRule {
    /// "absolute" | "power" | "scale"
    pub kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    #[serde(default)]
    pub gamma: f64,
    /// "n_star" | "n_2star" (scale rule only)
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scale: Option<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ROrder {
    Fixed(usize),
    Named(String),
}

impl Default for ROrder {
    fn default() -> Self {
        ROrder::Named("auto".into())
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OracleSpec {
    pub enabled: bool,
    /// cap on the largest m the exact convolution will be asked for
    pub m_max_cap: i64,
}

impl Default for OracleSpec {
    fn default() -> Self {
        OracleSpec {
            enabled: false,
            m_max_cap: 2_000_000,
        }
    }
}

/// Every knob that affects a number in the CSV; recorded in the manifest.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// small-t cutoff for the vertical-cut abscissa
    pub delta: f64,
    /// auto order: smallest r with n (N_star/n)^r below this
    pub r_threshold: f64,
    pub r_max: usize,
    /// moderate/critical boundary slack on N/N_star
    pub eps1: f64,
    /// big-jump floor multiplier on n^{1/(2-alpha_bound)}
    pub eps2: f64,
    /// CLT-window floor multiplier on sqrt(n)
    pub clt_floor: f64,
    pub normalize_tail_eps: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            delta: 0.25,
            r_threshold: 1e-3,
            r_max: 6,
            eps1: 0.05,
            eps2: 1.0,
            clt_floor: 1.0,
            normalize_tail_eps: 1e-14,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSpec {
    pub csv: String,
    pub manifest: String,
}

impl Default for OutputSpec {
    fn default() -> Self {
        OutputSpec {
            csv: "results.csv".into(),
            manifest: "manifest.json".into(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ValidateSpec {
    pub x_grid: Vec<f64>,
}

impl Default for ValidateSpec {
    fn default() -> Self {
        ValidateSpec {
            x_grid: (2..=8).map(|e| 10f64.powi(e)).collect(),
        }
    }
}

impl ExperimentConfig {
    /// Parse TOML text, apply `--set` overrides, and schema-check.
    pub fn from_toml(text: &str, sets: &[String]) -> Result<Self> {
        let mut value: toml::Value = text.parse().context("config is not valid TOML")?;
        for s in sets {
            apply_set(&mut value, s)?;
        }
        let cfg: ExperimentConfig = value
            .try_into()
            .map_err(|e| anyhow!("config schema error: {e}"))?;
        cfg.check()?;
        Ok(cfg)
    }

    fn check(&self) -> Result<()> {
        if self.n_list.is_empty() {
            bail!("config schema error: n_list must not be empty");
        }
        match self.model.family.as_str() {
            "stretched" => {
                let a = self.model.alpha.ok_or_else(|| anyhow!("stretched family needs model.alpha"))?;
                if !(0.0 < a && a < 1.0) {
                    bail!("model.alpha must lie in (0, 1)");
                }
            }
            "loghazard" => {
                let b = self.model.beta.ok_or_else(|| anyhow!("loghazard family needs model.beta"))?;
                if !(b > 2.0) {
                    bail!("model.beta must exceed 2");
                }
            }
            "geometric" => {}
            other => bail!("unknown family {other:?} (expected stretched, loghazard, or geometric)"),
        }
        match self.n_rule.kind.as_str() {
            "absolute" => {
                if self.n_rule.values.as_ref().map_or(true, |v| v.is_empty()) {
                    bail!("absolute n_rule needs a non-empty values list");
                }
            }
            "power" => {
                if self.n_rule.a.is_none() || self.n_rule.theta.is_none() {
                    bail!("power n_rule needs coefficients a and theta");
                }
            }
            "scale" => {
                if self.n_rule.a.is_none() {
                    bail!("scale n_rule needs coefficient a");
                }
                match self.n_rule.scale.as_deref() {
                    Some("n_star") | Some("n_2star") => {}
                    other => bail!("scale n_rule needs scale = \"n_star\" or \"n_2star\", got {other:?}"),
                }
            }
            other => bail!("unknown n_rule.kind {other:?}"),
        }
        if let ROrder::Named(s) = &self.r {
            if s != "auto" {
                bail!("r must be a non-negative integer or \"auto\", got {s:?}");
            }
        }
        Ok(())
    }

    /// Normalized weight model plus the short parameter tag used in rows.
    pub fn build_model(&self) -> Result<(WeightModel, String)> {
        let (mut model, params) = match self.model.family.as_str() {
            "stretched" => {
                let a = self.model.alpha.unwrap();
                (make_stretched(a)?, format!("alpha={a}"))
            }
            "loghazard" => {
                let b = self.model.beta.unwrap();
                (make_loghazard(b)?, format!("beta={b}"))
            }
            "geometric" => (make_geometric(), String::new()),
            _ => unreachable!("checked in check()"),
        };
        normalize(&mut model, self.tolerances.normalize_tail_eps)?;
        Ok((model, params))
    }

    /// Canonical serialization of the effective config (after overrides);
    /// hashed into the manifest.
    pub fn canonical_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}

/// Apply one `key.path=value` override to a parsed TOML tree.
fn apply_set(root: &mut toml::Value, spec: &str) -> Result<()> {
    let (path, raw) = spec
        .split_once('=')
        .ok_or_else(|| anyhow!("--set expects key=value, got {spec:?}"))?;
    let parsed: toml::Value = match format!("x = {raw}").parse::<toml::Value>() {
        Ok(toml::Value::Table(t)) => t["x"].clone(),
        _ => toml::Value::String(raw.to_string()),
    };
    let mut cur = root;
    let parts: Vec<&str> = path.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        let table = cur
            .as_table_mut()
            .ok_or_else(|| anyhow!("--set path {path:?}: {part:?} is not a table"))?;
        if i + 1 == parts.len() {
            table.insert(part.to_string(), parsed);
            return Ok(());
        }
        cur = table
            .entry(part.to_string())
            .or_insert(toml::Value::Table(Default::default()));
    }
    unreachable!()
}

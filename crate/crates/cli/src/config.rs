//! JSON run configuration.

use std::path::Path;

use anyhow::{bail, Context, Result};
use ghlevy_core::envelope::EnvelopeConfig;
use ghlevy_core::truncation::TruncationConfig;
use ghlevy_core::{GhParams, GigParams};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Simulate,
    MarginalTest,
    Diagnostics,
}

/// GH parameters; give exactly one of `gamma` and `alpha`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsConfig {
    pub lambda: f64,
    pub delta: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub beta: f64,
    #[serde(default)]
    pub mu: f64,
    #[serde(default = "one")]
    pub sigma: f64,
}

fn one() -> f64 {
    1.0
}

impl ParamsConfig {
    pub fn resolve(&self) -> Result<GhParams> {
        let p = match (self.gamma, self.alpha) {
            (Some(g), None) => GhParams::new(GigParams::new(self.lambda, self.delta, g)?, self.mu, self.beta, self.sigma)?,
            (None, Some(a)) => {
                if self.sigma != 1.0 {
                    bail!("params: alpha form fixes sigma = 1");
                }
                GhParams::from_alpha(self.lambda, a, self.beta, self.delta, self.mu)?
            }
            _ => bail!("params: give exactly one of gamma and alpha"),
        };
        Ok(p)
    }
}

/// Envelope overrides; unset fields take the defaults for the parameters.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvelopeOverrides {
    pub z1: Option<f64>,
    pub z0: Option<f64>,
    pub squeeze: Option<bool>,
}

impl EnvelopeOverrides {
    pub fn resolve(&self, p: &GigParams) -> Result<EnvelopeConfig> {
        let d = EnvelopeConfig::for_params(p);
        let cfg = EnvelopeConfig {
            z1: self.z1.unwrap_or(d.z1),
            z0: self.z0.unwrap_or(d.z0),
            squeeze: self.squeeze.unwrap_or(d.squeeze && self.z1.is_none() && self.z0.is_none()),
        };
        cfg.validate(p).context("envelope")?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GridConfig {
    /// Explicit times.
    Points(Vec<f64>),
    /// `points` equally spaced times from 0 to the horizon.
    Uniform { points: usize },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    pub n_paths: usize,
    #[serde(default = "one")]
    pub horizon: f64,
    pub grid: GridConfig,
}

impl SimulateConfig {
    pub fn grid(&self) -> Result<Vec<f64>> {
        let g = match &self.grid {
            GridConfig::Points(v) => v.clone(),
            GridConfig::Uniform { points } => {
                if *points < 2 {
                    bail!("simulate.grid.points: need at least 2");
                }
                (0..*points).map(|i| self.horizon * i as f64 / (*points - 1) as f64).collect()
            }
        };
        if g.is_empty() {
            bail!("simulate.grid: empty");
        }
        if g.iter().any(|t| !(0.0..=self.horizon).contains(t)) || g.windows(2).any(|w| w[1] < w[0]) {
            bail!("simulate.grid: times must be nondecreasing and lie in [0, {}]", self.horizon);
        }
        Ok(g)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarginalConfig {
    pub n: usize,
    #[serde(default = "default_bins")]
    pub histogram_bins: usize,
    #[serde(default = "default_qq")]
    pub qq_points: usize,
}

fn default_bins() -> usize {
    50
}

fn default_qq() -> usize {
    100
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DiagnosticsConfig {
    /// Orders for the bound tables.
    pub nu: Vec<f64>,
    pub z_min: f64,
    pub z_max: f64,
    pub z_points: usize,
    /// Jump sizes for the acceptance table.
    pub x: Vec<f64>,
    /// Proposals per acceptance-table row.
    pub proposals: usize,
    /// Truncation levels for the sandwich table.
    pub eps: Vec<f64>,
}

impl Default for DiagnosticsConfig {
    fn default() -> Self {
        Self {
            nu: vec![0.3, 0.8],
            z_min: 1e-4,
            z_max: 1e3,
            z_points: 100,
            x: vec![1e-3, 1e-2, 0.1, 1.0, 10.0],
            proposals: 10_000,
            eps: vec![1e-6, 1e-4, 1e-2, 1.0],
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default)]
    pub command: Option<Command>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub threads: Option<usize>,
    pub params: ParamsConfig,
    #[serde(default)]
    pub truncation: TruncationConfig,
    #[serde(default)]
    pub envelope: EnvelopeOverrides,
    #[serde(default)]
    pub simulate: Option<SimulateConfig>,
    #[serde(default)]
    pub marginal_test: Option<MarginalConfig>,
    #[serde(default)]
    pub diagnostics: Option<DiagnosticsConfig>,
}

impl Config {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("in {}", path.display()))
    }

    /// serde_json errors carry the line and column of the offending field.
    pub fn parse(text: &str) -> Result<Self> {
        let c: Config = serde_json::from_str(text)?;
        c.truncation.validate().context("truncation")?;
        Ok(c)
    }
}

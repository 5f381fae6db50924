//! Run configuration: JSON files, command-line overrides and validation.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimate::EvaluationMode;
use crate::market::{make_time_grid, MarketModel};
use crate::optimize::{OptimizerConfig, OptimizerMethod};
use crate::policy::LinkFunction;

/// Highest polynomial degree accepted from configuration.
pub const MAX_DEGREE: u32 = 8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub dim: usize,
    /// One initial price per asset, or a single value used for every asset.
    pub spot: Vec<f64>,
    pub strike: f64,
    pub rate: f64,
    pub dividend: f64,
    pub vol: f64,
    pub maturity: f64,
    pub num_dates: usize,
    /// Explicit exercise dates; defaults to the uniform grid.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dates: Option<Vec<f64>>,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            dim: 2,
            spot: vec![100.0, 100.0],
            strike: 100.0,
            rate: 0.05,
            dividend: 0.1,
            vol: 0.2,
            maturity: 3.0,
            num_dates: 9,
            dates: None,
        }
    }
}

impl ModelConfig {
    pub fn to_market(&self) -> Result<MarketModel> {
        if self.dim == 0 {
            return Err(Error::config("model.dim", "must be at least 1"));
        }
        let spot = match self.spot.len() {
            1 => vec![self.spot[0]; self.dim],
            n if n == self.dim => self.spot.clone(),
            n => {
                return Err(Error::config(
                    "model.spot",
                    format!("has {n} entries but model.dim is {}", self.dim),
                ))
            }
        };
        let dates = match &self.dates {
            Some(d) => {
                if d.len() != self.num_dates + 1 {
                    return Err(Error::config(
                        "model.dates",
                        format!("has {} entries, expected num_dates + 1 = {}", d.len(), self.num_dates + 1),
                    ));
                }
                d.clone()
            }
            None => make_time_grid(self.maturity, self.num_dates)?,
        };
        let model = MarketModel {
            spot,
            strike: self.strike,
            rate: self.rate,
            dividend: self.dividend,
            vol: self.vol,
            maturity: self.maturity,
            dates,
        };
        model.validate()?;
        Ok(model)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Backward,
    Forward,
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "backward" => Ok(Method::Backward),
            "forward" => Ok(Method::Forward),
            other => Err(Error::config("method", format!("unknown method `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Seeds {
    pub train: u64,
    pub eval: u64,
    pub optimizer: u64,
}

impl Default for Seeds {
    fn default() -> Self {
        Seeds {
            train: 1,
            eval: 2,
            optimizer: 3,
        }
    }
}

/// Optimizer settings; unset entries take the method's defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizerOverrides {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub method: Option<OptimizerMethod>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step_size: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iters: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub minibatch: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol_rel: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub restarts: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    /// Training sample sizes, strictly increasing.
    pub train_paths: Vec<usize>,
    pub reps: usize,
    /// Training size of the reference fit; defaults to the largest entry.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference_train_paths: Option<usize>,
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.train_paths.is_empty() {
            return Err(Error::config("sweep.train_paths", "must not be empty"));
        }
        if self.train_paths.contains(&0) {
            return Err(Error::config("sweep.train_paths", "entries must be positive"));
        }
        for w in self.train_paths.windows(2) {
            if w[0] == w[1] {
                return Err(Error::config("sweep.train_paths", format!("duplicate entry {}", w[0])));
            }
            if w[0] > w[1] {
                return Err(Error::config("sweep.train_paths", "entries must be increasing"));
            }
        }
        if self.reps == 0 {
            return Err(Error::config("sweep.reps", "must be at least 1"));
        }
        if self.reference_train_paths == Some(0) {
            return Err(Error::config("sweep.reference_train_paths", "must be positive"));
        }
        Ok(())
    }

    pub fn reference_paths(&self) -> usize {
        self.reference_train_paths
            .unwrap_or_else(|| *self.train_paths.iter().max().unwrap_or(&1))
    }
}

/// Parses `"M1,M2,..."`.
pub fn parse_sweep_list(s: &str) -> Result<Vec<usize>> {
    s.split(',')
        .map(|t| t.trim())
        .filter(|t| !t.is_empty())
        .map(|t| {
            let cleaned = t.replace('_', "");
            cleaned.parse::<usize>().or_else(|_| {
                // Accept scientific shorthand such as 1e5.
                cleaned
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.fract() == 0.0 && *v >= 0.0)
                    .map(|v| v as usize)
                    .ok_or_else(|| Error::config("sweep", format!("`{t}` is not a path count")))
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub model: ModelConfig,
    #[serde(default = "default_method")]
    pub method: Method,
    #[serde(default = "default_link")]
    pub link: LinkFunction,
    #[serde(default = "default_degree")]
    pub degree: u32,
    #[serde(default = "default_train_paths")]
    pub train_paths: usize,
    #[serde(default = "default_eval_paths")]
    pub eval_paths: usize,
    #[serde(default)]
    pub seeds: Seeds,
    #[serde(default)]
    pub optimizer: OptimizerOverrides,
    #[serde(default = "default_eval_mode")]
    pub eval_mode: EvaluationMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    /// Write measured wall time into the results row. Off by default so
    /// that identical configurations give identical result files.
    #[serde(default)]
    pub record_wall_time: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
}

fn default_method() -> Method {
    Method::Backward
}
fn default_link() -> LinkFunction {
    LinkFunction::Gumbel
}
fn default_degree() -> u32 {
    3
}
fn default_train_paths() -> usize {
    200_000
}
fn default_eval_paths() -> usize {
    1_000_000
}
fn default_eval_mode() -> EvaluationMode {
    EvaluationMode::Expectation
}

impl Default for RunConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("defaults deserialize")
    }
}

impl RunConfig {
    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::config("config", e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config("--config", format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Fully specified optimizer settings for this run.
    pub fn optimizer_config(&self) -> OptimizerConfig {
        let base = match self.method {
            Method::Backward => OptimizerConfig::backward_default(),
            Method::Forward => OptimizerConfig::forward_default(),
        };
        let o = &self.optimizer;
        OptimizerConfig {
            method: o.method.unwrap_or(base.method),
            step_size: o.step_size.unwrap_or(base.step_size),
            beta1: o.beta1.unwrap_or(base.beta1),
            beta2: o.beta2.unwrap_or(base.beta2),
            epsilon: o.epsilon.unwrap_or(base.epsilon),
            max_iters: o.max_iters.unwrap_or(base.max_iters),
            minibatch: o.minibatch.unwrap_or(base.minibatch),
            tol_rel: o.tol_rel.unwrap_or(base.tol_rel),
            restarts: o.restarts.unwrap_or(base.restarts),
            seed: self.seeds.optimizer,
        }
    }

    /// Copy with every default materialized, suitable for reproducing the run.
    pub fn resolved(&self) -> Self {
        let opt = self.optimizer_config();
        let mut out = self.clone();
        out.optimizer = OptimizerOverrides {
            method: Some(opt.method),
            step_size: Some(opt.step_size),
            beta1: Some(opt.beta1),
            beta2: Some(opt.beta2),
            epsilon: Some(opt.epsilon),
            max_iters: Some(opt.max_iters),
            minibatch: Some(opt.minibatch),
            tol_rel: Some(opt.tol_rel),
            restarts: Some(opt.restarts),
        };
        if out.model.dates.is_none() {
            out.model.dates = make_time_grid(out.model.maturity, out.model.num_dates).ok();
        }
        out
    }

    /// Checks every field; returns non-fatal warnings.
    pub fn validate(&self) -> Result<Vec<String>> {
        self.model.to_market()?;
        if self.degree > MAX_DEGREE {
            return Err(Error::config("degree", format!("must be at most {MAX_DEGREE}")));
        }
        if self.train_paths == 0 {
            return Err(Error::config("train_paths", "must be at least 1"));
        }
        if self.eval_paths == 0 {
            return Err(Error::config("eval_paths", "must be at least 1"));
        }
        if self.threads == Some(0) {
            return Err(Error::config("threads", "must be at least 1"));
        }
        self.optimizer_config().validate()?;
        if let Some(s) = &self.sweep {
            s.validate()?;
        }
        let mut warnings = Vec::new();
        if self.seeds.train == self.seeds.eval {
            warnings.push(
                "seeds.train equals seeds.eval: evaluation reuses the training paths and is not low-biased"
                    .to_string(),
            );
        }
        Ok(warnings)
    }

    /// Short identifier derived from the resolved configuration.
    pub fn run_id(&self) -> String {
        use sha2::{Digest, Sha256};
        let mut c = self.resolved();
        c.output = None;
        c.threads = None;
        let json = serde_json::to_vec(&c).expect("config serializes");
        hex::encode(&Sha256::digest(json)[..6])
    }
}

//! Run configuration. Values are layered: command-line flags override the
//! TOML config file, which overrides the built-in defaults.

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use irvis_core::fris::EdgeSign;
use irvis_core::fuser::{FuserConfig, Init};
use irvis_core::objective::BaselineWeights;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TableFormat {
    #[default]
    Csv,
    Markdown,
}

/// Tuning flags shared by every command.
#[derive(Debug, Clone, Default, Args)]
pub struct SharedFlags {
    /// Blend weight of the enhanced image in the reference.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Weight of the gradient-magnitude term.
    #[arg(long)]
    pub lambda1: Option<f64>,
    /// Weight of the gradient-angle term.
    #[arg(long)]
    pub lambda2: Option<f64>,
    /// Stabilizer in the cosine denominator.
    #[arg(long)]
    pub eps: Option<f64>,
    /// Optimizer step size.
    #[arg(long)]
    pub step: Option<f64>,
    /// Iteration cap.
    #[arg(long)]
    pub iters: Option<usize>,
    /// Relative loss change that ends the optimization.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Starting plane: reference, max or average.
    #[arg(long)]
    pub init: Option<String>,
    /// Sign of the Laplacian in the reference: +1 or -1.
    #[arg(long, allow_hyphen_values = true)]
    pub edge_sign: Option<String>,
    /// Side of the square occlusion patch.
    #[arg(long)]
    pub k: Option<usize>,
    /// Master seed for every random draw.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads for batch commands (default: logical CPUs).
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Table format for printed and written reports.
    #[arg(long, value_enum)]
    pub format: Option<TableFormat>,
    /// TOML file with defaults for any of the flags above.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

/// Keys accepted in the config file; names match the flags.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub alpha: Option<f64>,
    pub lambda1: Option<f64>,
    pub lambda2: Option<f64>,
    pub eps: Option<f64>,
    pub step: Option<f64>,
    pub iters: Option<usize>,
    pub tol: Option<f64>,
    pub init: Option<String>,
    pub edge_sign: Option<String>,
    pub k: Option<usize>,
    pub seed: Option<u64>,
    pub jobs: Option<usize>,
    pub format: Option<TableFormat>,
    pub baseline: Option<BaselineWeights>,
}

impl FileConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::io(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| {
            let msg = e.message().to_string();
            CliError::usage(format!("invalid config {}: {msg}", path.display()))
        })
    }
}

/// The effective configuration of one invocation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub fuser: FuserConfig,
    pub baseline: BaselineWeights,
    pub k: Option<usize>,
    pub seed: u64,
    pub jobs: Option<usize>,
    pub format: TableFormat,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            fuser: FuserConfig::default(),
            baseline: BaselineWeights::default(),
            k: None,
            seed: 0,
            jobs: None,
            format: TableFormat::Csv,
        }
    }
}

pub fn parse_edge_sign(s: &str) -> CliResult<EdgeSign> {
    match s {
        "+1" | "1" | "plus" => Ok(EdgeSign::Plus),
        "-1" | "minus" => Ok(EdgeSign::Minus),
        other => Err(CliError::usage(format!("edge sign must be +1 or -1, got `{other}`"))),
    }
}

fn parse_init(s: &str) -> CliResult<Init> {
    s.parse().map_err(|e: irvis_core::FusionError| CliError::usage(e.to_string()))
}

impl RunConfig {
    /// Layers the config file (if any) and then the flags over the defaults.
    pub fn resolve(flags: &SharedFlags) -> CliResult<Self> {
        let file = match &flags.config {
            Some(path) => FileConfig::load(path)?,
            None => FileConfig::default(),
        };
        let mut cfg = RunConfig::default();
        cfg.apply_file(file)?;
        cfg.apply_flags(flags)?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn apply_file(&mut self, f: FileConfig) -> CliResult<()> {
        let layer = SharedFlags {
            alpha: f.alpha,
            lambda1: f.lambda1,
            lambda2: f.lambda2,
            eps: f.eps,
            step: f.step,
            iters: f.iters,
            tol: f.tol,
            init: f.init,
            edge_sign: f.edge_sign,
            k: f.k,
            seed: f.seed,
            jobs: f.jobs,
            format: f.format,
            config: None,
        };
        self.apply_flags(&layer)?;
        if let Some(b) = f.baseline {
            self.baseline = b;
        }
        Ok(())
    }

    fn apply_flags(&mut self, f: &SharedFlags) -> CliResult<()> {
        let w = &mut self.fuser.weights;
        if let Some(v) = f.alpha {
            w.alpha = v;
        }
        if let Some(v) = f.lambda1 {
            w.lambda1 = v;
        }
        if let Some(v) = f.lambda2 {
            w.lambda2 = v;
        }
        if let Some(v) = f.eps {
            w.eps = v;
        }
        if let Some(s) = &f.edge_sign {
            w.edge_sign = parse_edge_sign(s)?;
        }
        if let Some(v) = f.step {
            self.fuser.step_size = v;
        }
        if let Some(v) = f.iters {
            self.fuser.max_iters = v;
        }
        if let Some(v) = f.tol {
            self.fuser.rel_tol = v;
        }
        if let Some(s) = &f.init {
            self.fuser.init = parse_init(s)?;
        }
        if f.k.is_some() {
            self.k = f.k;
        }
        if let Some(v) = f.seed {
            self.seed = v;
        }
        if f.jobs.is_some() {
            self.jobs = f.jobs;
        }
        if let Some(v) = f.format {
            self.format = v;
        }
        Ok(())
    }

    pub fn validate(&self) -> CliResult<()> {
        self.fuser.validate()?;
        if self.k == Some(0) {
            return Err(CliError::usage("k must be at least 1"));
        }
        if self.jobs == Some(0) {
            return Err(CliError::usage("jobs must be at least 1"));
        }
        let b = &self.baseline;
        let all = [b.w1, b.w2, b.xi, b.max_grad].into_iter().chain(b.beta);
        if all.into_iter().any(|v| !(v.is_finite() && v >= 0.0)) {
            return Err(CliError::usage("baseline weights must be finite and non-negative"));
        }
        Ok(())
    }
}

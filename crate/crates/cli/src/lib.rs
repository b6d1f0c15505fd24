//! Command-line front end of the fusion engine.

pub mod bench;
pub mod commands;
pub mod config;
pub mod error;
pub mod pipeline;
pub mod table;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::config::{RunConfig, SharedFlags};
use crate::error::CliResult;

#[derive(Debug, Parser)]
#[command(name = "irvis", version, about = "Variational infrared and visible image fusion")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fuse one registered pair.
    Fuse {
        ir: PathBuf,
        vi: PathBuf,
        out: PathBuf,
        /// Registered objective to minimize.
        #[arg(long, default_value = "angular")]
        objective: String,
        /// Write the per-iteration loss trace as CSV.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Append a metrics row for the fused image to this CSV.
        #[arg(long)]
        metrics: Option<PathBuf>,
        #[command(flatten)]
        shared: SharedFlags,
    },
    /// Write the edge, enhanced, equalized and reference images of a pair.
    Ref {
        ir: PathBuf,
        vi: PathBuf,
        out_dir: PathBuf,
        #[command(flatten)]
        shared: SharedFlags,
    },
    /// Write a complementary mask pair and the masked inputs.
    Mask {
        ir: PathBuf,
        vi: PathBuf,
        out_dir: PathBuf,
        #[command(flatten)]
        shared: SharedFlags,
    },
    /// Fuse every pair under `<pairs-dir>/ir` and `<pairs-dir>/vi` and tabulate metrics.
    Bench {
        pairs_dir: PathBuf,
        out_dir: PathBuf,
        /// Also run the four classic objectives.
        #[arg(long)]
        baselines: bool,
        /// Also run the masked robustness protocol.
        #[arg(long)]
        masked: bool,
        /// Write a loss trace next to each fused image.
        #[arg(long)]
        trace: bool,
        #[command(flatten)]
        shared: SharedFlags,
    },
    /// Score an externally fused image against its sources.
    Metrics {
        fused: PathBuf,
        ir: PathBuf,
        vi: PathBuf,
        /// Also write the table to this file.
        #[arg(long)]
        output: Option<PathBuf>,
        #[command(flatten)]
        shared: SharedFlags,
    },
}

impl Command {
    fn shared(&self) -> &SharedFlags {
        match self {
            Command::Fuse { shared, .. }
            | Command::Ref { shared, .. }
            | Command::Mask { shared, .. }
            | Command::Bench { shared, .. }
            | Command::Metrics { shared, .. } => shared,
        }
    }
}

/// Executes a parsed command line; returns text destined for stdout.
pub fn run(cli: &Cli) -> CliResult<String> {
    let cfg = RunConfig::resolve(cli.command.shared())?;
    match &cli.command {
        Command::Fuse {
            ir,
            vi,
            out,
            objective,
            trace,
            metrics,
            ..
        } => {
            let args = commands::FuseArgs {
                ir,
                vi,
                out,
                objective,
                trace: trace.as_deref(),
                metrics: metrics.as_deref(),
            };
            commands::fuse(args, &cfg)?;
            Ok(String::new())
        }
        Command::Ref { ir, vi, out_dir, .. } => {
            commands::reference(ir, vi, out_dir, &cfg)?;
            Ok(String::new())
        }
        Command::Mask { ir, vi, out_dir, .. } => {
            commands::mask(ir, vi, out_dir, &cfg)?;
            Ok(String::new())
        }
        Command::Bench {
            pairs_dir,
            out_dir,
            baselines,
            masked,
            trace,
            ..
        } => bench::bench(
            bench::BenchArgs {
                pairs_dir,
                out_dir,
                baselines: *baselines,
                masked: *masked,
                trace: *trace,
            },
            &cfg,
        ),
        Command::Metrics {
            fused, ir, vi, output, ..
        } => commands::metrics(fused, ir, vi, output.as_ref(), &cfg),
    }
}

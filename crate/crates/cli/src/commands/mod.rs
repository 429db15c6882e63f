//! Subcommand definitions and dispatch.

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use readmit_core::Result;

use crate::fileconfig::FileConfig;

pub mod audit;
pub mod chart;
pub mod common;
pub mod drift;
pub mod evaluate;
pub mod explain;
pub mod serve;
pub mod split;
pub mod synth;
pub mod train;

#[derive(Debug, Parser)]
#[command(
    name = "readmit",
    version,
    about = "Hospital readmission risk engine: synthesize, train, explain, audit, monitor, serve."
)]
pub struct Cli {
    /// key=value file supplying defaults for any subcommand flag.
    /// Precedence: CLI flag, then config file, then built-in default.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic cohort CSV.
    Synth(synth::SynthArgs),
    /// Partition a cohort chronologically into train/validation/test.
    Split(split::SplitArgs),
    /// Fit a scorer and imputation on a training split.
    Train(train::TrainArgs),
    /// Score a split and export the full metric report.
    Evaluate(evaluate::EvaluateArgs),
    /// Export Shapley attributions for a split.
    Explain(explain::ExplainArgs),
    /// Audit subgroup fairness at an operating threshold.
    Audit(audit::AuditArgs),
    /// Fit a drift reference and check a current batch against it.
    Drift(drift::DriftArgs),
    /// Run the HTTP scoring service.
    Serve(serve::ServeArgs),
    /// Render an exported table as a standalone SVG.
    Chart(chart::ChartArgs),
}

pub fn run(cli: Cli) -> Result<()> {
    let file = FileConfig::load(cli.config.as_deref())?;
    match cli.command {
        Command::Synth(args) => synth::run(args, &file),
        Command::Split(args) => split::run(args, &file),
        Command::Train(args) => train::run(args, &file),
        Command::Evaluate(args) => evaluate::run(args, &file),
        Command::Explain(args) => explain::run(args, &file),
        Command::Audit(args) => audit::run(args, &file),
        Command::Drift(args) => drift::run(args, &file),
        Command::Serve(args) => serve::run(args, &file),
        Command::Chart(args) => chart::run(args, &file),
    }
}

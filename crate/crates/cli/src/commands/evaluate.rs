//! `readmit evaluate`: full metric report for a model on one split.

use std::path::PathBuf;

use clap::Args;

use readmit_core::eval::{
    evaluate, pr_curve, roc_curve, BootstrapConfig, ThresholdSpec,
};
use readmit_core::{Error, Result};

use crate::commands::common::{
    calibration_csv, ensure_dir, prc_csv, read_cohort, roc_csv, sweep_csv, to_pretty_json,
    write_text, Scorer, Stage,
};
use crate::fileconfig::{resolve, FileConfig};
use crate::manifest::{dir_manifest_path, ManifestBuilder};

pub const DEFAULT_THRESHOLD: f64 = 0.2285;

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long, value_name = "PATH")]
    pub model: PathBuf,
    #[arg(long, value_name = "PATH")]
    pub imputation: PathBuf,
    /// Cohort CSV to score (typically the test split).
    #[arg(long, value_name = "PATH")]
    pub data: PathBuf,
    /// Fixed operating threshold.
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Pick the threshold by Youden's J on this cohort CSV instead.
    #[arg(long, value_name = "PATH")]
    pub youden_from: Option<PathBuf>,
    #[arg(long)]
    pub bootstrap_iterations: Option<usize>,
    #[arg(long)]
    pub bootstrap_seed: Option<u64>,
    /// Two-sided confidence level.
    #[arg(long)]
    pub bootstrap_level: Option<f64>,
    #[arg(long, value_name = "DIR")]
    pub out_dir: PathBuf,
}

pub fn run(args: EvaluateArgs, file: &FileConfig) -> Result<()> {
    if args.threshold.is_some() && args.youden_from.is_some() {
        return Err(Error::invalid_input(
            "--threshold and --youden-from are mutually exclusive",
        ));
    }

    let mut stage = Stage::start();
    let mut manifest = ManifestBuilder::new("evaluate");
    manifest.input(&args.model)?.input(&args.imputation)?.input(&args.data)?;

    let scorer = Scorer::load(&args.model, &args.imputation)?;
    let scored = scorer.scored_set(&read_cohort(&args.data)?)?;
    let score_ms = stage.lap();

    let threshold = match &args.youden_from {
        Some(path) => {
            manifest.input(path)?;
            let validation = scorer.scored_set(&read_cohort(path)?)?;
            ThresholdSpec::youden_from(&validation, path.display().to_string())?
        }
        None => ThresholdSpec::Fixed {
            value: resolve(args.threshold, file, "threshold", DEFAULT_THRESHOLD)?,
        },
    };

    let defaults = BootstrapConfig::default();
    let bootstrap = BootstrapConfig {
        iterations: resolve(
            args.bootstrap_iterations,
            file,
            "bootstrap_iterations",
            defaults.iterations,
        )?,
        seed: resolve(args.bootstrap_seed, file, "bootstrap_seed", defaults.seed)?,
        level: resolve(args.bootstrap_level, file, "bootstrap_level", defaults.level)?,
    };
    let report = evaluate(&scored, threshold.clone(), &bootstrap)?;
    let evaluate_ms = stage.lap();

    ensure_dir(&args.out_dir)?;
    let artifacts = [
        ("evaluation.json", to_pretty_json(&report)?),
        ("roc.csv", roc_csv(&roc_curve(&scored)?)),
        ("prc.csv", prc_csv(&pr_curve(&scored)?)),
        ("calibration.csv", calibration_csv(&report.calibration)),
        ("sweep.csv", sweep_csv(&report.sweep)),
    ];
    for (name, text) in &artifacts {
        let path = args.out_dir.join(name);
        write_text(&path, text)?;
        manifest.output(&path)?;
    }

    manifest
        .setting("threshold", threshold.value())
        .setting("bootstrap_iterations", bootstrap.iterations)
        .setting("bootstrap_level", bootstrap.level)
        .seed("bootstrap", bootstrap.seed)
        .timing_ms("score", score_ms)
        .timing_ms("evaluate", evaluate_ms);
    manifest.finish(&dir_manifest_path(&args.out_dir, "evaluate"))?;
    println!(
        "auc_roc {:.4} [{:.4}, {:.4}] on {} records",
        report.auc_roc.value, report.auc_roc.ci_low, report.auc_roc.ci_high, report.n
    );
    Ok(())
}

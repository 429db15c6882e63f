//! `readmit drift`: fit a drift reference from train/validation splits and
//! check a current batch against it.

use std::path::PathBuf;

use clap::Args;

use readmit_core::drift::{drift_verdict, fit_reference, RollingWindow, DEFAULT_WINDOW};
use readmit_core::Result;

use crate::commands::common::{ensure_dir, read_cohort, to_pretty_json, write_text, Scorer, Stage};
use crate::fileconfig::{resolve, FileConfig};
use crate::manifest::{dir_manifest_path, ManifestBuilder};

#[derive(Debug, Args)]
pub struct DriftArgs {
    #[arg(long, value_name = "PATH")]
    pub model: PathBuf,
    #[arg(long, value_name = "PATH")]
    pub imputation: PathBuf,
    /// Training split; its imputed features define the reference bins.
    #[arg(long, value_name = "PATH")]
    pub train: PathBuf,
    /// Validation split; its predictions define the reference moments.
    #[arg(long, value_name = "PATH")]
    pub validation: PathBuf,
    /// Batch to test for drift.
    #[arg(long, value_name = "PATH")]
    pub current: PathBuf,
    /// Rolling-window capacity for the prediction-mean rule.
    #[arg(long)]
    pub window: Option<usize>,
    #[arg(long, value_name = "DIR")]
    pub out_dir: PathBuf,
}

pub fn run(args: DriftArgs, file: &FileConfig) -> Result<()> {
    let mut stage = Stage::start();
    let mut manifest = ManifestBuilder::new("drift");
    manifest
        .input(&args.model)?
        .input(&args.imputation)?
        .input(&args.train)?
        .input(&args.validation)?
        .input(&args.current)?;

    let scorer = Scorer::load(&args.model, &args.imputation)?;
    let window_size = resolve(args.window, file, "window", DEFAULT_WINDOW)?;

    let train_features = scorer.features(&read_cohort(&args.train)?)?;
    let val_predictions = scorer.probabilities(&scorer.features(&read_cohort(&args.validation)?)?);
    let reference = fit_reference(&train_features, &val_predictions, window_size)?;
    let fit_ms = stage.lap();

    let current_features = scorer.features(&read_cohort(&args.current)?)?;
    // The window sees the newest W current-batch predictions, mirroring
    // what a server would hold after serving that batch.
    let mut window = RollingWindow::new(window_size)?;
    for p in scorer.probabilities(&current_features) {
        window.push(p)?;
    }
    let verdict = drift_verdict(&reference, &current_features, &window)?;
    let check_ms = stage.lap();

    ensure_dir(&args.out_dir)?;
    let reference_path = args.out_dir.join("drift_reference.json");
    write_text(&reference_path, &reference.to_json()?)?;
    manifest.output(&reference_path)?;
    let report_path = args.out_dir.join("drift_report.json");
    write_text(&report_path, &to_pretty_json(&verdict)?)?;
    manifest.output(&report_path)?;

    manifest
        .setting("window", window_size)
        .timing_ms("fit_reference", fit_ms)
        .timing_ms("check", check_ms);
    manifest.finish(&dir_manifest_path(&args.out_dir, "drift"))?;

    let alerting: Vec<&str> = verdict
        .features
        .iter()
        .filter(|f| f.alert)
        .map(|f| f.feature.as_str())
        .collect();
    if verdict.any_alert() {
        println!(
            "drift detected: {} feature alert(s){}{}",
            alerting.len(),
            if alerting.is_empty() { "" } else { ": " },
            alerting.join(", ")
        );
        if verdict.prediction_alert {
            println!("prediction-mean alert: deviation exceeds the 2-sigma gate");
        }
    } else {
        println!("no drift detected");
    }
    Ok(())
}

//! `readmit explain`: per-patient Shapley attributions and their
//! population aggregates.
//!
//! Attributions are computed on the imputed vectors the model actually
//! scored; the CSV/waterfall `value` columns show the raw recorded values,
//! with imputed cells rendered as missing.

use std::path::PathBuf;

use clap::Args;

use readmit_core::explain::{
    beeswarm_csv, global_importance, linear_shap, waterfall_report, ShapExplanation,
    TreeShapExplainer,
};
use readmit_core::model::Model;
use readmit_core::{Error, Result};

use crate::commands::common::{
    ensure_dir, importance_csv, read_cohort, to_pretty_json, write_text, Scorer, Stage,
};
use crate::fileconfig::{resolve, FileConfig};
use crate::manifest::{dir_manifest_path, ManifestBuilder};

#[derive(Debug, Args)]
pub struct ExplainArgs {
    #[arg(long, value_name = "PATH")]
    pub model: PathBuf,
    #[arg(long, value_name = "PATH")]
    pub imputation: PathBuf,
    /// Cohort CSV to explain.
    #[arg(long, value_name = "PATH")]
    pub data: PathBuf,
    /// Contributions listed per waterfall.
    #[arg(long)]
    pub k: Option<usize>,
    /// Admission id for a per-patient waterfall report; repeatable.
    #[arg(long = "id", value_name = "ADMISSION_ID")]
    pub ids: Vec<u64>,
    /// Explain only the first N records.
    #[arg(long)]
    pub limit: Option<usize>,
    #[arg(long, value_name = "DIR")]
    pub out_dir: PathBuf,
}

#[derive(serde::Serialize)]
struct ExplainSummary {
    n: usize,
    k: usize,
    model_kind: &'static str,
    base_value: f64,
    /// Largest |base + sum(phi) - margin| across the cohort.
    max_local_accuracy_gap: f64,
}

fn explain_all(model: &Model, features: &[readmit_core::cohort::FeatureVector]) -> Result<Vec<ShapExplanation>> {
    match model {
        Model::Gbdt { ensemble, .. } => {
            let explainer = TreeShapExplainer::new(ensemble)?;
            Ok(explainer.explain_batch(features))
        }
        Model::Linear { weights, intercept, standardizer } => features
            .iter()
            .map(|x| linear_shap(weights, *intercept, standardizer, x))
            .collect(),
    }
}

pub fn run(args: ExplainArgs, file: &FileConfig) -> Result<()> {
    let mut stage = Stage::start();
    let mut manifest = ManifestBuilder::new("explain");
    manifest.input(&args.model)?.input(&args.imputation)?.input(&args.data)?;

    let scorer = Scorer::load(&args.model, &args.imputation)?;
    let mut cohort = read_cohort(&args.data)?;
    if let Some(limit) = args.limit {
        if limit == 0 {
            return Err(Error::invalid_input("--limit must be >= 1"));
        }
        cohort.records.truncate(limit);
    }
    let features = scorer.features(&cohort)?;
    let raw = scorer.raw_features(&cohort)?;
    let ids: Vec<u64> = cohort.records.iter().map(|r| r.admission_id).collect();

    let explanations = explain_all(&scorer.model, &features)?;
    let explain_ms = stage.lap();

    let k = resolve(args.k, file, "k", 10)?;
    ensure_dir(&args.out_dir)?;

    let importance = global_importance(&explanations, &raw)?;
    let importance_path = args.out_dir.join("importance.csv");
    write_text(&importance_path, &importance_csv(&importance))?;
    manifest.output(&importance_path)?;

    let beeswarm_path = args.out_dir.join("beeswarm.csv");
    write_text(&beeswarm_path, &beeswarm_csv(&ids, &explanations, &raw)?)?;
    manifest.output(&beeswarm_path)?;

    for id in &args.ids {
        let row = ids.iter().position(|x| x == id).ok_or_else(|| {
            Error::invalid_input(format!("admission id {id} not present in {}", args.data.display()))
        })?;
        let waterfall = waterfall_report(&explanations[row], &raw[row], k);
        let path = args.out_dir.join(format!("waterfall_{id}.json"));
        write_text(&path, &to_pretty_json(&waterfall)?)?;
        manifest.output(&path)?;
    }

    let max_gap = explanations
        .iter()
        .map(|e| e.local_accuracy_gap())
        .fold(0.0_f64, f64::max);
    let summary = ExplainSummary {
        n: explanations.len(),
        k,
        model_kind: scorer.model.kind(),
        base_value: explanations.first().map(|e| e.base_value).unwrap_or(0.0),
        max_local_accuracy_gap: max_gap,
    };
    let summary_path = args.out_dir.join("explain_summary.json");
    write_text(&summary_path, &to_pretty_json(&summary)?)?;
    manifest.output(&summary_path)?;

    manifest
        .setting("k", k)
        .setting("n", explanations.len())
        .timing_ms("explain", explain_ms);
    manifest.finish(&dir_manifest_path(&args.out_dir, "explain"))?;
    println!(
        "explained {} records, max local accuracy gap {:.3e}",
        explanations.len(),
        max_gap
    );
    Ok(())
}

//! `readmit train`: fit a scorer and its imputation on a training split.
//!
//! The imputation is fitted here and saved beside the model; every
//! downstream command (and the server) reuses those medians verbatim
//! instead of refitting on whatever data it happens to score.

use std::path::PathBuf;

use clap::{Args, ValueEnum};

use readmit_core::cohort::io::save_imputation;
use readmit_core::cohort::fit_imputation;
use readmit_core::model::{
    save_model, train_gbdt, train_logistic, GbdtConfig, Growth, LogisticConfig, Model,
};
use readmit_core::Result;

use crate::commands::common::{ensure_dir, read_cohort, Stage};
use crate::fileconfig::{resolve, FileConfig};
use crate::manifest::{dir_manifest_path, ManifestBuilder};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelKind {
    /// Gradient-boosted trees, depth-wise growth.
    GbdtDepth,
    /// Gradient-boosted trees, leaf-wise (best-first) growth.
    GbdtLeaf,
    /// L2-regularized logistic regression on standardized features.
    Logistic,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Training-split cohort CSV.
    #[arg(long, value_name = "PATH")]
    pub train: PathBuf,
    #[arg(long, value_enum, default_value = "gbdt-depth")]
    pub model: ModelKind,
    /// Boosting rounds.
    #[arg(long)]
    pub n_estimators: Option<usize>,
    /// Shrinkage per round.
    #[arg(long)]
    pub learning_rate: Option<f64>,
    /// Maximum tree depth (both growth modes).
    #[arg(long)]
    pub max_depth: Option<usize>,
    /// Leaf budget for leaf-wise growth.
    #[arg(long)]
    pub num_leaves: Option<usize>,
    /// L2 penalty on leaf weights.
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Minimum hessian mass per child.
    #[arg(long)]
    pub min_child_weight: Option<f64>,
    /// Positive-class weight; defaults to #negatives / #positives.
    #[arg(long)]
    pub scale_pos_weight: Option<f64>,
    /// Inverse regularization strength (logistic only).
    #[arg(long)]
    pub c: Option<f64>,
    /// Gradient max-norm convergence threshold (logistic only).
    #[arg(long)]
    pub tol: Option<f64>,
    /// Optimizer iteration cap (logistic only).
    #[arg(long)]
    pub max_iter: Option<usize>,
    /// Directory receiving model.json and imputation.json.
    #[arg(long, value_name = "DIR")]
    pub out_dir: PathBuf,
}

pub fn run(args: TrainArgs, file: &FileConfig) -> Result<()> {
    let mut stage = Stage::start();
    let mut manifest = ManifestBuilder::new("train");
    manifest.input(&args.train)?;

    let cohort = read_cohort(&args.train)?;
    let imputation = fit_imputation(&cohort)?;
    let mut features = cohort.encode()?;
    imputation.apply_vectors(&mut features);
    let labels = cohort.labels()?;
    let prepare_ms = stage.lap();

    let model = match args.model {
        ModelKind::GbdtDepth | ModelKind::GbdtLeaf => {
            let defaults = GbdtConfig::default();
            let growth = match args.model {
                ModelKind::GbdtLeaf => Growth::LeafWise {
                    num_leaves: resolve(args.num_leaves, file, "num_leaves", 31)?,
                },
                _ => Growth::DepthWise,
            };
            let config = GbdtConfig {
                n_estimators: resolve(args.n_estimators, file, "n_estimators", defaults.n_estimators)?,
                learning_rate: resolve(args.learning_rate, file, "learning_rate", defaults.learning_rate)?,
                max_depth: resolve(args.max_depth, file, "max_depth", defaults.max_depth)?,
                growth,
                lambda: resolve(args.lambda, file, "lambda", defaults.lambda)?,
                min_child_weight: resolve(
                    args.min_child_weight,
                    file,
                    "min_child_weight",
                    defaults.min_child_weight,
                )?,
                scale_pos_weight: args.scale_pos_weight,
            };
            manifest
                .setting("model", if args.model == ModelKind::GbdtLeaf { "gbdt-leaf" } else { "gbdt-depth" })
                .setting("n_estimators", config.n_estimators)
                .setting("learning_rate", config.learning_rate)
                .setting("max_depth", config.max_depth)
                .setting("lambda", config.lambda)
                .setting("min_child_weight", config.min_child_weight);
            if let Growth::LeafWise { num_leaves } = config.growth {
                manifest.setting("num_leaves", num_leaves);
            }
            if let Some(w) = config.scale_pos_weight {
                manifest.setting("scale_pos_weight", w);
            }
            let ensemble = train_gbdt(&features, &labels, &config)?;
            Model::from_gbdt(ensemble, &config)
        }
        ModelKind::Logistic => {
            let defaults = LogisticConfig::default();
            let config = LogisticConfig {
                c: resolve(args.c, file, "c", defaults.c)?,
                tol: resolve(args.tol, file, "tol", defaults.tol)?,
                max_iter: resolve(args.max_iter, file, "max_iter", defaults.max_iter)?,
            };
            manifest
                .setting("model", "logistic")
                .setting("c", config.c)
                .setting("tol", config.tol)
                .setting("max_iter", config.max_iter);
            let fitted = train_logistic(&features, &labels, &config)?;
            manifest
                .setting("iterations", fitted.iterations)
                .setting("converged", fitted.converged);
            Model::from_logistic(fitted)
        }
    };
    let train_ms = stage.lap();

    ensure_dir(&args.out_dir)?;
    let model_path = args.out_dir.join("model.json");
    let imputation_path = args.out_dir.join("imputation.json");
    save_model(&model, &model_path)?;
    save_imputation(&imputation, &imputation_path)?;

    manifest
        .setting("train_n", cohort.len())
        .timing_ms("prepare", prepare_ms)
        .timing_ms("train", train_ms);
    manifest.output(&model_path)?.output(&imputation_path)?;
    manifest.finish(&dir_manifest_path(&args.out_dir, "train"))?;
    println!("trained {} model on {} records", model.kind(), cohort.len());
    Ok(())
}

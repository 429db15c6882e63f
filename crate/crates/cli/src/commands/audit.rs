//! `readmit audit`: demographic fairness audit, with optional
//! equalized-odds post-processing for the dimensions that fail it.

use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::{Args, ValueEnum};

use readmit_core::cohort::{Dimension, SubgroupKey};
use readmit_core::fairness::{
    audit_fairness, fit_equalized_odds, slice_subgroups, AuditConfig, PolicyMode, Verdict,
};
use readmit_core::Result;

use crate::commands::common::{ensure_dir, read_cohort, write_text, Scorer, Stage};
use crate::commands::evaluate::DEFAULT_THRESHOLD;
use crate::fileconfig::{resolve, FileConfig};
use crate::manifest::{dir_manifest_path, ManifestBuilder};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    /// Exact equalization via randomized threshold rules.
    Randomized,
    /// Nearest observed operating point; approximate but reproducible
    /// per decision.
    Deterministic,
}

#[derive(Debug, Args)]
pub struct AuditArgs {
    #[arg(long, value_name = "PATH")]
    pub model: PathBuf,
    #[arg(long, value_name = "PATH")]
    pub imputation: PathBuf,
    /// Cohort CSV to audit.
    #[arg(long, value_name = "PATH")]
    pub data: PathBuf,
    /// Operating threshold the audit classifies at.
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Groups smaller than this are excluded (with a warning).
    #[arg(long)]
    pub min_group_size: Option<usize>,
    /// Maximum tolerated AUC gap per dimension.
    #[arg(long)]
    pub auc_gate: Option<f64>,
    /// Maximum tolerated FNR gap per dimension.
    #[arg(long)]
    pub fnr_gate: Option<f64>,
    /// Fit equalized-odds policies for the dimensions that fail.
    #[arg(long)]
    pub fit_postprocess: bool,
    #[arg(long, value_enum, default_value = "randomized")]
    pub mode: Mode,
    #[arg(long, value_name = "DIR")]
    pub out_dir: PathBuf,
}

pub fn run(args: AuditArgs, file: &FileConfig) -> Result<()> {
    let mut stage = Stage::start();
    let mut manifest = ManifestBuilder::new("audit");
    manifest.input(&args.model)?.input(&args.imputation)?.input(&args.data)?;

    let scorer = Scorer::load(&args.model, &args.imputation)?;
    let cohort = read_cohort(&args.data)?;
    let scored = scorer.scored_set(&cohort)?;
    let groups = slice_subgroups(&cohort)?;
    let score_ms = stage.lap();

    let defaults = AuditConfig::default();
    let threshold = resolve(args.threshold, file, "threshold", DEFAULT_THRESHOLD)?;
    let config = AuditConfig {
        min_group_size: resolve(args.min_group_size, file, "min_group_size", defaults.min_group_size)?,
        auc_gate: resolve(args.auc_gate, file, "auc_gate", defaults.auc_gate)?,
        fnr_gate: resolve(args.fnr_gate, file, "fnr_gate", defaults.fnr_gate)?,
    };
    let audit = audit_fairness(&scored, &groups, threshold, config)?;
    let audit_ms = stage.lap();

    ensure_dir(&args.out_dir)?;
    let json_path = args.out_dir.join("fairness_audit.json");
    write_text(&json_path, &audit.to_json()?)?;
    manifest.output(&json_path)?;
    let csv_path = args.out_dir.join("fairness_audit.csv");
    write_text(&csv_path, &audit.to_csv())?;
    manifest.output(&csv_path)?;

    let mut fitted: Vec<Dimension> = Vec::new();
    if args.fit_postprocess && audit.verdict == Verdict::TriggerPostprocess {
        let mode = match args.mode {
            Mode::Randomized => PolicyMode::Randomized,
            Mode::Deterministic => PolicyMode::DeterministicNearest,
        };
        for dim_audit in &audit.dimensions {
            if dim_audit.within_gates != Some(false) {
                continue;
            }
            let dim_groups: BTreeMap<SubgroupKey, Vec<usize>> = groups
                .iter()
                .filter(|(k, _)| k.dimension() == dim_audit.dimension)
                .map(|(k, v)| (*k, v.clone()))
                .collect();
            let policy = fit_equalized_odds(&scored, &dim_groups, mode)?;
            let path = args
                .out_dir
                .join(format!("equalized_odds_{}.json", dim_audit.dimension.as_str()));
            write_text(&path, &policy.to_json()?)?;
            manifest.output(&path)?;
            fitted.push(dim_audit.dimension);
        }
    }

    let verdict = match audit.verdict {
        Verdict::Pass => "pass",
        Verdict::TriggerPostprocess => "trigger_postprocess",
    };
    manifest
        .setting("threshold", threshold)
        .setting("min_group_size", config.min_group_size)
        .setting("auc_gate", config.auc_gate)
        .setting("fnr_gate", config.fnr_gate)
        .setting("fit_postprocess", args.fit_postprocess)
        .setting("verdict", verdict)
        .timing_ms("score", score_ms)
        .timing_ms("audit", audit_ms);
    manifest.finish(&dir_manifest_path(&args.out_dir, "audit"))?;

    if fitted.is_empty() {
        println!("fairness verdict: {verdict}");
    } else {
        let dims: Vec<&str> = fitted.iter().map(|d| d.as_str()).collect();
        println!("fairness verdict: {verdict}; fitted equalized odds for {}", dims.join(", "));
    }
    Ok(())
}

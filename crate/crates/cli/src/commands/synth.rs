//! `readmit synth`: generate a synthetic cohort CSV.

use std::path::PathBuf;

use clap::Args;

use readmit_core::cohort::io::save_cohort_csv;
use readmit_core::cohort::{
    generate_cohort, BiasKnob, GeneratorConfig, SubgroupKey, TemporalDrift,
};
use readmit_core::{Error, Result};

use crate::commands::common::{ensure_dir, Stage};
use crate::fileconfig::{resolve, FileConfig};
use crate::manifest::{file_manifest_path, ManifestBuilder};

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Number of admissions to generate.
    #[arg(long)]
    pub n: Option<usize>,
    /// Generator seed; same seed, same cohort, byte for byte.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Target positive-label fraction.
    #[arg(long)]
    pub prevalence: Option<f64>,
    /// Per-field missingness probability for the imputable numerics.
    #[arg(long)]
    pub missing_rate: Option<f64>,
    /// Standard deviation of unobserved per-record score noise.
    #[arg(long)]
    pub noise_sd: Option<f64>,
    /// Subgroup whose noise is amplified, as DIMENSION=GROUP (e.g. race=black).
    #[arg(long, value_name = "DIM=GROUP")]
    pub bias_group: Option<String>,
    /// Noise multiplier for the biased subgroup.
    #[arg(long)]
    pub bias_multiplier: Option<f64>,
    /// Canonical feature slot shifted after drift onset.
    #[arg(long)]
    pub drift_slot: Option<usize>,
    /// Additive shift applied to the drifting slot.
    #[arg(long)]
    pub drift_shift: Option<f64>,
    /// Fraction of the timeline before drift onset.
    #[arg(long)]
    pub drift_onset: Option<f64>,
    /// Cohort CSV to write; the manifest lands next to it.
    #[arg(long, value_name = "PATH")]
    pub out: PathBuf,
}

/// Parses DIMENSION=GROUP against the 16 canonical subgroups.
fn parse_subgroup(text: &str) -> Result<SubgroupKey> {
    let (dim, group) = text.split_once('=').ok_or_else(|| {
        Error::invalid_input(format!("bias group must be DIMENSION=GROUP, got {text:?}"))
    })?;
    SubgroupKey::all()
        .into_iter()
        .find(|k| k.dimension().as_str() == dim && k.label() == group)
        .ok_or_else(|| {
            let known: Vec<String> = SubgroupKey::all()
                .iter()
                .map(|k| format!("{}={}", k.dimension().as_str(), k.label()))
                .collect();
            Error::invalid_input(format!(
                "unknown subgroup {text:?}; expected one of {}",
                known.join(", ")
            ))
        })
}

pub fn run(args: SynthArgs, file: &FileConfig) -> Result<()> {
    let mut stage = Stage::start();
    let defaults = GeneratorConfig::default();
    let mut config = GeneratorConfig {
        n: resolve(args.n, file, "n", defaults.n)?,
        seed: resolve(args.seed, file, "seed", defaults.seed)?,
        target_prevalence: resolve(args.prevalence, file, "prevalence", defaults.target_prevalence)?,
        missing_rate: resolve(args.missing_rate, file, "missing_rate", defaults.missing_rate)?,
        noise_sd: resolve(args.noise_sd, file, "noise_sd", defaults.noise_sd)?,
        ..defaults
    };

    let bias_group = match args.bias_group {
        Some(text) => Some(text),
        None => file.get::<String>("bias_group")?,
    };
    let bias_multiplier = resolve(args.bias_multiplier, file, "bias_multiplier", 2.0)?;
    if let Some(text) = &bias_group {
        config.bias_knob = Some(BiasKnob {
            group: parse_subgroup(text)?,
            multiplier: bias_multiplier,
        });
    } else if args.bias_multiplier.is_some() {
        return Err(Error::invalid_input("--bias-multiplier requires --bias-group"));
    }

    let drift_slot = match args.drift_slot {
        Some(slot) => Some(slot),
        None => file.get::<usize>("drift_slot")?,
    };
    if let Some(slot) = drift_slot {
        config.temporal_drift = Some(TemporalDrift {
            slot,
            shift: resolve(args.drift_shift, file, "drift_shift", 1.0)?,
            onset_fraction: resolve(args.drift_onset, file, "drift_onset", 0.5)?,
        });
    } else if args.drift_shift.is_some() || args.drift_onset.is_some() {
        return Err(Error::invalid_input("--drift-shift/--drift-onset require --drift-slot"));
    }

    let cohort = generate_cohort(&config)?;
    let generate_ms = stage.lap();
    if let Some(parent) = args.out.parent() {
        if !parent.as_os_str().is_empty() {
            ensure_dir(parent)?;
        }
    }
    save_cohort_csv(&cohort, &args.out)?;

    let mut manifest = ManifestBuilder::new("synth");
    manifest
        .setting("n", config.n)
        .setting("seed", config.seed)
        .setting("prevalence", config.target_prevalence)
        .setting("missing_rate", config.missing_rate)
        .setting("noise_sd", config.noise_sd)
        .seed("generator", config.seed)
        .timing_ms("generate", generate_ms);
    if let Some(knob) = &config.bias_knob {
        manifest
            .setting(
                "bias_group",
                format!("{}={}", knob.group.dimension().as_str(), knob.group.label()),
            )
            .setting("bias_multiplier", knob.multiplier);
    }
    if let Some(drift) = &config.temporal_drift {
        manifest
            .setting("drift_slot", drift.slot)
            .setting("drift_shift", drift.shift)
            .setting("drift_onset", drift.onset_fraction);
    }
    manifest.output(&args.out)?;
    manifest.finish(&file_manifest_path(&args.out))?;
    println!("wrote {} records to {}", cohort.len(), args.out.display());
    Ok(())
}

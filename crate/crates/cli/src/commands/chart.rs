//! `readmit chart`: render one exported table as a standalone SVG.

use std::path::PathBuf;

use clap::Args;

use readmit_core::Result;

use crate::charts::{render_chart, ChartKind};
use crate::commands::common::{ensure_dir, write_text};
use crate::commands::evaluate::DEFAULT_THRESHOLD;
use crate::fileconfig::{resolve, FileConfig};
use crate::manifest::{file_manifest_path, ManifestBuilder};

#[derive(Debug, Args)]
pub struct ChartArgs {
    #[arg(long, value_enum)]
    pub kind: ChartKind,
    /// Input table (the CSV exported by evaluate/explain/audit).
    #[arg(long, value_name = "PATH")]
    pub data: PathBuf,
    /// SVG file to write.
    #[arg(long, value_name = "PATH")]
    pub out: PathBuf,
    /// Threshold marker position (sweep chart only).
    #[arg(long)]
    pub threshold: Option<f64>,
}

pub fn run(args: ChartArgs, file: &FileConfig) -> Result<()> {
    let mut manifest = ManifestBuilder::new("chart");
    manifest.input(&args.data)?;

    let threshold = resolve(args.threshold, file, "threshold", DEFAULT_THRESHOLD)?;
    let table = std::fs::read_to_string(&args.data)?;
    let svg = render_chart(args.kind, &table, threshold)?;

    if let Some(parent) = args.out.parent() {
        if !parent.as_os_str().is_empty() {
            ensure_dir(parent)?;
        }
    }
    write_text(&args.out, &svg)?;
    manifest
        .setting("kind", args.kind.name())
        .setting("threshold", threshold)
        .output(&args.out)?;
    manifest.finish(&file_manifest_path(&args.out))?;
    println!("rendered {} chart to {}", args.kind.name(), args.out.display());
    Ok(())
}

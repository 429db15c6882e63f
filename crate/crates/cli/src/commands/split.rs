//! `readmit split`: chronological 70/15/15 partition of a cohort CSV.

use std::path::PathBuf;

use clap::Args;

use readmit_core::cohort::chronological_split;
use readmit_core::cohort::io::save_cohort_csv;
use readmit_core::Result;

use crate::commands::common::{ensure_dir, read_cohort, Stage};
use crate::fileconfig::FileConfig;
use crate::manifest::{dir_manifest_path, ManifestBuilder};

#[derive(Debug, Args)]
pub struct SplitArgs {
    /// Cohort CSV to partition.
    #[arg(long, value_name = "PATH")]
    pub cohort: PathBuf,
    /// Directory receiving train.csv, validation.csv, and test.csv.
    #[arg(long, value_name = "DIR")]
    pub out_dir: PathBuf,
}

pub fn run(args: SplitArgs, _file: &FileConfig) -> Result<()> {
    let mut stage = Stage::start();
    let mut manifest = ManifestBuilder::new("split");
    manifest.input(&args.cohort)?;

    let cohort = read_cohort(&args.cohort)?;
    let split = chronological_split(&cohort)?;
    let split_ms = stage.lap();

    ensure_dir(&args.out_dir)?;
    let parts = [
        ("train.csv", &split.train),
        ("validation.csv", &split.validation),
        ("test.csv", &split.test),
    ];
    for (name, part) in parts {
        let path = args.out_dir.join(name);
        save_cohort_csv(part, &path)?;
        manifest.output(&path)?;
    }

    let (train_n, val_n, test_n) = split.sizes();
    manifest
        .setting("train_n", train_n)
        .setting("validation_n", val_n)
        .setting("test_n", test_n)
        .timing_ms("split", split_ms);
    manifest.finish(&dir_manifest_path(&args.out_dir, "split"))?;
    println!("split {} records into {train_n}/{val_n}/{test_n}", cohort.len());
    Ok(())
}

//! `readmit serve`: run the HTTP scoring service.
//!
//! Settings layer in increasing precedence: server config file, CLI flags,
//! then READMIT_* environment variables (the deployment override of last
//! resort, applied inside `ServeConfig::apply_env`).

use std::path::PathBuf;

use clap::Args;

use readmit_core::{Error, Result};
use readmit_serve::ServeConfig;

use crate::fileconfig::FileConfig;

#[derive(Debug, Args)]
pub struct ServeArgs {
    /// key=value server config file (model_path, imputation_path, ...).
    #[arg(long, value_name = "PATH")]
    pub serve_config: Option<PathBuf>,
    #[arg(long, value_name = "PATH")]
    pub model: Option<PathBuf>,
    #[arg(long, value_name = "PATH")]
    pub imputation: Option<PathBuf>,
    #[arg(long, value_name = "PATH")]
    pub drift_reference: Option<PathBuf>,
    /// Risk-flag decision threshold.
    #[arg(long)]
    pub threshold: Option<f64>,
    #[arg(long)]
    pub port: Option<u16>,
    /// Contributions listed per explanation.
    #[arg(long)]
    pub explain_k: Option<usize>,
    /// Rolling-window capacity override for prediction drift.
    #[arg(long)]
    pub window: Option<usize>,
}

pub fn build_config(args: &ServeArgs) -> Result<ServeConfig> {
    let mut config = match &args.serve_config {
        Some(path) => ServeConfig::from_file(path)?,
        None => {
            let model = args.model.clone().ok_or_else(|| {
                Error::invalid_config("serve needs --model or --serve-config")
            })?;
            let imputation = args.imputation.clone().ok_or_else(|| {
                Error::invalid_config("serve needs --imputation or --serve-config")
            })?;
            ServeConfig::new(model, imputation)
        }
    };
    if args.serve_config.is_some() {
        if let Some(model) = &args.model {
            config.model_path = model.clone();
        }
        if let Some(imputation) = &args.imputation {
            config.imputation_path = imputation.clone();
        }
    }
    if let Some(reference) = &args.drift_reference {
        config.drift_reference_path = Some(reference.clone());
    }
    if let Some(threshold) = args.threshold {
        config.threshold = threshold;
    }
    if let Some(port) = args.port {
        config.port = port;
    }
    if let Some(k) = args.explain_k {
        config.explain_k = k;
    }
    if let Some(window) = args.window {
        config.window_size = Some(window);
    }
    config.apply_env()?;
    config.validate()?;
    Ok(config)
}

pub fn run(args: ServeArgs, _file: &FileConfig) -> Result<()> {
    let config = build_config(&args)?;
    println!("serving {} on 0.0.0.0:{}", config.model_path.display(), config.port);
    let runtime = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .map_err(|e| Error::invalid_config(format!("runtime start failed: {e}")))?;
    runtime.block_on(readmit_serve::serve(config))
}

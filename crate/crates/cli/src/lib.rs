//! Command-line interface for the readmission risk engine.
//!
//! Every artifact-producing subcommand writes a run manifest next to its
//! outputs: command, canonicalized settings with a digest, seeds, and
//! SHA-256 digests of every input and output. Manifests carry wall-clock
//! timings and are the one artifact class excluded from byte-identity
//! comparisons; everything they describe reproduces exactly.

pub mod charts;
pub mod commands;
pub mod fileconfig;
pub mod manifest;

pub use commands::{run, Cli};

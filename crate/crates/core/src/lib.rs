//! Core library for the readmission risk engine.
//!
//! Everything here is deterministic: given the same inputs and seeds, every
//! function produces byte-identical artifacts. That property is load-bearing
//! for reproducing published results and is enforced by tests, so treat any
//! source of nondeterminism (hash-map iteration order, platform float
//! formatting, thread scheduling) as a bug.

pub mod cohort;
pub mod drift;
pub mod error;
pub mod eval;
pub mod explain;
pub mod fairness;
pub mod model;
pub(crate) mod rng;

pub use error::{Error, Result};

/// Artifact schema tag shared by cohort CSVs and model JSON files.
pub const SCHEMA_VERSION: &str = "readmit-v1";

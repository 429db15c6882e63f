//! Per-patient Shapley attributions over the risk margin, plus population
//! aggregation and report exports.
//!
//! The production path is [`TreeShapExplainer`], an exact polynomial-time
//! algorithm over tree ensembles. [`brute_force_shap`] computes the same
//! quantity straight from the Shapley definition (exponential in the number
//! of used features) and exists to verify the fast path. Both attribute in
//! log-odds space: `base_value + sum(phi) = predict_margin(x)`.

mod oracle;
mod report;
mod tree_shap;

pub use oracle::{brute_force_shap, DEFAULT_SUBSET_LIMIT};
pub use report::{
    beeswarm_csv, beeswarm_export, global_importance, waterfall_report, Direction,
    FeatureImportance,
    GlobalImportance, WaterfallEntry, WaterfallReport,
};
pub use tree_shap::TreeShapExplainer;

use serde::{Deserialize, Serialize};

use crate::cohort::schema::FEATURE_COUNT;
use crate::cohort::FeatureVector;
use crate::error::{Error, Result};
use crate::model::{Standardizer, TreeEnsemble};

/// Exact per-feature attribution of one prediction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapExplanation {
    /// Expected margin over the training distribution (cover-weighted).
    pub base_value: f64,
    /// Per-feature contributions in log-odds units.
    pub phi: Vec<f64>,
    /// The explained prediction: base_value + sum(phi).
    pub margin: f64,
}

impl ShapExplanation {
    /// |base + sum(phi) - margin|; local accuracy bounds this by 1e-9.
    pub fn local_accuracy_gap(&self) -> f64 {
        let total: f64 = self.phi.iter().sum();
        (self.base_value + total - self.margin).abs()
    }
}

/// Attribution for the linear model. With z-scored features the margin is
/// already an exact sum of per-feature terms, so Shapley values collapse to
/// `phi_i = w_i * (x_i - mean_i) / sd_i` with the intercept as base. This is
/// the trivial fallback for linear scorers, not the tree algorithm.
pub fn linear_shap(
    weights: &[f64],
    intercept: f64,
    standardizer: &Standardizer,
    x: &FeatureVector,
) -> Result<ShapExplanation> {
    if weights.len() != FEATURE_COUNT {
        return Err(Error::invalid_model(format!(
            "expected {FEATURE_COUNT} weights, found {}",
            weights.len()
        )));
    }
    standardizer.validate()?;
    if x.0.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid_input(
            "linear attribution requires finite features (impute missing data first)",
        ));
    }
    let z = standardizer.transform(x);
    let phi: Vec<f64> = weights.iter().zip(&z).map(|(w, v)| w * v).collect();
    let margin = intercept + phi.iter().sum::<f64>();
    Ok(ShapExplanation { base_value: intercept, phi, margin })
}

/// Feature indices split on by at least one tree, ascending.
pub(crate) fn used_features(ensemble: &TreeEnsemble) -> Vec<usize> {
    let mut used = [false; FEATURE_COUNT];
    for tree in &ensemble.trees {
        for node in &tree.nodes {
            if let crate::model::Node::Internal { feature, .. } = node {
                used[*feature] = true;
            }
        }
    }
    (0..FEATURE_COUNT).filter(|i| used[*i]).collect()
}

//! Scoring models: boosted tree ensembles, a regularized logistic baseline,
//! and the versioned JSON artifact both are shipped in.

pub mod gbdt;
pub mod io;
pub mod logistic;
pub mod tree;

pub use gbdt::{sigmoid, train_gbdt, weighted_logloss, GbdtConfig, Growth};
pub use io::{load_model, model_from_json, model_to_json, save_model};
pub use logistic::{train_logistic, LogisticConfig, LogisticModel, Standardizer};
pub use tree::{Node, Tree, TreeEnsemble};

use crate::cohort::FeatureVector;
use crate::error::Result;

/// A deployable scorer: everything needed to turn a feature vector into a
/// risk margin, independent of how it was trained.
#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    Gbdt {
        ensemble: TreeEnsemble,
        /// Training shrinkage, kept for provenance; leaf values already
        /// include it and prediction never rescales.
        learning_rate: f64,
    },
    Linear {
        /// Weights in standardized feature space.
        weights: Vec<f64>,
        intercept: f64,
        standardizer: Standardizer,
    },
}

impl Model {
    pub fn from_gbdt(ensemble: TreeEnsemble, config: &GbdtConfig) -> Model {
        Model::Gbdt { ensemble, learning_rate: config.learning_rate }
    }

    pub fn from_logistic(model: LogisticModel) -> Model {
        Model::Linear {
            weights: model.weights,
            intercept: model.intercept,
            standardizer: model.standardizer,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Model::Gbdt { .. } => "gbdt",
            Model::Linear { .. } => "linear",
        }
    }

    /// Risk score in log-odds space.
    pub fn predict_margin(&self, x: &FeatureVector) -> f64 {
        match self {
            Model::Gbdt { ensemble, .. } => ensemble.predict_margin(x),
            Model::Linear { weights, intercept, standardizer } => {
                let z = standardizer.transform(x);
                let mut acc = *intercept;
                for (w, v) in weights.iter().zip(&z) {
                    acc += w * v;
                }
                acc
            }
        }
    }

    pub fn predict_proba(&self, x: &FeatureVector) -> f64 {
        sigmoid(self.predict_margin(x))
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Model::Gbdt { ensemble, learning_rate } => {
                if !(learning_rate.is_finite() && *learning_rate > 0.0) {
                    return Err(crate::error::Error::invalid_model(
                        "learning_rate must be positive and finite",
                    ));
                }
                ensemble.validate()
            }
            Model::Linear { weights, intercept, standardizer } => {
                use crate::cohort::schema::FEATURE_COUNT;
                if weights.len() != FEATURE_COUNT {
                    return Err(crate::error::Error::invalid_model(format!(
                        "expected {FEATURE_COUNT} weights, found {}",
                        weights.len()
                    )));
                }
                if weights.iter().any(|w| !w.is_finite()) || !intercept.is_finite() {
                    return Err(crate::error::Error::invalid_model(
                        "weights and intercept must be finite",
                    ));
                }
                standardizer.validate()
            }
        }
    }
}

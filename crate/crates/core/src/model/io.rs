//! Versioned JSON model artifacts.
//!
//! One document format covers both model kinds:
//!
//! ```json
//! {"model_version": "readmit-v1", "kind": "gbdt",
//!  "base_score": 0.0, "learning_rate": 0.05,
//!  "feature_names": ["age", ...],
//!  "trees": [{"feature": 5, "threshold": 1.5, "default_left": true,
//!             "cover": 812.5, "left": {"leaf_value": -0.04, "cover": 520.0},
//!             "right": {...}}]}
//! ```
//!
//! ```json
//! {"model_version": "readmit-v1", "kind": "linear",
//!  "feature_names": [...], "weights": [...], "intercept": -1.7,
//!  "standardization": {"means": [...], "sds": [...]}}
//! ```
//!
//! Trees are written as nested objects (children inline, not index-linked)
//! so the file stands alone. Loading is strict: the version must match,
//! every node needs a `cover` (explanations weight path expectations by it),
//! and `feature_names` must be the canonical 26-name schema in order, since
//! scoring is positional.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::cohort::schema::{FEATURE_COUNT, FEATURE_NAMES};
use crate::error::{Error, Result};
use crate::model::logistic::Standardizer;
use crate::model::tree::{Node, Tree, TreeEnsemble};
use crate::model::Model;

const MODEL_VERSION: &str = crate::SCHEMA_VERSION;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    model_version: String,
    kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    base_score: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    learning_rate: Option<f64>,
    feature_names: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    trees: Option<Vec<NestedNode>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    weights: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    intercept: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    standardization: Option<StandardizationFile>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StandardizationFile {
    means: Vec<f64>,
    sds: Vec<f64>,
}

/// One tree node in file form. Every field is optional at parse time so
/// malformed shapes produce domain errors instead of serde noise; `cover`
/// in particular gets a dedicated message because explanations require it.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NestedNode {
    #[serde(skip_serializing_if = "Option::is_none")]
    feature: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    threshold: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    default_left: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    cover: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    left: Option<Box<NestedNode>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    right: Option<Box<NestedNode>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    leaf_value: Option<f64>,
}

fn to_nested(tree: &Tree, index: usize) -> NestedNode {
    match &tree.nodes[index] {
        Node::Internal { feature, threshold, left, right, default_left, cover } => NestedNode {
            feature: Some(*feature),
            threshold: Some(*threshold),
            default_left: Some(*default_left),
            cover: Some(*cover),
            left: Some(Box::new(to_nested(tree, *left as usize))),
            right: Some(Box::new(to_nested(tree, *right as usize))),
            leaf_value: None,
        },
        Node::Leaf { value, cover } => NestedNode {
            feature: None,
            threshold: None,
            default_left: None,
            cover: Some(*cover),
            left: None,
            right: None,
            leaf_value: Some(*value),
        },
    }
}

/// Preorder-flattens a nested node into `nodes`, returning its arena index.
fn from_nested(node: &NestedNode, nodes: &mut Vec<Node>) -> Result<u32> {
    let cover = node
        .cover
        .ok_or_else(|| Error::invalid_model("node missing `cover` (explanations require it)"))?;
    let index = nodes.len() as u32;
    match (&node.left, &node.right, node.leaf_value) {
        (Some(left), Some(right), None) => {
            let (Some(feature), Some(threshold), Some(default_left)) =
                (node.feature, node.threshold, node.default_left)
            else {
                return Err(Error::invalid_model(
                    "internal node needs `feature`, `threshold`, and `default_left`",
                ));
            };
            // Reserve this slot, then fill children and patch the links.
            nodes.push(Node::Leaf { value: 0.0, cover });
            let left_index = from_nested(left, nodes)?;
            let right_index = from_nested(right, nodes)?;
            nodes[index as usize] = Node::Internal {
                feature,
                threshold,
                left: left_index,
                right: right_index,
                default_left,
                cover,
            };
        }
        (None, None, Some(value)) => {
            if node.feature.is_some() || node.threshold.is_some() || node.default_left.is_some() {
                return Err(Error::invalid_model("leaf node carries split fields"));
            }
            nodes.push(Node::Leaf { value, cover });
        }
        _ => {
            return Err(Error::invalid_model(
                "node must have either both children or a `leaf_value`",
            ));
        }
    }
    Ok(index)
}

fn to_file(model: &Model) -> Result<ModelFile> {
    model.validate()?;
    let feature_names = FEATURE_NAMES.iter().map(|n| n.to_string()).collect();
    Ok(match model {
        Model::Gbdt { ensemble, learning_rate } => ModelFile {
            model_version: MODEL_VERSION.to_string(),
            kind: "gbdt".to_string(),
            base_score: Some(ensemble.base_score),
            learning_rate: Some(*learning_rate),
            feature_names,
            trees: Some(ensemble.trees.iter().map(|t| to_nested(t, 0)).collect()),
            weights: None,
            intercept: None,
            standardization: None,
        },
        Model::Linear { weights, intercept, standardizer } => ModelFile {
            model_version: MODEL_VERSION.to_string(),
            kind: "linear".to_string(),
            base_score: None,
            learning_rate: None,
            feature_names,
            trees: None,
            weights: Some(weights.clone()),
            intercept: Some(*intercept),
            standardization: Some(StandardizationFile {
                means: standardizer.mean.clone(),
                sds: standardizer.sd.clone(),
            }),
        },
    })
}

fn from_file(file: ModelFile) -> Result<Model> {
    if file.model_version != MODEL_VERSION {
        return Err(Error::invalid_model(format!(
            "unsupported model_version {:?} (this build reads {MODEL_VERSION:?})",
            file.model_version
        )));
    }
    if file.feature_names.len() != FEATURE_COUNT {
        return Err(Error::invalid_model(format!(
            "feature_names must list {FEATURE_COUNT} features, found {}",
            file.feature_names.len()
        )));
    }
    if file.feature_names != FEATURE_NAMES {
        return Err(Error::invalid_model(
            "feature_names do not match the canonical schema (scoring is positional)",
        ));
    }
    let model = match file.kind.as_str() {
        "gbdt" => {
            let (Some(base_score), Some(learning_rate), Some(trees)) =
                (file.base_score, file.learning_rate, file.trees)
            else {
                return Err(Error::invalid_model(
                    "gbdt artifact needs `base_score`, `learning_rate`, and `trees`",
                ));
            };
            if file.weights.is_some() || file.intercept.is_some() || file.standardization.is_some()
            {
                return Err(Error::invalid_model("gbdt artifact carries linear-model fields"));
            }
            let trees = trees
                .iter()
                .map(|root| {
                    let mut nodes = Vec::new();
                    from_nested(root, &mut nodes)?;
                    Ok(Tree { nodes })
                })
                .collect::<Result<Vec<_>>>()?;
            let mut ensemble = TreeEnsemble::new(base_score, trees);
            ensemble.feature_names = file.feature_names;
            Model::Gbdt { ensemble, learning_rate }
        }
        "linear" => {
            let (Some(weights), Some(intercept), Some(standardization)) =
                (file.weights, file.intercept, file.standardization)
            else {
                return Err(Error::invalid_model(
                    "linear artifact needs `weights`, `intercept`, and `standardization`",
                ));
            };
            if file.base_score.is_some() || file.learning_rate.is_some() || file.trees.is_some() {
                return Err(Error::invalid_model("linear artifact carries gbdt fields"));
            }
            Model::Linear {
                weights,
                intercept,
                standardizer: Standardizer {
                    mean: standardization.means,
                    sd: standardization.sds,
                },
            }
        }
        other => {
            return Err(Error::invalid_model(format!(
                "unknown model kind {other:?} (expected \"gbdt\" or \"linear\")"
            )));
        }
    };
    model.validate()?;
    Ok(model)
}

/// Serializes a model to the artifact document (pretty-printed, trailing
/// newline; byte-stable for identical models).
pub fn model_to_json(model: &Model) -> Result<String> {
    let mut doc = serde_json::to_string_pretty(&to_file(model)?)?;
    doc.push('\n');
    Ok(doc)
}

pub fn model_from_json(json: &str) -> Result<Model> {
    let file: ModelFile = serde_json::from_str(json)?;
    from_file(file)
}

pub fn save_model(model: &Model, path: &Path) -> Result<()> {
    std::fs::write(path, model_to_json(model)?)?;
    Ok(())
}

pub fn load_model(path: &Path) -> Result<Model> {
    let json = std::fs::read_to_string(path)?;
    model_from_json(&json)
}

//! Decision-tree ensembles: arena representation, traversal, and the
//! permissive-then-validated JSON node encoding.

use serde::{Deserialize, Serialize};

use crate::cohort::schema::{FEATURE_COUNT, FEATURE_NAMES};
use crate::cohort::FeatureVector;
use crate::error::{Error, Result};

/// One tree node. Internal nodes route `x[feature] < threshold` to the left
/// child, everything else (including equality) right; a NaN feature follows
/// `default_left`. `cover` is the training-time sum of hessian weights that
/// reached the node and drives SHAP expectations, so it must be positive.
#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Internal {
        feature: usize,
        threshold: f64,
        left: u32,
        right: u32,
        default_left: bool,
        cover: f64,
    },
    Leaf {
        value: f64,
        cover: f64,
    },
}

impl Node {
    pub fn cover(&self) -> f64 {
        match self {
            Node::Internal { cover, .. } | Node::Leaf { cover, .. } => *cover,
        }
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self, Node::Leaf { .. })
    }
}

/// JSON shape for a node: every field optional so artifacts parse leniently,
/// then [`RawNode::into_node`] enforces that exactly the right fields are
/// present for each node kind.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RawNode {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub feature: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub left: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub right: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub default_left: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub leaf: Option<f64>,
    pub cover: f64,
}

impl RawNode {
    fn from_node(node: &Node) -> RawNode {
        match node {
            Node::Internal { feature, threshold, left, right, default_left, cover } => RawNode {
                feature: Some(*feature),
                threshold: Some(*threshold),
                left: Some(*left),
                right: Some(*right),
                default_left: Some(*default_left),
                leaf: None,
                cover: *cover,
            },
            Node::Leaf { value, cover } => RawNode {
                feature: None,
                threshold: None,
                left: None,
                right: None,
                default_left: None,
                leaf: Some(*value),
                cover: *cover,
            },
        }
    }

    fn into_node(self, index: usize) -> Result<Node> {
        let at = |msg: String| Error::invalid_model(format!("node {index}: {msg}"));
        match (self.feature, self.leaf) {
            (Some(feature), None) => {
                let threshold = self
                    .threshold
                    .ok_or_else(|| at("internal node missing threshold".into()))?;
                let left = self.left.ok_or_else(|| at("internal node missing left".into()))?;
                let right = self.right.ok_or_else(|| at("internal node missing right".into()))?;
                let default_left = self
                    .default_left
                    .ok_or_else(|| at("internal node missing default_left".into()))?;
                Ok(Node::Internal {
                    feature,
                    threshold,
                    left,
                    right,
                    default_left,
                    cover: self.cover,
                })
            }
            (None, Some(value)) => Ok(Node::Leaf { value, cover: self.cover }),
            (Some(_), Some(_)) => Err(at("node has both feature and leaf".into())),
            (None, None) => Err(at("node has neither feature nor leaf".into())),
        }
    }
}

/// One regression tree in arena form; the root is node 0.
#[derive(Debug, Clone, PartialEq)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Serialize for Tree {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let raw: Vec<RawNode> = self.nodes.iter().map(RawNode::from_node).collect();
        raw.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Tree {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = Vec::<RawNode>::deserialize(deserializer)?;
        let nodes = raw
            .into_iter()
            .enumerate()
            .map(|(i, r)| r.into_node(i))
            .collect::<Result<Vec<Node>>>()
            .map_err(serde::de::Error::custom)?;
        Ok(Tree { nodes })
    }
}

impl Tree {
    /// Walks to a leaf for `x` and returns its value.
    pub fn predict(&self, x: &FeatureVector) -> f64 {
        let mut i = 0usize;
        loop {
            match &self.nodes[i] {
                Node::Leaf { value, .. } => return *value,
                Node::Internal { feature, threshold, left, right, default_left, .. } => {
                    let v = x.0[*feature];
                    let go_left = if v.is_nan() { *default_left } else { v < *threshold };
                    i = if go_left { *left as usize } else { *right as usize };
                }
            }
        }
    }

    /// Longest root-to-leaf edge count.
    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], i: usize) -> usize {
            match &nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Internal { left, right, .. } => {
                    1 + walk(nodes, *left as usize).max(walk(nodes, *right as usize))
                }
            }
        }
        walk(&self.nodes, 0)
    }

    pub fn leaf_count(&self) -> usize {
        self.nodes.iter().filter(|n| n.is_leaf()).count()
    }

    /// Structural validation: a non-empty arena where every node is reached
    /// exactly once from the root, child indices are in range, features are
    /// in the schema, thresholds and leaf values are finite, and covers are
    /// positive.
    pub fn validate(&self) -> Result<()> {
        if self.nodes.is_empty() {
            return Err(Error::invalid_model("tree has no nodes"));
        }
        let n = self.nodes.len();
        let mut seen = vec![false; n];
        let mut stack = vec![0usize];
        let mut visited = 0usize;
        while let Some(i) = stack.pop() {
            if seen[i] {
                return Err(Error::invalid_model(format!(
                    "node {i} reachable twice (shared subtree or cycle)"
                )));
            }
            seen[i] = true;
            visited += 1;
            match &self.nodes[i] {
                Node::Leaf { value, cover } => {
                    if !value.is_finite() {
                        return Err(Error::invalid_model(format!("node {i}: non-finite leaf value")));
                    }
                    if !(cover.is_finite() && *cover > 0.0) {
                        return Err(Error::invalid_model(format!("node {i}: cover must be positive")));
                    }
                }
                Node::Internal { feature, threshold, left, right, cover, .. } => {
                    if *feature >= FEATURE_COUNT {
                        return Err(Error::invalid_model(format!(
                            "node {i}: feature {feature} outside schema ({} features)",
                            FEATURE_COUNT
                        )));
                    }
                    if !threshold.is_finite() {
                        return Err(Error::invalid_model(format!("node {i}: non-finite threshold")));
                    }
                    if !(cover.is_finite() && *cover > 0.0) {
                        return Err(Error::invalid_model(format!("node {i}: cover must be positive")));
                    }
                    for child in [*left as usize, *right as usize] {
                        if child >= n {
                            return Err(Error::invalid_model(format!(
                                "node {i}: child {child} out of range"
                            )));
                        }
                        if child == i {
                            return Err(Error::invalid_model(format!("node {i}: self-referential child")));
                        }
                    }
                    stack.push(*left as usize);
                    stack.push(*right as usize);
                }
            }
        }
        if visited != n {
            return Err(Error::invalid_model(format!(
                "{} of {n} nodes unreachable from root",
                n - visited
            )));
        }
        Ok(())
    }
}

/// Gradient-boosted tree ensemble scoring `base_score + sum(tree outputs)`
/// in margin (log-odds) space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeEnsemble {
    pub base_score: f64,
    pub trees: Vec<Tree>,
    /// Snapshot of the canonical feature order the model was fit against.
    pub feature_names: Vec<String>,
}

impl TreeEnsemble {
    pub fn new(base_score: f64, trees: Vec<Tree>) -> Self {
        TreeEnsemble {
            base_score,
            trees,
            feature_names: FEATURE_NAMES.iter().map(|s| s.to_string()).collect(),
        }
    }

    pub fn predict_margin(&self, x: &FeatureVector) -> f64 {
        let mut margin = self.base_score;
        for tree in &self.trees {
            margin += tree.predict(x);
        }
        margin
    }

    pub fn max_depth(&self) -> usize {
        self.trees.iter().map(Tree::depth).max().unwrap_or(0)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.base_score.is_finite() {
            return Err(Error::invalid_model("non-finite base_score"));
        }
        if self.trees.is_empty() {
            return Err(Error::invalid_model("ensemble has no trees"));
        }
        if self.feature_names != FEATURE_NAMES {
            return Err(Error::invalid_model(
                "feature_names do not match the readmit-v1 layout",
            ));
        }
        for (i, tree) in self.trees.iter().enumerate() {
            tree.validate()
                .map_err(|e| Error::invalid_model(format!("tree {i}: {e}")))?;
        }
        Ok(())
    }
}

//! Exact Shapley values for tree ensembles in O(T L D^2).
//!
//! This is the path-dependent formulation: a feature subset S routes the
//! input normally on features in S and splits probability mass by child
//! covers on features outside S. The algorithm walks every root-to-leaf
//! path once, maintaining for each distinct feature on the path its
//! probability of staying on the path when excluded (`zero_fraction`),
//! an indicator of whether the input follows the path when included
//! (`one_fraction`), and a set of permutation weights (`pweight`) that
//! collectively encode the Shapley kernel for all subset sizes.

use rayon::prelude::*;

use crate::cohort::schema::FEATURE_COUNT;
use crate::cohort::FeatureVector;
use crate::error::{Error, Result};
use crate::explain::ShapExplanation;
use crate::model::{Node, Tree, TreeEnsemble};

/// Deepest tree the explainer accepts; bounds recursion and the path
/// scratch buffer for models loaded from arbitrary files.
pub(crate) const MAX_EXPLAIN_DEPTH: usize = 64;

/// Relative tolerance for parent cover vs the sum of child covers.
const COVER_SUM_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy)]
struct PathItem {
    feature_index: Option<usize>,
    zero_fraction: f64,
    one_fraction: f64,
    pweight: f64,
}

const EMPTY_ITEM: PathItem =
    PathItem { feature_index: None, zero_fraction: 0.0, one_fraction: 0.0, pweight: 0.0 };

#[derive(Debug)]
pub struct TreeShapExplainer<'a> {
    ensemble: &'a TreeEnsemble,
    base_value: f64,
    scratch_len: usize,
}

impl<'a> TreeShapExplainer<'a> {
    /// Validates the ensemble for explanation use. Beyond structural
    /// validity this demands consistent covers: each internal node's cover
    /// must equal the sum of its children's, since covers define the
    /// path-expectation probabilities.
    pub fn new(ensemble: &'a TreeEnsemble) -> Result<TreeShapExplainer<'a>> {
        ensemble.validate()?;
        let mut max_depth = 0;
        for (t, tree) in ensemble.trees.iter().enumerate() {
            max_depth = max_depth.max(tree.depth());
            for (i, node) in tree.nodes.iter().enumerate() {
                let Node::Internal { left, right, cover, .. } = node else { continue };
                let child_sum =
                    tree.nodes[*left as usize].cover() + tree.nodes[*right as usize].cover();
                if (cover - child_sum).abs() > COVER_SUM_TOLERANCE * cover.max(1.0) {
                    return Err(Error::invalid_model(format!(
                        "tree {t}, node {i}: cover {cover} != sum of child covers {child_sum}; \
                         covers must partition for path expectations"
                    )));
                }
            }
        }
        if max_depth > MAX_EXPLAIN_DEPTH {
            return Err(Error::invalid_model(format!(
                "tree depth {max_depth} exceeds the explainable maximum {MAX_EXPLAIN_DEPTH}"
            )));
        }
        let base_value = ensemble.base_score
            + ensemble.trees.iter().map(expected_value).sum::<f64>();
        // Unique features per path <= depth + 1, plus the virtual root item.
        let d = max_depth + 2;
        Ok(TreeShapExplainer { ensemble, base_value, scratch_len: d * (d + 1) / 2 })
    }

    /// Cover-weighted expected margin of the ensemble.
    pub fn base_value(&self) -> f64 {
        self.base_value
    }

    pub fn explain(&self, x: &FeatureVector) -> ShapExplanation {
        let mut phi = vec![0.0_f64; FEATURE_COUNT];
        let mut scratch = vec![EMPTY_ITEM; self.scratch_len];
        for tree in &self.ensemble.trees {
            // Every cell is written before it is read on each walk, so the
            // scratch buffer carries over between trees without clearing.
            shap_recursive(tree, x, &mut phi, 0, &mut scratch, 0, 1.0, 1.0, None);
        }
        let margin = self.ensemble.predict_margin(x);
        let explanation = ShapExplanation { base_value: self.base_value, phi, margin };
        debug_assert!(
            explanation.local_accuracy_gap() < 1e-6,
            "local accuracy violated: gap {}",
            explanation.local_accuracy_gap()
        );
        explanation
    }

    /// Explains many patients in parallel; output order matches input and
    /// each explanation is bit-identical to a serial `explain` call.
    pub fn explain_batch(&self, xs: &[FeatureVector]) -> Vec<ShapExplanation> {
        xs.par_iter().map(|x| self.explain(x)).collect()
    }
}

/// Cover-weighted average leaf value, iteratively (arena order is not
/// guaranteed to put children after parents for loaded models).
fn expected_value(tree: &Tree) -> f64 {
    let mut memo = vec![f64::NAN; tree.nodes.len()];
    let mut stack = vec![0_usize];
    while let Some(&top) = stack.last() {
        match &tree.nodes[top] {
            Node::Leaf { value, .. } => {
                memo[top] = *value;
                stack.pop();
            }
            Node::Internal { left, right, cover, .. } => {
                let (l, r) = (*left as usize, *right as usize);
                if memo[l].is_nan() {
                    stack.push(l);
                } else if memo[r].is_nan() {
                    stack.push(r);
                } else {
                    memo[top] = (tree.nodes[l].cover() / cover) * memo[l]
                        + (tree.nodes[r].cover() / cover) * memo[r];
                    stack.pop();
                }
            }
        }
    }
    memo[0]
}

#[allow(clippy::too_many_arguments)]
fn shap_recursive(
    tree: &Tree,
    x: &FeatureVector,
    phi: &mut [f64],
    node_index: usize,
    unique_path: &mut [PathItem],
    unique_depth: usize,
    parent_zero_fraction: f64,
    parent_one_fraction: f64,
    parent_feature_index: Option<usize>,
) {
    extend_path(
        unique_path,
        unique_depth,
        parent_zero_fraction,
        parent_one_fraction,
        parent_feature_index,
    );
    match &tree.nodes[node_index] {
        Node::Leaf { value, .. } => {
            for path_index in 1..=unique_depth {
                let weight = unwound_path_sum(unique_path, unique_depth, path_index);
                let item = &unique_path[path_index];
                let scale = weight * (item.one_fraction - item.zero_fraction);
                phi[item.feature_index.expect("non-root items carry a feature")] +=
                    scale * value;
            }
        }
        Node::Internal { feature, threshold, left, right, default_left, cover } => {
            let mut unique_depth = unique_depth;
            // Hot child = where this input actually routes (missing values
            // follow the default direction, same as prediction).
            let v = x.0[*feature];
            let goes_left = if v.is_nan() { *default_left } else { v < *threshold };
            let (hot, cold) = if goes_left {
                (*left as usize, *right as usize)
            } else {
                (*right as usize, *left as usize)
            };
            let hot_zero_fraction = tree.nodes[hot].cover() / cover;
            let cold_zero_fraction = tree.nodes[cold].cover() / cover;
            let mut incoming_zero_fraction = 1.0;
            let mut incoming_one_fraction = 1.0;
            // A feature met twice on one path must be unwound first so the
            // path keeps one item per distinct feature.
            if let Some(path_index) =
                (1..=unique_depth).find(|i| unique_path[*i].feature_index == Some(*feature))
            {
                incoming_zero_fraction = unique_path[path_index].zero_fraction;
                incoming_one_fraction = unique_path[path_index].one_fraction;
                unwind_path(unique_path, unique_depth, path_index);
                unique_depth -= 1;
            }
            let (parent_path, child_path) = unique_path.split_at_mut(unique_depth + 1);
            child_path[..parent_path.len()].copy_from_slice(parent_path);
            shap_recursive(
                tree,
                x,
                phi,
                hot,
                child_path,
                unique_depth + 1,
                hot_zero_fraction * incoming_zero_fraction,
                incoming_one_fraction,
                Some(*feature),
            );
            child_path[..parent_path.len()].copy_from_slice(parent_path);
            shap_recursive(
                tree,
                x,
                phi,
                cold,
                child_path,
                unique_depth + 1,
                cold_zero_fraction * incoming_zero_fraction,
                0.0,
                Some(*feature),
            );
        }
    }
}

/// Appends a feature to the path and folds its fractions into the
/// permutation weights for every subset size.
fn extend_path(
    unique_path: &mut [PathItem],
    unique_depth: usize,
    zero_fraction: f64,
    one_fraction: f64,
    feature_index: Option<usize>,
) {
    unique_path[unique_depth] = PathItem {
        feature_index,
        zero_fraction,
        one_fraction,
        pweight: if unique_depth == 0 { 1.0 } else { 0.0 },
    };
    for i in (0..unique_depth).rev() {
        unique_path[i + 1].pweight +=
            one_fraction * unique_path[i].pweight * (i + 1) as f64 / (unique_depth + 1) as f64;
        unique_path[i].pweight =
            zero_fraction * unique_path[i].pweight * (unique_depth - i) as f64
                / (unique_depth + 1) as f64;
    }
}

/// Exact inverse of `extend_path` for the item at `path_index`.
fn unwind_path(unique_path: &mut [PathItem], unique_depth: usize, path_index: usize) {
    let one_fraction = unique_path[path_index].one_fraction;
    let zero_fraction = unique_path[path_index].zero_fraction;
    let mut next_one_portion = unique_path[unique_depth].pweight;
    for i in (0..unique_depth).rev() {
        if one_fraction != 0.0 {
            let tmp = unique_path[i].pweight;
            unique_path[i].pweight =
                next_one_portion * (unique_depth + 1) as f64 / ((i + 1) as f64 * one_fraction);
            next_one_portion = tmp
                - unique_path[i].pweight * zero_fraction * (unique_depth - i) as f64
                    / (unique_depth + 1) as f64;
        } else {
            unique_path[i].pweight = unique_path[i].pweight * (unique_depth + 1) as f64
                / (zero_fraction * (unique_depth - i) as f64);
        }
    }
    for i in path_index..unique_depth {
        unique_path[i].feature_index = unique_path[i + 1].feature_index;
        unique_path[i].zero_fraction = unique_path[i + 1].zero_fraction;
        unique_path[i].one_fraction = unique_path[i + 1].one_fraction;
    }
}

/// Total permutation weight the item at `path_index` would contribute if
/// unwound, without mutating the path.
fn unwound_path_sum(unique_path: &[PathItem], unique_depth: usize, path_index: usize) -> f64 {
    let one_fraction = unique_path[path_index].one_fraction;
    let zero_fraction = unique_path[path_index].zero_fraction;
    let mut next_one_portion = unique_path[unique_depth].pweight;
    let mut total = 0.0;
    if one_fraction != 0.0 {
        for i in (0..unique_depth).rev() {
            let tmp = next_one_portion / ((i + 1) as f64 * one_fraction);
            total += tmp;
            next_one_portion =
                unique_path[i].pweight - tmp * zero_fraction * (unique_depth - i) as f64;
        }
    } else {
        for i in (0..unique_depth).rev() {
            total += unique_path[i].pweight / (zero_fraction * (unique_depth - i) as f64);
        }
    }
    total * (unique_depth + 1) as f64
}

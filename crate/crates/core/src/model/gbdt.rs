//! Second-order gradient boosting on logloss with exact greedy splits.
//!
//! Each round fits one regression tree to the current gradient/hessian
//! statistics. Split search is exact: every midpoint between consecutive
//! distinct values of every feature is scored by the regularized gain
//!
//! ```text
//! gain = 1/2 [ GL^2/(HL+l) + GR^2/(HR+l) - (GL+GR)^2/(HL+HR+l) ]
//! ```
//!
//! with ties broken toward the lowest feature index, then the lowest
//! threshold. Class imbalance is handled by `scale_pos_weight`, which scales
//! positive-class gradient and hessian contributions (default: the
//! negative/positive count ratio, which balances the weighted classes).
//!
//! Trees grow either depth-wise (split every frontier node level by level up
//! to `max_depth`) or leaf-wise (always split the frontier leaf with the
//! largest gain until `num_leaves` is reached). Everything is deterministic:
//! equal inputs produce identical ensembles.

use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::cohort::schema::FEATURE_COUNT;
use crate::cohort::FeatureVector;
use crate::error::{Error, Result};
use crate::model::tree::{Node, Tree, TreeEnsemble};

/// Gains at or below this threshold never split; guards against splits
/// manufactured from accumulated floating-point noise on pure nodes.
const GAIN_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum Growth {
    /// Split every splittable frontier node, level by level, to `max_depth`.
    DepthWise,
    /// Best-first: repeatedly split the leaf with the highest gain.
    LeafWise { num_leaves: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GbdtConfig {
    pub n_estimators: usize,
    pub learning_rate: f64,
    /// Maximum root-to-leaf edge count in both growth modes.
    pub max_depth: usize,
    pub growth: Growth,
    /// L2 penalty on leaf weights.
    pub lambda: f64,
    /// Minimum hessian mass per child.
    pub min_child_weight: f64,
    /// Positive-class weight; None = #negatives / #positives.
    pub scale_pos_weight: Option<f64>,
}

impl Default for GbdtConfig {
    fn default() -> Self {
        GbdtConfig {
            n_estimators: 300,
            learning_rate: 0.05,
            max_depth: 6,
            growth: Growth::DepthWise,
            lambda: 1.0,
            min_child_weight: 1.0,
            scale_pos_weight: None,
        }
    }
}

impl GbdtConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_estimators == 0 {
            return Err(Error::invalid_config("n_estimators must be positive"));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate <= 1.0) {
            return Err(Error::invalid_config("learning_rate must be in (0, 1]"));
        }
        if self.max_depth == 0 || self.max_depth > 32 {
            return Err(Error::invalid_config("max_depth must be in 1..=32"));
        }
        if let Growth::LeafWise { num_leaves } = self.growth {
            if num_leaves < 2 {
                return Err(Error::invalid_config("num_leaves must be at least 2"));
            }
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::invalid_config("lambda must be finite and >= 0"));
        }
        if !(self.min_child_weight >= 0.0 && self.min_child_weight.is_finite()) {
            return Err(Error::invalid_config("min_child_weight must be finite and >= 0"));
        }
        if let Some(w) = self.scale_pos_weight {
            if !(w > 0.0 && w.is_finite()) {
                return Err(Error::invalid_config("scale_pos_weight must be positive"));
            }
        }
        Ok(())
    }
}

/// Numerically stable logistic function.
pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// ln(1 + e^z) without overflow.
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

/// Weighted mean logloss of margins, positives weighted by
/// `scale_pos_weight`. This is the objective each boosting round decreases.
pub fn weighted_logloss(margins: &[f64], labels: &[bool], scale_pos_weight: f64) -> f64 {
    let mut loss = 0.0;
    let mut weight = 0.0;
    for (m, y) in margins.iter().zip(labels) {
        let w = if *y { scale_pos_weight } else { 1.0 };
        // y=1 costs softplus(-m), y=0 costs softplus(m).
        loss += w * softplus(if *y { -m } else { *m });
        weight += w;
    }
    loss / weight
}

/// Column-major training matrix with global per-feature argsorts, computed
/// once and partitioned down each tree.
struct Dataset {
    cols: Vec<Vec<f64>>,
    sorted: Vec<Vec<u32>>,
    n: usize,
}

impl Dataset {
    fn build(features: &[FeatureVector]) -> Result<Dataset> {
        let n = features.len();
        let mut cols = vec![Vec::with_capacity(n); FEATURE_COUNT];
        for (row, x) in features.iter().enumerate() {
            for (f, v) in x.0.iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::invalid_input(format!(
                        "row {row}, feature {f}: training requires finite values \
                         (impute missing data first), got {v}"
                    )));
                }
                cols[f].push(*v);
            }
        }
        let sorted = cols
            .iter()
            .map(|col| {
                let mut idx: Vec<u32> = (0..n as u32).collect();
                idx.sort_by(|&a, &b| {
                    col[a as usize]
                        .partial_cmp(&col[b as usize])
                        .expect("finite values compare")
                        .then(a.cmp(&b))
                });
                idx
            })
            .collect();
        Ok(Dataset { cols, sorted, n })
    }
}

#[derive(Debug, Clone, Copy)]
struct SplitCandidate {
    gain: f64,
    feature: usize,
    threshold: f64,
    left_grad: f64,
    left_hess: f64,
}

/// A frontier node during tree construction: its rows (as per-feature sorted
/// lists over one shared multiset), aggregate statistics, and its reserved
/// slot in the arena.
struct BuildNode {
    lists: Vec<Vec<u32>>,
    grad_sum: f64,
    hess_sum: f64,
    depth: usize,
    arena_index: usize,
    best: Option<SplitCandidate>,
}

fn find_best_split(
    lists: &[Vec<u32>],
    ds: &Dataset,
    grad: &[f64],
    hess: &[f64],
    grad_sum: f64,
    hess_sum: f64,
    config: &GbdtConfig,
) -> Option<SplitCandidate> {
    let lambda = config.lambda;
    let mcw = config.min_child_weight;
    let parent_score = grad_sum * grad_sum / (hess_sum + lambda);
    let mut best: Option<SplitCandidate> = None;
    for (feature, list) in lists.iter().enumerate() {
        let col = &ds.cols[feature];
        let mut gl = 0.0_f64;
        let mut hl = 0.0_f64;
        let mut prev = col[list[0] as usize];
        for &row in list {
            let v = col[row as usize];
            if v != prev {
                // Candidate boundary: rows accumulated so far have values
                // <= prev, which all satisfy value < midpoint.
                let threshold = 0.5 * (prev + v);
                // Adjacent floats can collapse the midpoint onto prev,
                // which would make the left side empty; skip those.
                if threshold > prev && hl >= mcw && hess_sum - hl >= mcw {
                    let gr = grad_sum - gl;
                    let hr = hess_sum - hl;
                    let gain =
                        0.5 * (gl * gl / (hl + lambda) + gr * gr / (hr + lambda) - parent_score);
                    // Strict improvement only: feature indices ascend and
                    // thresholds ascend within a feature, so ties resolve to
                    // the lowest (feature, threshold) pair.
                    if gain > GAIN_EPS && best.is_none_or(|b| gain > b.gain) {
                        best = Some(SplitCandidate {
                            gain,
                            feature,
                            threshold,
                            left_grad: gl,
                            left_hess: hl,
                        });
                    }
                }
                prev = v;
            }
            gl += grad[row as usize];
            hl += hess[row as usize];
        }
    }
    best
}

/// Splits every per-feature sorted list by the accepted candidate; relative
/// order inside each side is preserved, so children lists stay sorted.
fn partition_lists(
    lists: Vec<Vec<u32>>,
    ds: &Dataset,
    feature: usize,
    threshold: f64,
) -> (Vec<Vec<u32>>, Vec<Vec<u32>>) {
    let col = &ds.cols[feature];
    let mut left = Vec::with_capacity(lists.len());
    let mut right = Vec::with_capacity(lists.len());
    for list in lists {
        let mut l = Vec::with_capacity(list.len() / 2);
        let mut r = Vec::with_capacity(list.len() / 2);
        for row in list {
            if col[row as usize] < threshold {
                l.push(row);
            } else {
                r.push(row);
            }
        }
        left.push(l);
        right.push(r);
    }
    (left, right)
}

/// Heap key for leaf-wise growth: highest gain first, creation order as the
/// deterministic tie-break.
#[derive(PartialEq)]
struct HeapEntry {
    gain: f64,
    slab_index: usize,
}

impl Eq for HeapEntry {}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.gain
            .total_cmp(&other.gain)
            .then(other.slab_index.cmp(&self.slab_index))
    }
}

struct TreeBuilder<'a> {
    ds: &'a Dataset,
    grad: &'a [f64],
    hess: &'a [f64],
    config: &'a GbdtConfig,
    arena: Vec<Node>,
    /// (arena index of leaf, rows) for the margin update.
    leaf_rows: Vec<(usize, Vec<u32>)>,
}

impl<'a> TreeBuilder<'a> {
    fn new_node(&mut self, lists: Vec<Vec<u32>>, grad_sum: f64, hess_sum: f64, depth: usize) -> BuildNode {
        let arena_index = self.arena.len();
        // Placeholder; overwritten when the node splits or finalizes.
        self.arena.push(Node::Leaf { value: 0.0, cover: hess_sum });
        // Only scan for a split when the node is allowed to have one.
        let splittable = depth < self.config.max_depth
            && lists[0].len() >= 2
            && hess_sum >= 2.0 * self.config.min_child_weight;
        let best = if splittable {
            find_best_split(&lists, self.ds, self.grad, self.hess, grad_sum, hess_sum, self.config)
        } else {
            None
        };
        BuildNode { lists, grad_sum, hess_sum, depth, arena_index, best }
    }

    fn finalize_leaf(&mut self, node: BuildNode) {
        let value = -node.grad_sum / (node.hess_sum + self.config.lambda) * self.config.learning_rate;
        self.arena[node.arena_index] = Node::Leaf { value, cover: node.hess_sum };
        let mut lists = node.lists;
        self.leaf_rows.push((node.arena_index, lists.swap_remove(0)));
    }

    /// Applies `node`'s best split, returning the two children.
    fn split(&mut self, node: BuildNode) -> (BuildNode, BuildNode) {
        let cand = node.best.expect("split() requires a candidate");
        let (left_lists, right_lists) =
            partition_lists(node.lists, self.ds, cand.feature, cand.threshold);
        let right_grad = node.grad_sum - cand.left_grad;
        let right_hess = node.hess_sum - cand.left_hess;
        let left = self.new_node(left_lists, cand.left_grad, cand.left_hess, node.depth + 1);
        let right = self.new_node(right_lists, right_grad, right_hess, node.depth + 1);
        self.arena[node.arena_index] = Node::Internal {
            feature: cand.feature,
            threshold: cand.threshold,
            left: left.arena_index as u32,
            right: right.arena_index as u32,
            default_left: cand.left_hess >= right_hess,
            cover: node.hess_sum,
        };
        (left, right)
    }

    fn build_depth_wise(&mut self, root: BuildNode) {
        let mut frontier = vec![root];
        while !frontier.is_empty() {
            let mut next = Vec::new();
            for node in frontier {
                if node.best.is_some() {
                    let (l, r) = self.split(node);
                    next.push(l);
                    next.push(r);
                } else {
                    self.finalize_leaf(node);
                }
            }
            frontier = next;
        }
    }

    fn build_leaf_wise(&mut self, root: BuildNode, num_leaves: usize) {
        let mut slab: Vec<Option<BuildNode>> = Vec::new();
        let mut heap = BinaryHeap::new();
        let enqueue = |slab: &mut Vec<Option<BuildNode>>, heap: &mut BinaryHeap<HeapEntry>, node: BuildNode| {
            if let Some(c) = &node.best {
                heap.push(HeapEntry { gain: c.gain, slab_index: slab.len() });
            }
            slab.push(Some(node));
        };
        enqueue(&mut slab, &mut heap, root);
        let mut leaves = 1usize;
        while leaves < num_leaves {
            let Some(entry) = heap.pop() else { break };
            let node = slab[entry.slab_index].take().expect("heap entries are unique");
            let (l, r) = self.split(node);
            leaves += 1;
            enqueue(&mut slab, &mut heap, l);
            enqueue(&mut slab, &mut heap, r);
        }
        for node in slab.into_iter().flatten() {
            self.finalize_leaf(node);
        }
    }
}

/// Trains a boosted ensemble. Features must be fully imputed (finite);
/// labels must contain both classes.
pub fn train_gbdt(
    features: &[FeatureVector],
    labels: &[bool],
    config: &GbdtConfig,
) -> Result<TreeEnsemble> {
    config.validate()?;
    if features.is_empty() {
        return Err(Error::invalid_input("training set is empty"));
    }
    if features.len() != labels.len() {
        return Err(Error::invalid_input(format!(
            "{} feature rows but {} labels",
            features.len(),
            labels.len()
        )));
    }
    let pos = labels.iter().filter(|l| **l).count();
    let neg = labels.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::invalid_input(
            "training needs both classes (got a single-class label vector)",
        ));
    }
    let spw = config
        .scale_pos_weight
        .unwrap_or(neg as f64 / pos as f64);

    let ds = Dataset::build(features)?;
    let n = ds.n;
    let mut margins = vec![0.0_f64; n];
    let mut grad = vec![0.0_f64; n];
    let mut hess = vec![0.0_f64; n];
    let mut trees = Vec::with_capacity(config.n_estimators);

    for _ in 0..config.n_estimators {
        for i in 0..n {
            let p = sigmoid(margins[i]);
            let w = if labels[i] { spw } else { 1.0 };
            let y = labels[i] as u8 as f64;
            grad[i] = w * (p - y);
            hess[i] = w * p * (1.0 - p);
        }
        let grad_sum: f64 = grad.iter().sum();
        let hess_sum: f64 = hess.iter().sum();

        let mut builder = TreeBuilder {
            ds: &ds,
            grad: &grad,
            hess: &hess,
            config,
            arena: Vec::new(),
            leaf_rows: Vec::new(),
        };
        let root = builder.new_node(ds.sorted.clone(), grad_sum, hess_sum, 0);
        match config.growth {
            Growth::DepthWise => builder.build_depth_wise(root),
            Growth::LeafWise { num_leaves } => builder.build_leaf_wise(root, num_leaves),
        }

        let tree = Tree { nodes: builder.arena };
        for (leaf_index, rows) in &builder.leaf_rows {
            let Node::Leaf { value, .. } = tree.nodes[*leaf_index] else {
                unreachable!("finalized leaves stay leaves");
            };
            for &row in rows {
                margins[row as usize] += value;
            }
        }
        trees.push(tree);
    }

    let ensemble = TreeEnsemble::new(0.0, trees);
    ensemble.validate()?;
    Ok(ensemble)
}

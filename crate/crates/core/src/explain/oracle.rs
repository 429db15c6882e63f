//! Brute-force Shapley values straight from the definition. Exponential in
//! the number of features the ensemble actually uses; exists solely as the
//! reference the fast tree algorithm must agree with.

use crate::cohort::schema::FEATURE_COUNT;
use crate::cohort::FeatureVector;
use crate::error::{Error, Result};
use crate::explain::{used_features, ShapExplanation};
use crate::model::{Node, Tree, TreeEnsemble};

/// Largest used-feature count the oracle will accept (2^M evaluations).
pub const DEFAULT_SUBSET_LIMIT: usize = 15;

/// Value of the coalition game: evaluates the ensemble with features in
/// `subset` fixed to x's routing and all others marginalized by child-cover
/// proportions (the path-dependent expectation).
fn coalition_value(ensemble: &TreeEnsemble, x: &FeatureVector, in_subset: &[bool; FEATURE_COUNT]) -> f64 {
    fn walk(tree: &Tree, x: &FeatureVector, in_subset: &[bool; FEATURE_COUNT], index: usize) -> f64 {
        match &tree.nodes[index] {
            Node::Leaf { value, .. } => *value,
            Node::Internal { feature, threshold, left, right, default_left, cover } => {
                let (l, r) = (*left as usize, *right as usize);
                if in_subset[*feature] {
                    let v = x.0[*feature];
                    let goes_left = if v.is_nan() { *default_left } else { v < *threshold };
                    walk(tree, x, in_subset, if goes_left { l } else { r })
                } else {
                    (tree.nodes[l].cover() / cover) * walk(tree, x, in_subset, l)
                        + (tree.nodes[r].cover() / cover) * walk(tree, x, in_subset, r)
                }
            }
        }
    }
    ensemble.base_score
        + ensemble.trees.iter().map(|t| walk(t, x, in_subset, 0)).sum::<f64>()
}

/// phi_i = sum over subsets S of used features excluding i of
/// |S|! (M - |S| - 1)! / M! * (v(S + i) - v(S)), with unused features
/// getting exactly zero.
pub fn brute_force_shap(
    ensemble: &TreeEnsemble,
    x: &FeatureVector,
    feature_subset_limit: usize,
) -> Result<ShapExplanation> {
    ensemble.validate()?;
    let used = used_features(ensemble);
    let m = used.len();
    if m > feature_subset_limit {
        return Err(Error::invalid_input(format!(
            "ensemble uses {m} features; brute-force enumeration is capped at \
             {feature_subset_limit} (2^{m} coalitions)"
        )));
    }

    // v over all 2^m coalitions, indexed by bitmask over `used`.
    let values: Vec<f64> = (0_u32..(1 << m))
        .map(|mask| {
            let mut in_subset = [false; FEATURE_COUNT];
            for (bit, slot) in used.iter().enumerate() {
                if mask & (1 << bit) != 0 {
                    in_subset[*slot] = true;
                }
            }
            coalition_value(ensemble, x, &in_subset)
        })
        .collect();

    // Shapley kernel weights by coalition size; 15! < 2^53 so f64 is exact.
    let mut factorial = [1.0_f64; 16];
    for i in 1..16 {
        factorial[i] = factorial[i - 1] * i as f64;
    }
    let weight =
        |s: usize| factorial[s] * factorial[m - s - 1] / factorial[m];

    let mut phi = vec![0.0_f64; FEATURE_COUNT];
    for (bit, slot) in used.iter().enumerate() {
        let mut total = 0.0;
        for mask in 0_u32..(1 << m) {
            if mask & (1 << bit) != 0 {
                continue;
            }
            let s = mask.count_ones() as usize;
            total += weight(s) * (values[(mask | (1 << bit)) as usize] - values[mask as usize]);
        }
        phi[*slot] = total;
    }

    Ok(ShapExplanation {
        base_value: values[0],
        phi,
        margin: values[(1 << m) - 1],
    })
}

//! Population-level aggregation of explanations and the patient-facing
//! report formats.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::cohort::schema::{FEATURE_COUNT, FEATURE_NAMES};
use crate::cohort::FeatureVector;
use crate::error::{Error, Result};
use crate::explain::ShapExplanation;
use crate::model::sigmoid;

/// How a feature's value relates to its attribution across a population:
/// sign of the Pearson correlation, with weak correlations (|r| < 0.1)
/// declared "varies".
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Increases,
    Decreases,
    Varies,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureImportance {
    pub feature: String,
    /// Canonical slot index.
    pub index: usize,
    pub mean_abs_phi: f64,
    pub direction: Direction,
}

/// All 26 features ranked by mean |phi| descending (ties by slot index).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlobalImportance {
    pub ranked: Vec<FeatureImportance>,
}

const WEAK_CORRELATION: f64 = 0.1;

fn pearson(xs: &[f64], ys: &[f64]) -> f64 {
    debug_assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    if xs.len() < 2 {
        return 0.0;
    }
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        let dx = x - mx;
        let dy = y - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return 0.0;
    }
    sxy / (sxx * syy).sqrt()
}

/// Mean |phi| per feature with a direction summary, ranked descending.
/// `values` must align with `explanations` row by row; missing entries
/// (NaN) are skipped when correlating.
pub fn global_importance(
    explanations: &[ShapExplanation],
    values: &[FeatureVector],
) -> Result<GlobalImportance> {
    if explanations.is_empty() {
        return Err(Error::invalid_input("cannot aggregate zero explanations"));
    }
    if explanations.len() != values.len() {
        return Err(Error::invalid_input(format!(
            "{} explanations but {} value rows",
            explanations.len(),
            values.len()
        )));
    }
    for e in explanations {
        if e.phi.len() != FEATURE_COUNT {
            return Err(Error::invalid_input("explanation dimension mismatch"));
        }
    }

    let n = explanations.len() as f64;
    let mut ranked = Vec::with_capacity(FEATURE_COUNT);
    for i in 0..FEATURE_COUNT {
        let mean_abs_phi = explanations.iter().map(|e| e.phi[i].abs()).sum::<f64>() / n;
        let mut vx = Vec::with_capacity(explanations.len());
        let mut vy = Vec::with_capacity(explanations.len());
        for (e, row) in explanations.iter().zip(values) {
            if row.0[i].is_finite() {
                vx.push(row.0[i]);
                vy.push(e.phi[i]);
            }
        }
        let r = pearson(&vx, &vy);
        let direction = if r >= WEAK_CORRELATION {
            Direction::Increases
        } else if r <= -WEAK_CORRELATION {
            Direction::Decreases
        } else {
            Direction::Varies
        };
        ranked.push(FeatureImportance {
            feature: FEATURE_NAMES[i].to_string(),
            index: i,
            mean_abs_phi,
            direction,
        });
    }
    ranked.sort_by(|a, b| {
        b.mean_abs_phi.total_cmp(&a.mean_abs_phi).then(a.index.cmp(&b.index))
    });
    Ok(GlobalImportance { ranked })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaterfallEntry {
    pub feature: String,
    /// Raw feature value; null when the value was missing.
    pub value: Option<f64>,
    pub phi: f64,
}

/// Top-K attribution listing for one patient. `base_value` plus the listed
/// phi plus `remainder_phi` reconstructs the margin (to float tolerance).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaterfallReport {
    pub base_value: f64,
    pub entries: Vec<WaterfallEntry>,
    /// Sum of phi over all features beyond the top K; exactly 0 at K = 26.
    pub remainder_phi: f64,
    pub margin: f64,
    pub probability: f64,
}

/// Builds the top-`k` waterfall, largest |phi| first (ties by slot index).
/// `k` is clamped to 1..=26.
pub fn waterfall_report(
    explanation: &ShapExplanation,
    values: &FeatureVector,
    k: usize,
) -> WaterfallReport {
    let k = k.clamp(1, FEATURE_COUNT);
    let mut order: Vec<usize> = (0..FEATURE_COUNT).collect();
    order.sort_by(|a, b| {
        explanation.phi[*b]
            .abs()
            .total_cmp(&explanation.phi[*a].abs())
            .then(a.cmp(b))
    });
    let entries = order[..k]
        .iter()
        .map(|&i| WaterfallEntry {
            feature: FEATURE_NAMES[i].to_string(),
            value: if values.0[i].is_nan() { None } else { Some(values.0[i]) },
            phi: explanation.phi[i],
        })
        .collect();
    let remainder_phi = order[k..].iter().map(|&i| explanation.phi[i]).sum();
    WaterfallReport {
        base_value: explanation.base_value,
        entries,
        remainder_phi,
        margin: explanation.margin,
        probability: sigmoid(explanation.margin),
    }
}

/// Long-format table for population beeswarm plots: one row per
/// patient x feature, features blocked in global-importance order.
/// Missing values render as empty cells.
pub fn beeswarm_csv(
    ids: &[u64],
    explanations: &[ShapExplanation],
    values: &[FeatureVector],
) -> Result<String> {
    if ids.len() != explanations.len() || ids.len() != values.len() {
        return Err(Error::invalid_input(format!(
            "misaligned beeswarm inputs: {} ids, {} explanations, {} value rows",
            ids.len(),
            explanations.len(),
            values.len()
        )));
    }
    let importance = global_importance(explanations, values)?;
    let mut out = String::from("patient_id,feature,value,phi\n");
    for entry in &importance.ranked {
        let i = entry.index;
        for ((id, e), row) in ids.iter().zip(explanations).zip(values) {
            out.push_str(&id.to_string());
            out.push(',');
            out.push_str(&entry.feature);
            out.push(',');
            if row.0[i].is_finite() {
                out.push_str(&row.0[i].to_string());
            }
            out.push(',');
            out.push_str(&e.phi[i].to_string());
            out.push('\n');
        }
    }
    Ok(out)
}

pub fn beeswarm_export(
    ids: &[u64],
    explanations: &[ShapExplanation],
    values: &[FeatureVector],
    path: &Path,
) -> Result<()> {
    std::fs::write(path, beeswarm_csv(ids, explanations, values)?)?;
    Ok(())
}

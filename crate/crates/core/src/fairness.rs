//! Subgroup fairness auditing and equalized-odds post-processing.
//!
//! The audit slices a scored cohort into 16 demographic subgroups (race,
//! age band, gender, insurance), reports AUC/FNR/PPV per group at the
//! global decision threshold, and gates the per-dimension max-min gaps
//! (0.05 for AUC, 0.10 for FNR). When a gate trips, [`fit_equalized_odds`]
//! derives per-group randomized threshold policies that move every group
//! onto one shared (FPR, TPR) operating point.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::cohort::{Cohort, Dimension, SubgroupKey};
use crate::error::{Error, Result};
use crate::eval::{auc_roc, confusion_at, roc_curve, youden_threshold, RocPoint, ScoredSet};
use crate::rng::sub_rng;

/// Maximum tolerated per-dimension AUC gap before post-processing.
pub const DEFAULT_AUC_GATE: f64 = 0.05;
/// Maximum tolerated per-dimension FNR gap before post-processing.
pub const DEFAULT_FNR_GATE: f64 = 0.10;
/// Groups smaller than this are reported but excluded from gap computation.
pub const DEFAULT_MIN_GROUP_SIZE: usize = 50;

/// TPR-FPR margin below which the best shared operating point is treated
/// as chance-level, triggering the chord fallback.
const CHANCE_MARGIN: f64 = 1e-9;

/// Audit dimensions in report order: race, age band, gender, insurance.
const AUDIT_ORDER: [Dimension; 4] = [
    Dimension::Race,
    Dimension::AgeBand,
    Dimension::Gender,
    Dimension::Insurance,
];

/// Assigns every record to its subgroup along each of the four dimensions.
/// The returned map always carries all 16 keys; categories absent from the
/// cohort map to empty index sets.
pub fn slice_subgroups(cohort: &Cohort) -> Result<BTreeMap<SubgroupKey, Vec<usize>>> {
    let mut map: BTreeMap<SubgroupKey, Vec<usize>> = SubgroupKey::all()
        .into_iter()
        .map(|key| (key, Vec::new()))
        .collect();
    for (i, record) in cohort.records.iter().enumerate() {
        for dimension in Dimension::ALL {
            let mut matched = None;
            for key in SubgroupKey::all() {
                if key.dimension() == dimension && key.matches(record) {
                    if matched.is_some() {
                        return Err(Error::invalid_record(format!(
                            "admission {}: multiple {} groups match",
                            record.admission_id,
                            dimension.as_str()
                        )));
                    }
                    matched = Some(key);
                }
            }
            let key = matched.ok_or_else(|| {
                Error::invalid_record(format!(
                    "admission {}: no {} group matches",
                    record.admission_id,
                    dimension.as_str()
                ))
            })?;
            map.get_mut(&key).expect("map holds all keys").push(i);
        }
    }
    Ok(map)
}

/// Gates and exclusion floor for [`audit_fairness`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AuditConfig {
    pub min_group_size: usize,
    pub auc_gate: f64,
    pub fnr_gate: f64,
}

impl Default for AuditConfig {
    fn default() -> Self {
        AuditConfig {
            min_group_size: DEFAULT_MIN_GROUP_SIZE,
            auc_gate: DEFAULT_AUC_GATE,
            fnr_gate: DEFAULT_FNR_GATE,
        }
    }
}

impl AuditConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.auc_gate.is_finite() && self.auc_gate > 0.0) {
            return Err(Error::invalid_config("auc_gate must be finite and > 0"));
        }
        if !(self.fnr_gate.is_finite() && self.fnr_gate > 0.0) {
            return Err(Error::invalid_config("fnr_gate must be finite and > 0"));
        }
        Ok(())
    }
}

/// Per-group metrics at the audit threshold. Metrics stay `None` when
/// undefined (single-class groups, zero predicted positives); `evaluable`
/// marks the groups that enter gap computation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubgroupReport {
    pub key: SubgroupKey,
    pub group: String,
    pub n: usize,
    pub positives: usize,
    pub evaluable: bool,
    pub auc: Option<f64>,
    pub fnr: Option<f64>,
    pub ppv: Option<f64>,
}

/// One audited dimension: its group rows plus the max-min gaps over the
/// evaluable groups. Dimensions with fewer than two evaluable groups have
/// null gaps and drop out of the verdict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimensionAudit {
    pub dimension: Dimension,
    pub groups: Vec<SubgroupReport>,
    pub evaluable_groups: usize,
    pub auc_gap: Option<f64>,
    pub fnr_gap: Option<f64>,
    pub in_verdict: bool,
    pub within_gates: Option<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    TriggerPostprocess,
}

/// Full fairness audit: per-dimension blocks of group rows with gaps in a
/// footer position, plus the verdict and any exclusion warnings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FairnessAudit {
    pub threshold: f64,
    pub config: AuditConfig,
    pub dimensions: Vec<DimensionAudit>,
    pub verdict: Verdict,
    pub warnings: Vec<String>,
}

impl FairnessAudit {
    pub fn to_json(&self) -> Result<String> {
        let mut text = serde_json::to_string_pretty(self)
            .map_err(|e| Error::invalid_input(format!("audit serialization failed: {e}")))?;
        text.push('\n');
        Ok(text)
    }

    /// Group rows as CSV for bar-chart rendering. Undefined metrics export
    /// as empty cells.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("dimension,group,n,positives,evaluable,auc,fnr,ppv\n");
        let cell = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        for dim in &self.dimensions {
            for g in &dim.groups {
                out.push_str(&format!(
                    "{},{},{},{},{},{},{},{}\n",
                    dim.dimension.as_str(),
                    g.group,
                    g.n,
                    g.positives,
                    g.evaluable,
                    cell(g.auc),
                    cell(g.fnr),
                    cell(g.ppv),
                ));
            }
        }
        out
    }
}

/// Audits subgroup performance at `threshold`. Groups are index sets into
/// `s` (typically from [`slice_subgroups`]); only the dimensions present in
/// the map are audited. The verdict passes iff every dimension with at
/// least two evaluable groups keeps both gaps within the gates.
pub fn audit_fairness(
    s: &ScoredSet,
    groups: &BTreeMap<SubgroupKey, Vec<usize>>,
    threshold: f64,
    config: AuditConfig,
) -> Result<FairnessAudit> {
    config.validate()?;
    if !threshold.is_finite() {
        return Err(Error::invalid_input("audit threshold must be finite"));
    }
    check_group_indices(s, groups)?;

    let mut warnings = Vec::new();
    let mut dimensions = Vec::new();
    for dimension in AUDIT_ORDER {
        let keys: Vec<SubgroupKey> = groups
            .keys()
            .filter(|k| k.dimension() == dimension)
            .copied()
            .collect();
        if keys.is_empty() {
            continue;
        }

        let mut reports = Vec::with_capacity(keys.len());
        for key in keys {
            let indices = &groups[&key];
            let n = indices.len();
            let (positives, auc, fnr, ppv) = if n == 0 {
                (0, None, None, None)
            } else {
                let slice = s.select(indices)?;
                let confusion = confusion_at(&slice, threshold);
                (
                    slice.positives(),
                    auc_roc(&slice).ok(),
                    confusion.fnr(),
                    confusion.precision(),
                )
            };
            let evaluable = n >= config.min_group_size && auc.is_some() && fnr.is_some();
            if !evaluable {
                if n < config.min_group_size {
                    warnings.push(format!(
                        "group {} (n = {n}) below minimum evaluable size {}; excluded from gaps",
                        key.label(),
                        config.min_group_size
                    ));
                } else {
                    warnings.push(format!(
                        "group {} has a single outcome class; excluded from gaps",
                        key.label()
                    ));
                }
            }
            reports.push(SubgroupReport {
                key,
                group: key.label().to_string(),
                n,
                positives,
                evaluable,
                auc,
                fnr,
                ppv,
            });
        }

        let evaluable: Vec<&SubgroupReport> = reports.iter().filter(|r| r.evaluable).collect();
        let (auc_gap, fnr_gap, in_verdict, within_gates) = if evaluable.len() >= 2 {
            let auc_gap = spread(evaluable.iter().map(|r| r.auc.expect("evaluable")));
            let fnr_gap = spread(evaluable.iter().map(|r| r.fnr.expect("evaluable")));
            let within = auc_gap <= config.auc_gate && fnr_gap <= config.fnr_gate;
            (Some(auc_gap), Some(fnr_gap), true, Some(within))
        } else {
            warnings.push(format!(
                "dimension {}: fewer than 2 evaluable groups; gaps not assessed",
                dimension.as_str()
            ));
            (None, None, false, None)
        };
        dimensions.push(DimensionAudit {
            dimension,
            evaluable_groups: evaluable.len(),
            groups: reports,
            auc_gap,
            fnr_gap,
            in_verdict,
            within_gates,
        });
    }

    if dimensions.is_empty() {
        return Err(Error::invalid_input("audit requires at least one group"));
    }
    let assessed = dimensions.iter().filter(|d| d.in_verdict).count();
    let verdict = if assessed == 0 {
        warnings.push("no dimension had enough evaluable groups; verdict passes vacuously".into());
        Verdict::Pass
    } else if dimensions
        .iter()
        .all(|d| d.within_gates.unwrap_or(true))
    {
        Verdict::Pass
    } else {
        Verdict::TriggerPostprocess
    };

    Ok(FairnessAudit {
        threshold,
        config,
        dimensions,
        verdict,
        warnings,
    })
}

fn check_group_indices(s: &ScoredSet, groups: &BTreeMap<SubgroupKey, Vec<usize>>) -> Result<()> {
    if groups.is_empty() {
        return Err(Error::invalid_input("at least one group is required"));
    }
    for (key, indices) in groups {
        if let Some(&bad) = indices.iter().find(|&&i| i >= s.len()) {
            return Err(Error::invalid_input(format!(
                "group {}: index {bad} out of range for {} scored records",
                key.label(),
                s.len()
            )));
        }
    }
    Ok(())
}

fn spread(values: impl Iterator<Item = f64>) -> f64 {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for v in values {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    hi - lo
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyMode {
    Randomized,
    DeterministicNearest,
}

/// Per-group decision rule. In randomized mode the rule classifies with
/// threshold `t_lo` with probability `p` (else `t_hi`) on a fraction `q`
/// of decisions; the remaining `1 - q` are a coin with positive rate equal
/// to the policy's target FPR. The coin leg pulls a group whose ROC hull
/// passes above the shared target straight down onto it without moving the
/// false-positive rate. Groups whose hull touches the target have `q = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupPolicy {
    pub key: SubgroupKey,
    pub group: String,
    pub t_lo: f64,
    pub t_hi: f64,
    pub p: f64,
    pub q: f64,
}

/// Equalized-odds policy over the groups of one audit dimension: a shared
/// target operating point plus the per-group rules that realize it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EqualizedOddsPolicy {
    pub dimension: Dimension,
    pub mode: PolicyMode,
    pub target_fpr: f64,
    pub target_tpr: f64,
    /// Pooled Youden threshold; applied unchanged to records whose group
    /// is missing from the policy.
    pub fallback_threshold: f64,
    pub groups: Vec<GroupPolicy>,
    pub warnings: Vec<String>,
}

impl EqualizedOddsPolicy {
    pub fn group(&self, key: SubgroupKey) -> Option<&GroupPolicy> {
        self.groups.iter().find(|g| g.key == key)
    }

    pub fn to_json(&self) -> Result<String> {
        let mut text = serde_json::to_string_pretty(self)
            .map_err(|e| Error::invalid_input(format!("policy serialization failed: {e}")))?;
        text.push('\n');
        Ok(text)
    }
}

/// Decision from [`apply_equalized_odds`]. `used_fallback` flags records
/// whose group was absent from the policy and were classified at the
/// global fallback threshold instead.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EoDecision {
    pub positive: bool,
    pub used_fallback: bool,
}

/// One vertex of a group's upper ROC hull, carrying the threshold that
/// attains it.
#[derive(Debug, Clone, Copy, PartialEq)]
struct HullVertex {
    fpr: f64,
    tpr: f64,
    threshold: f64,
}

/// Fits per-group threshold rules equalizing TPR and FPR across the groups
/// of a single dimension. The shared target maximizes TPR - FPR over the
/// intersection of the groups' ROC convex hulls; each group then realizes
/// the target as a convex mix of the hull vertices bracketing it (plus a
/// chance coin when its hull passes above the target). Deterministic mode
/// instead picks each group's observed operating point nearest the target.
pub fn fit_equalized_odds(
    s: &ScoredSet,
    groups: &BTreeMap<SubgroupKey, Vec<usize>>,
    mode: PolicyMode,
) -> Result<EqualizedOddsPolicy> {
    check_group_indices(s, groups)?;
    let dimension = groups.keys().next().expect("non-empty").dimension();
    if groups.keys().any(|k| k.dimension() != dimension) {
        return Err(Error::invalid_input(
            "equalized odds groups must share one dimension",
        ));
    }
    let fallback = youden_threshold(s)?;

    let mut keys = Vec::with_capacity(groups.len());
    let mut curves = Vec::with_capacity(groups.len());
    let mut hulls = Vec::with_capacity(groups.len());
    for (key, indices) in groups {
        let slice = s
            .select(indices)
            .map_err(|e| Error::invalid_input(format!("group {}: {e}", key.label())))?;
        let points = roc_curve(&slice)
            .map_err(|e| Error::invalid_input(format!("group {}: {e}", key.label())))?;
        hulls.push(upper_hull(&points));
        curves.push(points);
        keys.push(*key);
    }

    let mut warnings = Vec::new();
    let best = best_shared_point(&hulls);
    let (target_fpr, target_tpr, chord) = if best.2 > CHANCE_MARGIN {
        (best.0, best.1, false)
    } else {
        // No group-feasible point beats the chance diagonal; equalize on
        // the chord at the pooled positive rate of the fallback threshold.
        warnings.push(
            "hull intersection offers no operating point above the chance diagonal; \
             falling back to the (0,0)-(1,1) chord"
                .to_string(),
        );
        let rate = s
            .scores()
            .iter()
            .filter(|&&v| v >= fallback.threshold)
            .count() as f64
            / s.len() as f64;
        (rate, rate, true)
    };

    let mut out = Vec::with_capacity(keys.len());
    for ((key, hull), points) in keys.iter().zip(&hulls).zip(&curves) {
        let policy = match (mode, chord) {
            (PolicyMode::Randomized, true) => GroupPolicy {
                key: *key,
                group: key.label().to_string(),
                t_lo: fallback.threshold,
                t_hi: fallback.threshold,
                p: 1.0,
                // q = 0: every decision comes from the coin at the target
                // rate, which sits on the chord for every group.
                q: 0.0,
            },
            (PolicyMode::Randomized, false) => {
                realize_target(*key, hull, target_fpr, target_tpr)
            }
            (PolicyMode::DeterministicNearest, _) => {
                let t = nearest_threshold(points, target_fpr, target_tpr);
                GroupPolicy {
                    key: *key,
                    group: key.label().to_string(),
                    t_lo: t,
                    t_hi: t,
                    p: 1.0,
                    q: 1.0,
                }
            }
        };
        debug_assert!(policy.t_lo <= policy.t_hi);
        debug_assert!((0.0..=1.0).contains(&policy.p) && (0.0..=1.0).contains(&policy.q));
        out.push(policy);
    }

    Ok(EqualizedOddsPolicy {
        dimension,
        mode,
        target_fpr,
        target_tpr,
        fallback_threshold: fallback.threshold,
        groups: out,
        warnings,
    })
}

/// Classifies one record under the policy. Randomized decisions draw from
/// a stream keyed by (rng_seed, record_id), so replays of the same record
/// are bit-identical while distinct records decorrelate.
pub fn apply_equalized_odds(
    policy: &EqualizedOddsPolicy,
    score: f64,
    group: SubgroupKey,
    record_id: u64,
    rng_seed: u64,
) -> Result<EoDecision> {
    if !score.is_finite() {
        return Err(Error::invalid_input("score must be finite"));
    }
    let Some(rule) = policy.group(group) else {
        return Ok(EoDecision {
            positive: score >= policy.fallback_threshold,
            used_fallback: true,
        });
    };
    let positive = match policy.mode {
        PolicyMode::DeterministicNearest => score >= rule.t_lo,
        PolicyMode::Randomized => {
            let mut rng = sub_rng(rng_seed, record_id);
            let mix: f64 = rng.random();
            if mix < rule.q {
                let pick: f64 = rng.random();
                let threshold = if pick < rule.p { rule.t_lo } else { rule.t_hi };
                score >= threshold
            } else {
                rng.random::<f64>() < policy.target_fpr
            }
        }
    };
    Ok(EoDecision {
        positive,
        used_fallback: false,
    })
}

/// Upper convex hull of a ROC staircase, left to right. Points sharing an
/// FPR collapse to the highest TPR first, so every kept vertex is the best
/// operating point at its false-positive rate.
fn upper_hull(points: &[RocPoint]) -> Vec<HullVertex> {
    let mut columns: Vec<HullVertex> = Vec::new();
    for p in points {
        let v = HullVertex {
            fpr: p.fpr,
            tpr: p.tpr,
            threshold: p.threshold,
        };
        match columns.last_mut() {
            // roc_curve emits ascending TPR within an FPR column; the last
            // point of the column dominates the rest.
            Some(last) if last.fpr == v.fpr => *last = v,
            _ => columns.push(v),
        }
    }
    let mut hull: Vec<HullVertex> = Vec::with_capacity(columns.len());
    for v in columns {
        while hull.len() >= 2 {
            let a = hull[hull.len() - 2];
            let b = hull[hull.len() - 1];
            // Pop b when it sits on or below the chord a -> v.
            let cross = (b.fpr - a.fpr) * (v.tpr - a.tpr) - (b.tpr - a.tpr) * (v.fpr - a.fpr);
            if cross >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(v);
    }
    hull
}

/// Hull height at false-positive rate `f` (linear between vertices).
fn hull_at(hull: &[HullVertex], f: f64) -> f64 {
    let i = hull.partition_point(|v| v.fpr <= f);
    if i == 0 {
        return hull[0].tpr;
    }
    if i == hull.len() {
        return hull[hull.len() - 1].tpr;
    }
    let a = hull[i - 1];
    let b = hull[i];
    a.tpr + (b.tpr - a.tpr) * (f - a.fpr) / (b.fpr - a.fpr)
}

/// Vertices bracketing `f` plus the weight on the left vertex; a weight of
/// 1 means `f` lands exactly on a vertex.
fn hull_bracket(hull: &[HullVertex], f: f64) -> (HullVertex, HullVertex, f64) {
    let i = hull.partition_point(|v| v.fpr <= f);
    if i == 0 {
        return (hull[0], hull[0], 1.0);
    }
    if i == hull.len() {
        let v = hull[hull.len() - 1];
        return (v, v, 1.0);
    }
    let a = hull[i - 1];
    let b = hull[i];
    if a.fpr == f {
        return (a, a, 1.0);
    }
    let alpha = (b.fpr - f) / (b.fpr - a.fpr);
    (a, b, alpha)
}

/// (FPR*, TPR*, J*) maximizing TPR - FPR over the pointwise minimum of the
/// hulls. The objective is piecewise linear and concave, so the maximum
/// sits at a hull vertex or at a crossing of two hull edges; ties resolve
/// to the smallest FPR.
fn best_shared_point(hulls: &[Vec<HullVertex>]) -> (f64, f64, f64) {
    let mut fprs: Vec<f64> = hulls
        .iter()
        .flat_map(|h| h.iter().map(|v| v.fpr))
        .collect();
    fprs.sort_by(f64::total_cmp);
    fprs.dedup();

    let envelope = |f: f64| {
        hulls
            .iter()
            .map(|h| hull_at(h, f))
            .fold(f64::INFINITY, f64::min)
    };
    let mut best = (0.0, envelope(0.0), envelope(0.0));
    let consider = |f: f64, best: &mut (f64, f64, f64)| {
        let e = envelope(f);
        if e - f > best.2 {
            *best = (f, e, e - f);
        }
    };
    for window in fprs.windows(2) {
        let (f1, f2) = (window[0], window[1]);
        consider(f1, &mut best);
        consider(f2, &mut best);
        if f2 <= f1 {
            continue;
        }
        // Between consecutive vertex FPRs every hull is one line; the
        // envelope can only peak where two of those lines cross.
        let lines: Vec<(f64, f64)> = hulls
            .iter()
            .map(|h| {
                let y1 = hull_at(h, f1);
                let y2 = hull_at(h, f2);
                let m = (y2 - y1) / (f2 - f1);
                (m, y1 - m * f1)
            })
            .collect();
        for (i, &(mi, ci)) in lines.iter().enumerate() {
            for &(mj, cj) in lines.iter().skip(i + 1) {
                if mi == mj {
                    continue;
                }
                let fx = (cj - ci) / (mi - mj);
                if fx > f1 && fx < f2 {
                    consider(fx, &mut best);
                }
            }
        }
    }
    best
}

/// Builds the randomized rule putting a group exactly on (FPR*, TPR*).
/// The threshold mix lands on the group's hull at FPR*; when that hull
/// point lies above TPR*, the chance-coin leg (`q < 1`) mixes it down the
/// vertical toward the chord.
fn realize_target(key: SubgroupKey, hull: &[HullVertex], fpr: f64, tpr: f64) -> GroupPolicy {
    let (a, b, alpha) = hull_bracket(hull, fpr);
    let hull_tpr = alpha * a.tpr + (1.0 - alpha) * b.tpr;
    // Vertex a has the smaller FPR and therefore the larger threshold; p
    // weights the lower threshold, which is chosen with probability 1 - alpha.
    let (t_lo, t_hi, p) = if alpha >= 1.0 {
        (a.threshold, a.threshold, 1.0)
    } else if alpha <= 0.0 {
        (b.threshold, b.threshold, 1.0)
    } else {
        (b.threshold, a.threshold, 1.0 - alpha)
    };
    let q = if hull_tpr - fpr > CHANCE_MARGIN {
        ((tpr - fpr) / (hull_tpr - fpr)).clamp(0.0, 1.0)
    } else {
        1.0
    };
    GroupPolicy {
        key,
        group: key.label().to_string(),
        t_lo,
        t_hi,
        p,
        q,
    }
}

/// Observed operating point nearest the target (Euclidean); ties keep the
/// smaller FPR.
fn nearest_threshold(points: &[RocPoint], fpr: f64, tpr: f64) -> f64 {
    points
        .iter()
        .min_by(|u, v| {
            let du = (u.fpr - fpr).powi(2) + (u.tpr - tpr).powi(2);
            let dv = (v.fpr - fpr).powi(2) + (v.tpr - tpr).powi(2);
            du.total_cmp(&dv)
        })
        .expect("roc curve is non-empty")
        .threshold
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cohort::{
        AgeBand, BiasKnob, Gender, GeneratorConfig, Insurance, MissingFlags, PatientRecord, Race,
    };
    use crate::model::gbdt::sigmoid;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn record(age: u32, gender: Gender, race: Race, insurance: Insurance) -> PatientRecord {
        PatientRecord {
            admission_id: 1,
            admission_time: 0,
            age,
            gender,
            race,
            insurance,
            length_of_stay: Some(3.0),
            n_diagnoses: Some(5),
            n_procedures: Some(1),
            n_medications: Some(8),
            prior_admissions_12mo: Some(0),
            charlson_index: Some(2),
            emergency_admission: false,
            high_risk_med: false,
            polypharmacy: false,
            non_home_admission_source: false,
            label: Some(false),
            missing: MissingFlags::default(),
        }
    }

    #[test]
    fn single_record_lands_in_one_group_per_dimension() {
        let cohort = Cohort::new(vec![record(
            70,
            Gender::Male,
            Race::White,
            Insurance::Medicare,
        )]);
        let map = slice_subgroups(&cohort).unwrap();
        assert_eq!(map.len(), 16);
        let expected = [
            SubgroupKey::Gender(Gender::Male),
            SubgroupKey::Race(Race::White),
            SubgroupKey::Insurance(Insurance::Medicare),
            SubgroupKey::AgeBand(AgeBand::Age66To75),
        ];
        for (key, indices) in &map {
            if expected.contains(key) {
                assert_eq!(indices.as_slice(), &[0], "{}", key.label());
            } else {
                assert!(indices.is_empty(), "{}", key.label());
            }
        }
    }

    #[test]
    fn subgroups_partition_the_cohort_per_dimension() {
        let config = GeneratorConfig {
            n: 500,
            seed: 17,
            ..GeneratorConfig::default()
        };
        let cohort = crate::cohort::generate_cohort(&config).unwrap();
        let map = slice_subgroups(&cohort).unwrap();
        for dimension in Dimension::ALL {
            let mut seen = vec![0usize; cohort.len()];
            let mut total = 0;
            for (key, indices) in &map {
                if key.dimension() != dimension {
                    continue;
                }
                total += indices.len();
                for &i in indices {
                    seen[i] += 1;
                }
            }
            assert_eq!(total, cohort.len(), "{}", dimension.as_str());
            assert!(seen.iter().all(|&c| c == 1), "{}", dimension.as_str());
        }
    }

    fn set(scores: Vec<f64>, labels: Vec<bool>) -> ScoredSet {
        ScoredSet::new(scores, labels).unwrap()
    }

    /// Concatenates per-group samples into one scored set plus the group
    /// index map.
    fn pooled(
        blocks: Vec<(SubgroupKey, Vec<f64>, Vec<bool>)>,
    ) -> (ScoredSet, BTreeMap<SubgroupKey, Vec<usize>>) {
        let mut scores = Vec::new();
        let mut labels = Vec::new();
        let mut groups = BTreeMap::new();
        for (key, s, l) in blocks {
            assert_eq!(s.len(), l.len());
            let start = scores.len();
            scores.extend(s);
            labels.extend(l);
            groups.insert(key, (start..scores.len()).collect());
        }
        (set(scores, labels), groups)
    }

    /// 40 positives and 25 negatives arranged so AUC is exactly
    /// `millis` / 1000: `millis / 25` positives above every negative, one
    /// positive beating exactly `millis % 25` negatives, the rest below
    /// all of them. No ties.
    fn scores_with_auc(millis: u32) -> (Vec<f64>, Vec<bool>) {
        assert!(millis <= 1000);
        let full = (millis / 25) as usize;
        let rem = (millis % 25) as usize;
        let mut scores = Vec::new();
        let mut labels = Vec::new();
        for j in 0..25 {
            scores.push(0.30 + j as f64 * 0.01);
            labels.push(false);
        }
        for _ in 0..full {
            scores.push(0.9);
            labels.push(true);
        }
        let mut rest = 40 - full;
        if rem > 0 {
            scores.push(0.30 + rem as f64 * 0.01 - 0.005);
            labels.push(true);
            rest -= 1;
        }
        for _ in 0..rest {
            scores.push(0.1);
            labels.push(true);
        }
        (scores, labels)
    }

    #[test]
    fn exact_auc_construction_is_correct() {
        for millis in [500, 678, 685, 695, 708, 1000] {
            let (scores, labels) = scores_with_auc(millis);
            let auc = auc_roc(&set(scores, labels)).unwrap();
            assert!(
                (auc - millis as f64 / 1000.0).abs() < 1e-12,
                "millis {millis}: auc {auc}"
            );
        }
    }

    #[test]
    fn insurance_auc_gap_of_030_passes_the_gate() {
        let keys = [
            Insurance::Medicare,
            Insurance::Medicaid,
            Insurance::Private,
            Insurance::Other,
        ];
        let blocks = [695, 678, 685, 708]
            .iter()
            .zip(keys)
            .map(|(&millis, ins)| {
                let (s, l) = scores_with_auc(millis);
                (SubgroupKey::Insurance(ins), s, l)
            })
            .collect();
        let (s, groups) = pooled(blocks);
        let audit = audit_fairness(&s, &groups, 0.5, AuditConfig::default()).unwrap();
        assert_eq!(audit.dimensions.len(), 1);
        let dim = &audit.dimensions[0];
        assert_eq!(dim.dimension, Dimension::Insurance);
        assert_eq!(dim.evaluable_groups, 4);
        assert!((dim.auc_gap.unwrap() - 0.030).abs() < 1e-12);
        assert_eq!(dim.within_gates, Some(true));
        assert_eq!(audit.verdict, Verdict::Pass);
    }

    /// Two gender groups with equal AUC (perfect separation in both) but
    /// positives split across the threshold differently, isolating the FNR
    /// gate. Negatives sit at 0.05, positives at 0.6 (detected) or 0.3
    /// (missed but still above every negative).
    fn fnr_gap_blocks(missed_a: usize, missed_b: usize) -> (ScoredSet, BTreeMap<SubgroupKey, Vec<usize>>) {
        let block = |missed: usize| {
            let mut s = vec![0.05; 60];
            let mut l = vec![false; 60];
            s.extend(std::iter::repeat(0.6).take(60 - missed));
            s.extend(std::iter::repeat(0.3).take(missed));
            l.extend(std::iter::repeat(true).take(60));
            (s, l)
        };
        let (sa, la) = block(missed_a);
        let (sb, lb) = block(missed_b);
        pooled(vec![
            (SubgroupKey::Gender(Gender::Female), sa, la),
            (SubgroupKey::Gender(Gender::Male), sb, lb),
        ])
    }

    #[test]
    fn fnr_gap_alone_triggers_postprocess() {
        let (s, groups) = fnr_gap_blocks(0, 30);
        let audit = audit_fairness(&s, &groups, 0.5, AuditConfig::default()).unwrap();
        let dim = &audit.dimensions[0];
        assert_eq!(dim.auc_gap, Some(0.0));
        assert!((dim.fnr_gap.unwrap() - 0.5).abs() < 1e-12);
        assert_eq!(audit.verdict, Verdict::TriggerPostprocess);
    }

    #[test]
    fn auc_gap_alone_triggers_postprocess() {
        // Group A separates perfectly; group B inverts the ranking while
        // keeping FNR at 0 (all positives above the threshold).
        let (s, groups) = pooled(vec![
            (
                SubgroupKey::Gender(Gender::Female),
                [vec![0.9; 60], vec![0.1; 60]].concat(),
                [vec![true; 60], vec![false; 60]].concat(),
            ),
            (
                SubgroupKey::Gender(Gender::Male),
                [vec![0.6; 60], vec![0.7; 60]].concat(),
                [vec![true; 60], vec![false; 60]].concat(),
            ),
        ]);
        let audit = audit_fairness(&s, &groups, 0.5, AuditConfig::default()).unwrap();
        let dim = &audit.dimensions[0];
        assert_eq!(dim.auc_gap, Some(1.0));
        assert_eq!(dim.fnr_gap, Some(0.0));
        assert_eq!(audit.verdict, Verdict::TriggerPostprocess);
    }

    #[test]
    fn verdict_truth_table_over_gap_combinations() {
        for (auc_bad, fnr_bad) in [(false, false), (true, false), (false, true), (true, true)] {
            let female = if auc_bad {
                // Inverted ranking: AUC 0, FNR 0.
                ([vec![0.6; 60], vec![0.7; 60]].concat(), [vec![true; 60], vec![false; 60]].concat())
            } else {
                ([vec![0.9; 60], vec![0.1; 60]].concat(), [vec![true; 60], vec![false; 60]].concat())
            };
            let missed = if fnr_bad { 30 } else { 0 };
            let male = (
                [vec![0.9; 60 - missed], vec![0.3; missed], vec![0.1; 60]].concat(),
                [vec![true; 60], vec![false; 60]].concat(),
            );
            let (s, groups) = pooled(vec![
                (SubgroupKey::Gender(Gender::Female), female.0, female.1),
                (SubgroupKey::Gender(Gender::Male), male.0, male.1),
            ]);
            let audit = audit_fairness(&s, &groups, 0.5, AuditConfig::default()).unwrap();
            let expected = if auc_bad || fnr_bad {
                Verdict::TriggerPostprocess
            } else {
                Verdict::Pass
            };
            assert_eq!(audit.verdict, expected, "auc_bad={auc_bad} fnr_bad={fnr_bad}");
        }
    }

    #[test]
    fn small_groups_report_metrics_but_stay_out_of_gaps() {
        let (s678, l678) = scores_with_auc(678);
        let (s708, l708) = scores_with_auc(708);
        let (s, groups) = pooled(vec![
            (SubgroupKey::Race(Race::White), s678, l678),
            (SubgroupKey::Race(Race::Black), s708, l708),
            (
                SubgroupKey::Race(Race::Hispanic),
                vec![0.9, 0.9, 0.1, 0.1],
                vec![true, true, false, false],
            ),
        ]);
        let audit = audit_fairness(&s, &groups, 0.5, AuditConfig::default()).unwrap();
        let dim = &audit.dimensions[0];
        assert_eq!(dim.evaluable_groups, 2);
        let small = dim
            .groups
            .iter()
            .find(|g| g.key == SubgroupKey::Race(Race::Hispanic))
            .unwrap();
        assert!(!small.evaluable);
        assert_eq!(small.auc, Some(1.0));
        // The perfect small group would have widened the AUC gap to 0.322.
        assert!((dim.auc_gap.unwrap() - 0.030).abs() < 1e-12);
        assert!(audit.warnings.iter().any(|w| w.contains("hispanic")));
    }

    #[test]
    fn single_class_group_is_excluded_with_warning() {
        let (s678, l678) = scores_with_auc(678);
        let (s708, l708) = scores_with_auc(708);
        let (s, groups) = pooled(vec![
            (SubgroupKey::Race(Race::White), s678, l678),
            (SubgroupKey::Race(Race::Black), s708, l708),
            (SubgroupKey::Race(Race::OtherUnknown), vec![0.2; 80], vec![false; 80]),
        ]);
        let audit = audit_fairness(&s, &groups, 0.5, AuditConfig::default()).unwrap();
        let dim = &audit.dimensions[0];
        assert_eq!(dim.evaluable_groups, 2);
        let excluded = dim
            .groups
            .iter()
            .find(|g| g.key == SubgroupKey::Race(Race::OtherUnknown))
            .unwrap();
        assert!(!excluded.evaluable);
        assert_eq!(excluded.auc, None);
        assert_eq!(excluded.fnr, None);
        assert!(audit
            .warnings
            .iter()
            .any(|w| w.contains("other") && w.contains("single outcome class")));
        assert_eq!(audit.verdict, Verdict::Pass);
    }

    #[test]
    fn dimension_with_one_evaluable_group_gets_null_gaps_and_vacuous_pass() {
        let (s695, l695) = scores_with_auc(695);
        let (s, groups) = pooled(vec![
            (SubgroupKey::Gender(Gender::Female), s695, l695),
            (
                SubgroupKey::Gender(Gender::Male),
                vec![0.9, 0.1],
                vec![true, false],
            ),
        ]);
        let audit = audit_fairness(&s, &groups, 0.5, AuditConfig::default()).unwrap();
        let dim = &audit.dimensions[0];
        assert_eq!(dim.evaluable_groups, 1);
        assert_eq!(dim.auc_gap, None);
        assert_eq!(dim.fnr_gap, None);
        assert!(!dim.in_verdict);
        assert_eq!(dim.within_gates, None);
        assert_eq!(audit.verdict, Verdict::Pass);
        assert!(audit.warnings.iter().any(|w| w.contains("fewer than 2")));
        assert!(audit.warnings.iter().any(|w| w.contains("vacuously")));
    }

    #[test]
    fn subgroup_auc_matches_direct_evaluation_on_the_slice() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let n = 400;
        let scores: Vec<f64> = (0..n).map(|_| rng.random()).collect();
        let labels: Vec<bool> = scores
            .iter()
            .map(|&v| rng.random::<f64>() < 0.3 + 0.4 * v)
            .collect();
        let s = set(scores, labels);
        let mut groups = BTreeMap::new();
        groups.insert(
            SubgroupKey::Gender(Gender::Female),
            (0..n).filter(|i| i % 3 != 0).collect::<Vec<_>>(),
        );
        groups.insert(
            SubgroupKey::Gender(Gender::Male),
            (0..n).filter(|i| i % 3 == 0).collect::<Vec<_>>(),
        );
        let audit = audit_fairness(&s, &groups, 0.4, AuditConfig::default()).unwrap();
        for report in &audit.dimensions[0].groups {
            let direct = auc_roc(&s.select(&groups[&report.key]).unwrap()).unwrap();
            assert_eq!(report.auc, Some(direct), "{}", report.group);
        }
    }

    #[test]
    fn adding_an_interior_group_leaves_gaps_unchanged() {
        let keys = [Insurance::Medicare, Insurance::Medicaid, Insurance::Private];
        let with_groups = |millis: &[u32]| {
            let blocks = millis
                .iter()
                .zip(keys)
                .map(|(&m, ins)| {
                    let (s, l) = scores_with_auc(m);
                    (SubgroupKey::Insurance(ins), s, l)
                })
                .collect();
            let (s, groups) = pooled(blocks);
            audit_fairness(&s, &groups, 0.5, AuditConfig::default()).unwrap()
        };
        let two = with_groups(&[678, 708]);
        let three = with_groups(&[678, 708, 695]);
        assert_eq!(two.dimensions[0].auc_gap, three.dimensions[0].auc_gap);
        assert_eq!(two.dimensions[0].fnr_gap, three.dimensions[0].fnr_gap);
    }

    #[test]
    fn audit_serializes_to_json_and_csv() {
        let (s, groups) = fnr_gap_blocks(0, 30);
        let audit = audit_fairness(&s, &groups, 0.5, AuditConfig::default()).unwrap();
        let json = audit.to_json().unwrap();
        assert!(json.contains("\"verdict\": \"trigger_postprocess\""));
        assert!(json.ends_with('\n'));
        let reloaded: FairnessAudit = serde_json::from_str(&json).unwrap();
        assert_eq!(reloaded, audit);
        let csv = audit.to_csv();
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "dimension,group,n,positives,evaluable,auc,fnr,ppv"
        );
        assert_eq!(csv.lines().count(), 1 + 2);
        assert!(csv.contains("gender,female,120,60,true,"));
    }

    #[test]
    fn out_of_range_index_is_rejected() {
        let s = set(vec![0.2, 0.8], vec![false, true]);
        let mut groups = BTreeMap::new();
        groups.insert(SubgroupKey::Gender(Gender::Female), vec![0, 5]);
        let err = audit_fairness(&s, &groups, 0.5, AuditConfig::default()).unwrap_err();
        assert!(err.to_string().contains("out of range"));
    }

    #[test]
    fn upper_hull_drops_dominated_points() {
        let mk = |threshold: f64, fpr: f64, tpr: f64| RocPoint { threshold, fpr, tpr };
        let points = vec![
            mk(2.0, 0.0, 0.0),
            mk(0.9, 0.2, 0.1),
            mk(0.7, 0.4, 0.8),
            mk(0.5, 0.6, 0.7),
            mk(0.3, 1.0, 1.0),
        ];
        let hull = upper_hull(&points);
        let coords: Vec<(f64, f64)> = hull.iter().map(|v| (v.fpr, v.tpr)).collect();
        assert_eq!(coords, vec![(0.0, 0.0), (0.4, 0.8), (1.0, 1.0)]);
        assert_eq!(hull[1].threshold, 0.7);
        assert!((hull_at(&hull, 0.2) - 0.4).abs() < 1e-12);
        assert!((hull_at(&hull, 0.7) - 0.9).abs() < 1e-12);
    }

    #[test]
    fn hull_collapses_vertical_runs_to_the_best_point() {
        let mk = |threshold: f64, fpr: f64, tpr: f64| RocPoint { threshold, fpr, tpr };
        let points = vec![
            mk(2.0, 0.0, 0.0),
            mk(0.9, 0.0, 0.5),
            mk(0.8, 0.0, 0.75),
            mk(0.4, 0.5, 1.0),
            mk(0.2, 1.0, 1.0),
        ];
        let hull = upper_hull(&points);
        assert_eq!(hull[0].tpr, 0.75);
        assert_eq!(hull[0].threshold, 0.8);
    }

    #[test]
    fn single_group_policy_is_its_own_youden_threshold() {
        let scores = vec![0.9, 0.85, 0.8, 0.4, 0.7, 0.3, 0.2];
        let labels = vec![true, true, true, true, false, false, false];
        let s = set(scores.clone(), labels);
        let youden = youden_threshold(&s).unwrap();
        let mut groups = BTreeMap::new();
        groups.insert(SubgroupKey::Gender(Gender::Female), (0..s.len()).collect::<Vec<_>>());
        let policy = fit_equalized_odds(&s, &groups, PolicyMode::Randomized).unwrap();
        assert_eq!(policy.target_fpr, youden.fpr);
        assert_eq!(policy.target_tpr, youden.tpr);
        let rule = policy.group(SubgroupKey::Gender(Gender::Female)).unwrap();
        assert_eq!(rule.t_lo, youden.threshold);
        assert_eq!(rule.t_hi, youden.threshold);
        assert_eq!(rule.p, 1.0);
        assert_eq!(rule.q, 1.0);
        assert!(policy.warnings.is_empty());
        for (i, &score) in scores.iter().enumerate() {
            let d = apply_equalized_odds(&policy, score, SubgroupKey::Gender(Gender::Female), i as u64, 7)
                .unwrap();
            assert_eq!(d.positive, score >= youden.threshold);
            assert!(!d.used_fallback);
        }
    }

    #[test]
    fn identical_groups_get_identical_rules_and_global_threshold_behavior() {
        let base_scores = vec![0.9, 0.85, 0.8, 0.4, 0.7, 0.3, 0.2, 0.6];
        let base_labels = vec![true, true, true, true, false, false, false, false];
        let (s, groups) = pooled(vec![
            (
                SubgroupKey::Gender(Gender::Female),
                base_scores.clone(),
                base_labels.clone(),
            ),
            (SubgroupKey::Gender(Gender::Male), base_scores.clone(), base_labels),
        ]);
        let policy = fit_equalized_odds(&s, &groups, PolicyMode::Randomized).unwrap();
        let female = policy.group(SubgroupKey::Gender(Gender::Female)).unwrap();
        let male = policy.group(SubgroupKey::Gender(Gender::Male)).unwrap();
        assert_eq!(
            (female.t_lo, female.t_hi, female.p, female.q),
            (male.t_lo, male.t_hi, male.p, male.q)
        );
        // Both groups share the pooled distribution, so the fitted policy
        // reproduces plain global thresholding.
        assert_eq!(female.p, 1.0);
        assert_eq!(female.q, 1.0);
        assert_eq!(female.t_lo, policy.fallback_threshold);
        for (key, indices) in &groups {
            for &i in indices {
                let d = apply_equalized_odds(&policy, s.scores()[i], *key, i as u64, 11).unwrap();
                assert_eq!(d.positive, s.scores()[i] >= policy.fallback_threshold);
            }
        }
    }

    /// Expected per-group (TPR, FPR) under a randomized policy, computed
    /// analytically from the mixture rather than sampled.
    fn expected_rates(
        policy: &EqualizedOddsPolicy,
        s: &ScoredSet,
        indices: &[usize],
        key: SubgroupKey,
    ) -> (f64, f64) {
        let rule = policy.group(key).unwrap();
        let prob = |score: f64| {
            let mix = rule.p * f64::from(u8::from(score >= rule.t_lo))
                + (1.0 - rule.p) * f64::from(u8::from(score >= rule.t_hi));
            rule.q * mix + (1.0 - rule.q) * policy.target_fpr
        };
        let (mut tp, mut fp, mut pos, mut neg) = (0.0, 0.0, 0usize, 0usize);
        for &i in indices {
            let p = prob(s.scores()[i]);
            if s.labels()[i] {
                tp += p;
                pos += 1;
            } else {
                fp += p;
                neg += 1;
            }
        }
        (tp / pos as f64, fp / neg as f64)
    }

    #[test]
    fn randomized_policies_equalize_rates_exactly_in_expectation() {
        let mut rng = ChaCha8Rng::seed_from_u64(4242);
        let group_keys = [
            SubgroupKey::Insurance(Insurance::Medicare),
            SubgroupKey::Insurance(Insurance::Medicaid),
            SubgroupKey::Insurance(Insurance::Private),
            SubgroupKey::Insurance(Insurance::Other),
        ];
        for case in 0..20 {
            let n_groups = 2 + case % 3;
            let blocks = (0..n_groups)
                .map(|g| {
                    let n = 80 + (case * 13 + g * 7) % 120;
                    let sharpness = 1.0 + rng.random::<f64>() * 7.0;
                    let mut scores = Vec::with_capacity(n);
                    let mut labels = Vec::with_capacity(n);
                    for _ in 0..n {
                        let v: f64 = rng.random();
                        scores.push(v);
                        labels.push(rng.random::<f64>() < sigmoid(sharpness * (v - 0.5)));
                    }
                    // Both classes are a precondition of the fit.
                    labels[0] = true;
                    labels[1] = false;
                    (group_keys[g], scores, labels)
                })
                .collect();
            let (s, groups) = pooled(blocks);
            let policy = fit_equalized_odds(&s, &groups, PolicyMode::Randomized).unwrap();
            for (key, indices) in &groups {
                let rule = policy.group(*key).unwrap();
                assert!(rule.t_lo <= rule.t_hi, "case {case}");
                assert!((0.0..=1.0).contains(&rule.p), "case {case}");
                assert!((0.0..=1.0).contains(&rule.q), "case {case}");
                let (tpr, fpr) = expected_rates(&policy, &s, indices, *key);
                assert!(
                    (tpr - policy.target_tpr).abs() < 1e-9,
                    "case {case} {}: tpr {tpr} vs {}",
                    key.label(),
                    policy.target_tpr
                );
                assert!(
                    (fpr - policy.target_fpr).abs() < 1e-9,
                    "case {case} {}: fpr {fpr} vs {}",
                    key.label(),
                    policy.target_fpr
                );
            }
        }
    }

    #[test]
    fn biased_cohort_rates_equalize_within_two_points_after_applying() {
        let config = GeneratorConfig {
            n: 11_000,
            seed: 23,
            bias_knob: Some(BiasKnob {
                group: SubgroupKey::Gender(Gender::Female),
                multiplier: 2.0,
            }),
            ..GeneratorConfig::default()
        };
        let (cohort, truth) = crate::cohort::generate_cohort_with_truth(&config).unwrap();
        let scores: Vec<f64> = truth.logits.iter().map(|&z| sigmoid(z)).collect();
        let labels: Vec<bool> = cohort.records.iter().map(|r| r.label.unwrap()).collect();
        let s = set(scores.clone(), labels.clone());
        let all_groups = slice_subgroups(&cohort).unwrap();
        let groups: BTreeMap<SubgroupKey, Vec<usize>> = all_groups
            .into_iter()
            .filter(|(k, _)| k.dimension() == Dimension::Gender)
            .collect();
        for indices in groups.values() {
            assert!(indices.len() >= 5_000);
        }

        let policy = fit_equalized_odds(&s, &groups, PolicyMode::Randomized).unwrap();
        let mut measured = Vec::new();
        for (key, indices) in &groups {
            let (mut tp, mut fp, mut pos, mut neg) = (0usize, 0usize, 0usize, 0usize);
            for &i in indices {
                let record = &cohort.records[i];
                let d =
                    apply_equalized_odds(&policy, scores[i], *key, record.admission_id, 9).unwrap();
                match (labels[i], d.positive) {
                    (true, true) => tp += 1,
                    (true, false) => {}
                    (false, true) => fp += 1,
                    (false, false) => {}
                }
                if labels[i] {
                    pos += 1;
                } else {
                    neg += 1;
                }
            }
            measured.push((tp as f64 / pos as f64, fp as f64 / neg as f64));
        }
        let tpr_gap = (measured[0].0 - measured[1].0).abs();
        let fpr_gap = (measured[0].1 - measured[1].1).abs();
        assert!(tpr_gap <= 0.02, "tpr gap {tpr_gap}");
        assert!(fpr_gap <= 0.02, "fpr gap {fpr_gap}");
    }

    fn hand_policy(t_lo: f64, t_hi: f64, p: f64, q: f64) -> EqualizedOddsPolicy {
        EqualizedOddsPolicy {
            dimension: Dimension::Gender,
            mode: PolicyMode::Randomized,
            target_fpr: 0.25,
            target_tpr: 0.75,
            fallback_threshold: 0.5,
            groups: vec![GroupPolicy {
                key: SubgroupKey::Gender(Gender::Female),
                group: "female".to_string(),
                t_lo,
                t_hi,
                p,
                q,
            }],
            warnings: Vec::new(),
        }
    }

    #[test]
    fn p_equal_one_reduces_to_thresholding_at_t_lo() {
        let policy = hand_policy(0.3, 0.7, 1.0, 1.0);
        let key = SubgroupKey::Gender(Gender::Female);
        for (i, score) in [0.0, 0.29, 0.3, 0.31, 0.69, 0.7, 0.9].iter().enumerate() {
            let d = apply_equalized_odds(&policy, *score, key, i as u64, 13).unwrap();
            assert_eq!(d.positive, *score >= 0.3, "score {score}");
        }
    }

    #[test]
    fn score_below_both_thresholds_is_negative_for_any_p() {
        let key = SubgroupKey::Gender(Gender::Female);
        for p in [0.0, 0.25, 0.5, 0.75, 1.0] {
            let policy = hand_policy(0.3, 0.7, p, 1.0);
            for id in 0..200 {
                let d = apply_equalized_odds(&policy, 0.29, key, id, 13).unwrap();
                assert!(!d.positive, "p {p} id {id}");
            }
        }
    }

    #[test]
    fn between_threshold_decision_rate_approximates_p() {
        let policy = hand_policy(0.3, 0.7, 0.3, 1.0);
        let key = SubgroupKey::Gender(Gender::Female);
        let positives = (0..10_000)
            .filter(|&id| {
                apply_equalized_odds(&policy, 0.5, key, id, 17)
                    .unwrap()
                    .positive
            })
            .count();
        let rate = positives as f64 / 10_000.0;
        assert!((rate - 0.3).abs() <= 0.02, "rate {rate}");
    }

    #[test]
    fn unknown_group_falls_back_to_global_threshold_with_flag() {
        let policy = hand_policy(0.3, 0.7, 0.5, 1.0);
        let d = apply_equalized_odds(&policy, 0.6, SubgroupKey::Race(Race::White), 1, 13).unwrap();
        assert!(d.used_fallback);
        assert!(d.positive);
        let d = apply_equalized_odds(&policy, 0.4, SubgroupKey::Race(Race::White), 1, 13).unwrap();
        assert!(d.used_fallback);
        assert!(!d.positive);
    }

    #[test]
    fn decisions_replay_bit_for_bit_per_record() {
        let policy = hand_policy(0.3, 0.7, 0.5, 0.8);
        let key = SubgroupKey::Gender(Gender::Female);
        let run = || -> Vec<bool> {
            (0..500)
                .map(|id| {
                    apply_equalized_odds(&policy, 0.5, key, id, 29)
                        .unwrap()
                        .positive
                })
                .collect()
        };
        let first = run();
        assert_eq!(first, run());
        // Distinct records must not share one coin.
        assert!(first.iter().any(|&d| d));
        assert!(first.iter().any(|&d| !d));
    }

    #[test]
    fn uninformative_groups_fall_back_to_the_chord() {
        // Group B ranks positives below negatives: its hull is exactly the
        // chord, so no shared point beats chance.
        let (s, groups) = pooled(vec![
            (
                SubgroupKey::Gender(Gender::Female),
                [vec![0.9; 40], vec![0.1; 40]].concat(),
                [vec![true; 40], vec![false; 40]].concat(),
            ),
            (
                SubgroupKey::Gender(Gender::Male),
                [vec![0.2; 40], vec![0.8; 40]].concat(),
                [vec![true; 40], vec![false; 40]].concat(),
            ),
        ]);
        let policy = fit_equalized_odds(&s, &groups, PolicyMode::Randomized).unwrap();
        assert!(!policy.warnings.is_empty());
        assert_eq!(policy.target_fpr, policy.target_tpr);
        for rule in &policy.groups {
            assert_eq!(rule.q, 0.0);
        }
        // Decisions are score-independent coins at the target rate.
        let key = SubgroupKey::Gender(Gender::Female);
        let hits = (0..4_000)
            .filter(|&id| {
                apply_equalized_odds(&policy, 0.9, key, id, 31)
                    .unwrap()
                    .positive
            })
            .count();
        let rate = hits as f64 / 4_000.0;
        assert!((rate - policy.target_fpr).abs() <= 0.02, "rate {rate}");
    }

    #[test]
    fn deterministic_mode_picks_observed_points_near_the_target() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 600;
        let mut scores = Vec::with_capacity(2 * n);
        let mut labels = Vec::with_capacity(2 * n);
        for _ in 0..2 * n {
            let v: f64 = rng.random();
            scores.push(v);
            labels.push(rng.random::<f64>() < sigmoid(4.0 * (v - 0.5)));
        }
        labels[0] = true;
        labels[1] = false;
        labels[n] = true;
        labels[n + 1] = false;
        let s = set(scores.clone(), labels);
        let mut groups = BTreeMap::new();
        groups.insert(SubgroupKey::Gender(Gender::Female), (0..n).collect::<Vec<_>>());
        groups.insert(SubgroupKey::Gender(Gender::Male), (n..2 * n).collect::<Vec<_>>());
        let policy = fit_equalized_odds(&s, &groups, PolicyMode::DeterministicNearest).unwrap();
        for (key, indices) in &groups {
            let rule = policy.group(*key).unwrap();
            assert_eq!(rule.t_lo, rule.t_hi);
            assert_eq!((rule.p, rule.q), (1.0, 1.0));
            // The chosen threshold is an observed operating point; verify it
            // is no farther from the target than any other point.
            let slice = s.select(indices).unwrap();
            let points = roc_curve(&slice).unwrap();
            let chosen = points
                .iter()
                .find(|pt| pt.threshold == rule.t_lo)
                .expect("threshold comes from the curve");
            let d_chosen = (chosen.fpr - policy.target_fpr).powi(2)
                + (chosen.tpr - policy.target_tpr).powi(2);
            for pt in &points {
                let d = (pt.fpr - policy.target_fpr).powi(2) + (pt.tpr - policy.target_tpr).powi(2);
                assert!(d >= d_chosen - 1e-12);
            }
            // Deterministic application is plain thresholding.
            let d = apply_equalized_odds(&policy, rule.t_lo, *key, 0, 3).unwrap();
            assert!(d.positive);
        }
    }

    #[test]
    fn fit_rejects_single_class_groups_and_mixed_dimensions() {
        let (s, mut groups) = pooled(vec![
            (
                SubgroupKey::Gender(Gender::Female),
                vec![0.9, 0.8, 0.2, 0.1],
                vec![true, true, false, false],
            ),
            (
                SubgroupKey::Gender(Gender::Male),
                vec![0.9, 0.8, 0.7, 0.6],
                vec![true, true, true, true],
            ),
        ]);
        let err = fit_equalized_odds(&s, &groups, PolicyMode::Randomized).unwrap_err();
        assert!(err.to_string().contains("male"));

        groups.remove(&SubgroupKey::Gender(Gender::Male));
        groups.insert(SubgroupKey::Race(Race::White), vec![4, 5, 6, 7]);
        let err = fit_equalized_odds(&s, &groups, PolicyMode::Randomized).unwrap_err();
        assert!(err.to_string().contains("one dimension"));
    }

    #[test]
    fn policy_round_trips_through_json() {
        let (s, groups) = pooled(vec![
            (
                SubgroupKey::Gender(Gender::Female),
                vec![0.9, 0.8, 0.4, 0.2, 0.1, 0.7],
                vec![true, true, true, false, false, false],
            ),
            (
                SubgroupKey::Gender(Gender::Male),
                vec![0.85, 0.6, 0.3, 0.25, 0.15, 0.5],
                vec![true, true, true, false, false, false],
            ),
        ]);
        let policy = fit_equalized_odds(&s, &groups, PolicyMode::Randomized).unwrap();
        let json = policy.to_json().unwrap();
        let reloaded: EqualizedOddsPolicy = serde_json::from_str(&json).unwrap();
        assert_eq!(reloaded, policy);
    }
}

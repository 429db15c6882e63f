//! Seeded synthetic cohort generation.
//!
//! Records are drawn from a fixed demographic/clinical model, the true
//! readmission risk is a logistic function of the encoded features (plus an
//! optional non-additive interaction term), and labels are Bernoulli draws
//! from that risk. The intercept is auto-calibrated by bisection so expected
//! prevalence hits the configured target. Because the true logit of every
//! record is known, generated cohorts double as ground truth for scorer and
//! attribution tests.
//!
//! Determinism contract: equal configs (seed included) produce identical
//! cohorts, byte for byte once serialized. Independent concerns (covariates,
//! missingness, score noise, labels) draw from separate sub-streams of the
//! seed so that, for example, raising `missing_rate` never perturbs the
//! covariates or labels.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal, Normal, Poisson};
use serde::{Deserialize, Serialize};

use crate::cohort::record::{
    encode_record, FeatureVector, Gender, Insurance, MissingFlags, PatientRecord, Race,
    SubgroupKey,
};
use crate::cohort::schema::{self, slot, FEATURE_COUNT};
use crate::cohort::Cohort;
use crate::error::{Error, Result};

/// First admission timestamp: 2019-01-01T00:00:00Z.
const BASE_TIME: i64 = 1_546_300_800;
/// Spacing between consecutive admissions, seconds. Jitter stays below this
/// so admission times are strictly increasing in draw order.
const TIME_STEP: i64 = 360;

/// Non-additive coupling between two indicator features in the true risk.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InteractionKind {
    /// `coefficient * (a XOR b)`: invisible to any additive scorer because
    /// both marginals stay flat.
    Xor,
    /// `coefficient * a * b`.
    Product,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interaction {
    pub kind: InteractionKind,
    pub slot_a: usize,
    pub slot_b: usize,
    pub coefficient: f64,
}

impl Interaction {
    fn term(&self, x: &FeatureVector) -> f64 {
        let a = x.0[self.slot_a];
        let b = x.0[self.slot_b];
        match self.kind {
            InteractionKind::Xor => self.coefficient * (a + b - 2.0 * a * b),
            InteractionKind::Product => self.coefficient * a * b,
        }
    }

    fn validate(&self) -> Result<()> {
        for s in [self.slot_a, self.slot_b] {
            if s >= FEATURE_COUNT || schema::is_numeric_slot(s) {
                return Err(Error::invalid_config(format!(
                    "interaction slot {s} must name an indicator feature"
                )));
            }
        }
        if self.slot_a == self.slot_b {
            return Err(Error::invalid_config("interaction slots must differ"));
        }
        if !self.coefficient.is_finite() {
            return Err(Error::invalid_config("interaction coefficient must be finite"));
        }
        Ok(())
    }
}

/// Demographic mix of the generated population.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Marginals {
    /// P(male).
    pub male: f64,
    /// P(race), ordered white, black, hispanic, asian, other_unknown.
    pub race: [f64; 5],
    /// P(insurance), ordered medicare, medicaid, private, other.
    pub insurance: [f64; 4],
}

impl Default for Marginals {
    fn default() -> Self {
        Marginals {
            male: 0.473,
            race: [0.673, 0.148, 0.062, 0.031, 0.086],
            insurance: [0.463, 0.182, 0.298, 0.057],
        }
    }
}

impl Marginals {
    fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.male) {
            return Err(Error::invalid_config("marginals.male must be in [0, 1]"));
        }
        for (name, probs) in [("race", &self.race[..]), ("insurance", &self.insurance[..])] {
            if probs.iter().any(|p| !(0.0..=1.0).contains(p)) {
                return Err(Error::invalid_config(format!(
                    "marginals.{name} entries must be in [0, 1]"
                )));
            }
            let sum: f64 = probs.iter().sum();
            if (sum - 1.0).abs() > 1e-9 {
                return Err(Error::invalid_config(format!(
                    "marginals.{name} must sum to 1, got {sum}"
                )));
            }
        }
        Ok(())
    }
}

/// Multiplies the score-noise standard deviation for one demographic group,
/// degrading score quality there without touching anyone else's stream.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BiasKnob {
    pub group: SubgroupKey,
    pub multiplier: f64,
}

/// Shifts one numeric feature for all records admitted after a fraction of
/// the timeline, both in the recorded value and in the true risk.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TemporalDrift {
    pub slot: usize,
    pub shift: f64,
    /// Fraction of the cohort (by admission order) before drift onset.
    pub onset_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    pub n: usize,
    pub seed: u64,
    /// Expected positive-label fraction the intercept is calibrated to.
    pub target_prevalence: f64,
    /// True log-odds weight per canonical feature slot, applied to raw
    /// (unstandardized) feature values.
    pub coefficients: [f64; FEATURE_COUNT],
    pub interaction: Option<Interaction>,
    pub marginals: Marginals,
    /// Per-field probability that an imputable numeric is masked out.
    pub missing_rate: f64,
    /// Baseline standard deviation of unobserved per-record score noise.
    pub noise_sd: f64,
    pub bias_knob: Option<BiasKnob>,
    pub temporal_drift: Option<TemporalDrift>,
}

/// Default true-risk coefficients. Prior admissions dominate (matching what
/// large readmission cohorts consistently find), clinical burden and acuity
/// carry moderate weight, and demographics contribute small shifts.
pub fn default_coefficients() -> [f64; FEATURE_COUNT] {
    let mut beta = [0.0_f64; FEATURE_COUNT];
    beta[slot::AGE] = 0.010;
    beta[slot::LENGTH_OF_STAY] = 0.050;
    beta[slot::N_DIAGNOSES] = 0.040;
    beta[slot::N_PROCEDURES] = 0.040;
    beta[slot::N_MEDICATIONS] = 0.030;
    beta[slot::PRIOR_ADMISSIONS_12MO] = 0.650;
    beta[slot::CHARLSON_INDEX] = 0.150;
    beta[slot::GENDER_MALE] = 0.060;
    beta[slot::RACE_WHITE] = -0.020;
    beta[slot::RACE_BLACK] = 0.050;
    beta[slot::RACE_HISPANIC] = 0.020;
    beta[slot::RACE_ASIAN] = -0.030;
    beta[slot::RACE_OTHER_UNKNOWN] = 0.030;
    beta[slot::INSURANCE_MEDICARE] = 0.060;
    beta[slot::INSURANCE_MEDICAID] = 0.120;
    beta[slot::INSURANCE_PRIVATE] = -0.100;
    beta[slot::INSURANCE_OTHER] = 0.0;
    beta[slot::AGE_GROUP_18_50] = -0.120;
    beta[slot::AGE_GROUP_51_65] = 0.0;
    beta[slot::AGE_GROUP_66_75] = 0.050;
    beta[slot::AGE_GROUP_76_85] = 0.100;
    beta[slot::AGE_GROUP_85_PLUS] = 0.150;
    beta[slot::EMERGENCY_ADMISSION] = 0.350;
    beta[slot::HIGH_RISK_MED] = 0.200;
    beta[slot::POLYPHARMACY] = 0.250;
    beta[slot::NON_HOME_ADMISSION_SOURCE] = 0.250;
    beta
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            n: 10_000,
            seed: 7,
            target_prevalence: 0.18,
            coefficients: default_coefficients(),
            interaction: Some(Interaction {
                kind: InteractionKind::Xor,
                slot_a: slot::EMERGENCY_ADMISSION,
                slot_b: slot::POLYPHARMACY,
                coefficient: 0.9,
            }),
            marginals: Marginals::default(),
            missing_rate: 0.02,
            noise_sd: 0.4,
            bias_knob: None,
            temporal_drift: None,
        }
    }
}

impl GeneratorConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::invalid_config("n must be positive"));
        }
        if !(self.target_prevalence > 0.0 && self.target_prevalence < 1.0) {
            return Err(Error::invalid_config("target_prevalence must be in (0, 1)"));
        }
        if self.coefficients.iter().any(|c| !c.is_finite()) {
            return Err(Error::invalid_config("coefficients must be finite"));
        }
        if !(0.0..1.0).contains(&self.missing_rate) {
            return Err(Error::invalid_config("missing_rate must be in [0, 1)"));
        }
        if !(self.noise_sd >= 0.0 && self.noise_sd.is_finite()) {
            return Err(Error::invalid_config("noise_sd must be finite and >= 0"));
        }
        if let Some(knob) = &self.bias_knob {
            if !(knob.multiplier > 0.0 && knob.multiplier.is_finite()) {
                return Err(Error::invalid_config("bias_knob.multiplier must be positive"));
            }
        }
        if let Some(drift) = &self.temporal_drift {
            if drift.slot >= FEATURE_COUNT || !schema::is_numeric_slot(drift.slot) {
                return Err(Error::invalid_config(format!(
                    "temporal_drift.slot {} must name a numeric feature",
                    drift.slot
                )));
            }
            if !drift.shift.is_finite() {
                return Err(Error::invalid_config("temporal_drift.shift must be finite"));
            }
            if !(0.0..=1.0).contains(&drift.onset_fraction) {
                return Err(Error::invalid_config(
                    "temporal_drift.onset_fraction must be in [0, 1]",
                ));
            }
        }
        if let Some(interaction) = &self.interaction {
            interaction.validate()?;
        }
        self.marginals.validate()
    }
}

/// True risk for every generated record.
#[derive(Debug, Clone)]
pub struct GroundTruth {
    /// Calibrated intercept.
    pub beta0: f64,
    /// `beta0 + beta . x + interaction` per record, in cohort order. Score
    /// noise is excluded: ranking by these logits is the Bayes-optimal
    /// scorer for the generated labels.
    pub logits: Vec<f64>,
}

/// Independent sub-stream per concern so orthogonal config changes leave
/// unrelated draws untouched.
fn stream(seed: u64, tag: u64) -> ChaCha8Rng {
    crate::rng::sub_rng(seed, tag)
}

fn pick_categorical<T: Copy>(rng: &mut ChaCha8Rng, items: &[T], probs: &[f64]) -> T {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (item, p) in items.iter().zip(probs) {
        acc += p;
        if u < acc {
            return *item;
        }
    }
    *items.last().expect("categorical items are non-empty")
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// Truth-carrying fields drawn for one record before masking.
struct TrueRecord {
    record: PatientRecord,
    features: FeatureVector,
}

fn draw_true_record(
    rng: &mut ChaCha8Rng,
    config: &GeneratorConfig,
    index: usize,
) -> Result<TrueRecord> {
    let m = &config.marginals;
    let gender = pick_categorical(rng, &Gender::ALL[..], &[1.0 - m.male, m.male]);
    let race = pick_categorical(rng, &Race::ALL[..], &m.race);
    let insurance = pick_categorical(rng, &Insurance::ALL[..], &m.insurance);

    let age_dist = Normal::<f64>::new(66.0, 16.0).expect("valid normal");
    let age = age_dist.sample(rng).round().clamp(18.0, 104.0) as u32;

    // Median length of stay 3.8 days with an IQR near 2.1-6.7.
    let los_dist = LogNormal::<f64>::new(3.8_f64.ln(), 0.86).expect("valid lognormal");
    let length_of_stay = (los_dist.sample(rng) * 10.0).round() / 10.0;
    let length_of_stay = length_of_stay.clamp(0.1, 60.0);

    let poisson = |rng: &mut ChaCha8Rng, lambda: f64, lo: f64, hi: f64| -> u32 {
        let dist = Poisson::<f64>::new(lambda.max(0.05)).expect("valid poisson");
        dist.sample(rng).clamp(lo, hi) as u32
    };
    let n_diagnoses = poisson(rng, 9.0, 1.0, 40.0);
    let n_procedures = poisson(rng, 1.5, 0.0, 15.0);
    // Medication count and comorbidity burden both rise with age.
    let n_medications = poisson(rng, 8.0 + 0.06 * age as f64, 0.0, 50.0);
    let prior_admissions = poisson(rng, 0.6, 0.0, 12.0);
    let charlson = poisson(rng, 0.4 + 0.012 * age as f64, 0.0, 15.0);

    let emergency_admission = rng.random::<f64>() < 0.62;
    let high_risk_med = rng.random::<f64>() < 0.28;
    let non_home_admission_source = rng.random::<f64>() < 0.12;
    let polypharmacy = n_medications >= 10;

    let jitter = rng.random_range(0..TIME_STEP);
    let admission_time = BASE_TIME + index as i64 * TIME_STEP + jitter;

    let mut record = PatientRecord {
        admission_id: index as u64 + 1,
        admission_time,
        age,
        gender,
        race,
        insurance,
        length_of_stay: Some(length_of_stay),
        n_diagnoses: Some(n_diagnoses),
        n_procedures: Some(n_procedures),
        n_medications: Some(n_medications),
        prior_admissions_12mo: Some(prior_admissions),
        charlson_index: Some(charlson),
        emergency_admission,
        high_risk_med,
        polypharmacy,
        non_home_admission_source,
        label: None,
        missing: MissingFlags::default(),
    };

    if let Some(drift) = &config.temporal_drift {
        let onset = (drift.onset_fraction * config.n as f64).floor() as usize;
        if index >= onset {
            apply_drift_shift(&mut record, drift)?;
        }
    }

    let features = encode_record(&record)?;
    Ok(TrueRecord { record, features })
}

/// Shifts the drifted feature on the record itself so both the recorded
/// value and the true risk move together.
fn apply_drift_shift(record: &mut PatientRecord, drift: &TemporalDrift) -> Result<()> {
    let shift_count = |v: Option<u32>| -> Option<u32> {
        v.map(|x| (x as f64 + drift.shift).round().max(0.0) as u32)
    };
    match drift.slot {
        slot::AGE => {
            record.age = ((record.age as f64 + drift.shift).round().clamp(18.0, 104.0)) as u32;
        }
        slot::LENGTH_OF_STAY => {
            record.length_of_stay = record.length_of_stay.map(|v| (v + drift.shift).max(0.1));
        }
        slot::N_DIAGNOSES => record.n_diagnoses = shift_count(record.n_diagnoses),
        slot::N_PROCEDURES => record.n_procedures = shift_count(record.n_procedures),
        slot::N_MEDICATIONS => {
            record.n_medications = shift_count(record.n_medications);
            record.polypharmacy = record.n_medications.is_some_and(|m| m >= 10);
        }
        slot::PRIOR_ADMISSIONS_12MO => {
            record.prior_admissions_12mo = shift_count(record.prior_admissions_12mo)
        }
        slot::CHARLSON_INDEX => record.charlson_index = shift_count(record.charlson_index),
        other => {
            return Err(Error::invalid_config(format!(
                "temporal_drift.slot {other} is not a numeric feature"
            )))
        }
    }
    Ok(())
}

/// Calibrates the intercept so mean predicted risk equals the target.
/// `sigmoid(b + z)` averaged over records is strictly increasing in `b`, so
/// plain bisection converges; the bracket is wide enough for any finite
/// score distribution at representable prevalence targets.
fn calibrate_intercept(raw_scores: &[f64], target: f64) -> Result<f64> {
    let mean_risk = |b: f64| -> f64 {
        raw_scores.iter().map(|s| sigmoid(b + s)).sum::<f64>() / raw_scores.len() as f64
    };
    let (mut lo, mut hi) = (-40.0_f64, 40.0_f64);
    if mean_risk(lo) > target || mean_risk(hi) < target {
        return Err(Error::invalid_config(format!(
            "target prevalence {target} unreachable for this score distribution"
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mean_risk(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-12 {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Generates a cohort along with its ground-truth risk scores.
pub fn generate_cohort_with_truth(config: &GeneratorConfig) -> Result<(Cohort, GroundTruth)> {
    config.validate()?;

    let mut covariate_rng = stream(config.seed, 1);
    let mut drawn = Vec::with_capacity(config.n);
    for i in 0..config.n {
        drawn.push(draw_true_record(&mut covariate_rng, config, i)?);
    }

    // Raw score: coefficient dot product plus interaction, intercept pending.
    let mut raw_scores = Vec::with_capacity(config.n);
    for tr in &drawn {
        let mut s = 0.0;
        for (beta, x) in config.coefficients.iter().zip(tr.features.0.iter()) {
            s += beta * x;
        }
        if let Some(interaction) = &config.interaction {
            s += interaction.term(&tr.features);
        }
        raw_scores.push(s);
    }

    // Unobserved per-record noise; the bias knob widens it for one group.
    let mut noisy_scores = raw_scores.clone();
    if config.noise_sd > 0.0 {
        let mut noise_rng = stream(config.seed, 2);
        let unit = Normal::<f64>::new(0.0, 1.0).expect("valid normal");
        for (tr, s) in drawn.iter().zip(noisy_scores.iter_mut()) {
            let mut sd = config.noise_sd;
            if let Some(knob) = &config.bias_knob {
                if knob.group.matches(&tr.record) {
                    sd *= knob.multiplier;
                }
            }
            *s += sd * unit.sample(&mut noise_rng);
        }
    }

    let beta0 = calibrate_intercept(&noisy_scores, config.target_prevalence)?;

    let mut label_rng = stream(config.seed, 3);
    for (tr, s) in drawn.iter_mut().zip(&noisy_scores) {
        let u: f64 = label_rng.random();
        tr.record.label = Some(u < sigmoid(beta0 + s));
    }

    if config.missing_rate > 0.0 {
        let mut missing_rng = stream(config.seed, 4);
        for tr in &mut drawn {
            let r = &mut tr.record;
            if missing_rng.random::<f64>() < config.missing_rate {
                r.length_of_stay = None;
                r.missing.length_of_stay = true;
            }
            if missing_rng.random::<f64>() < config.missing_rate {
                r.n_medications = None;
                r.missing.n_medications = true;
            }
            if missing_rng.random::<f64>() < config.missing_rate {
                r.charlson_index = None;
                r.missing.charlson_index = true;
            }
        }
    }

    let logits = raw_scores.iter().map(|s| beta0 + s).collect();
    let records = drawn.into_iter().map(|tr| tr.record).collect();
    let cohort = Cohort::new(records);
    cohort.validate()?;
    Ok((cohort, GroundTruth { beta0, logits }))
}

/// Generates a cohort, discarding the ground truth.
pub fn generate_cohort(config: &GeneratorConfig) -> Result<Cohort> {
    generate_cohort_with_truth(config).map(|(cohort, _)| cohort)
}

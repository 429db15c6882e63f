//! Cohort construction: records, synthetic generation, chronological
//! splitting, imputation, and CSV persistence.

pub mod generator;
pub mod io;
pub mod record;
pub mod schema;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::SCHEMA_VERSION;

pub use generator::{
    generate_cohort, generate_cohort_with_truth, BiasKnob, GeneratorConfig, GroundTruth,
    Interaction, InteractionKind, Marginals, TemporalDrift,
};
pub use record::{
    encode_record, AgeBand, Dimension, FeatureVector, Gender, Insurance, MissingFlags,
    PatientRecord, Race, SubgroupKey,
};

/// An ordered collection of admissions sharing one schema version.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cohort {
    pub schema_version: String,
    pub records: Vec<PatientRecord>,
}

impl Cohort {
    pub fn new(records: Vec<PatientRecord>) -> Self {
        Cohort {
            schema_version: SCHEMA_VERSION.to_string(),
            records,
        }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Validates every record plus cohort-level invariants (schema tag,
    /// unique admission ids).
    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::invalid_cohort(format!(
                "schema version {} not supported (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        let mut ids = BTreeSet::new();
        for record in &self.records {
            record.validate()?;
            if !ids.insert(record.admission_id) {
                return Err(Error::invalid_cohort(format!(
                    "duplicate admission_id {}",
                    record.admission_id
                )));
            }
        }
        Ok(())
    }

    /// Fraction of labeled records with a positive label. Errors when no
    /// record carries a label.
    pub fn prevalence(&self) -> Result<f64> {
        let labeled: Vec<bool> = self.records.iter().filter_map(|r| r.label).collect();
        if labeled.is_empty() {
            return Err(Error::invalid_cohort("no labeled records"));
        }
        let positives = labeled.iter().filter(|l| **l).count();
        Ok(positives as f64 / labeled.len() as f64)
    }

    /// Encodes every record into the canonical layout, in cohort order.
    pub fn encode(&self) -> Result<Vec<FeatureVector>> {
        self.records.iter().map(encode_record).collect()
    }

    /// Labels in cohort order; errors if any record is unlabeled.
    pub fn labels(&self) -> Result<Vec<bool>> {
        self.records
            .iter()
            .map(|r| {
                r.label.ok_or_else(|| {
                    Error::invalid_cohort(format!("admission {} has no label", r.admission_id))
                })
            })
            .collect()
    }
}

/// Result of the chronological split. Order within each part preserves
/// admission-time order.
#[derive(Debug, Clone)]
pub struct SplitCohort {
    pub train: Cohort,
    pub validation: Cohort,
    pub test: Cohort,
}

impl SplitCohort {
    pub fn sizes(&self) -> (usize, usize, usize) {
        (self.train.len(), self.validation.len(), self.test.len())
    }
}

/// Expected part sizes for a chronological 70/15/15 split of `n` records:
/// train takes `floor(0.7 n)`, validation takes half the remainder rounded
/// down, test takes the rest.
pub fn split_sizes(n: usize) -> (usize, usize, usize) {
    let train = n * 7 / 10;
    let rest = n - train;
    let validation = rest / 2;
    let test = rest - validation;
    (train, validation, test)
}

/// Splits a cohort chronologically: records are ordered by admission time
/// (ties by admission id) and partitioned past-to-future so the test set is
/// strictly the most recent slice. Requires at least 10 records so every
/// part is non-empty.
pub fn chronological_split(cohort: &Cohort) -> Result<SplitCohort> {
    cohort.validate()?;
    if cohort.len() < 10 {
        return Err(Error::invalid_cohort(format!(
            "need at least 10 records to split, got {}",
            cohort.len()
        )));
    }
    let mut ordered = cohort.records.clone();
    ordered.sort_by_key(|r| (r.admission_time, r.admission_id));
    let (n_train, n_val, _) = split_sizes(ordered.len());
    let test = ordered.split_off(n_train + n_val);
    let validation = ordered.split_off(n_train);
    Ok(SplitCohort {
        train: Cohort::new(ordered),
        validation: Cohort::new(validation),
        test: Cohort::new(test),
    })
}

/// Median imputation values for the six imputable numeric fields, fitted on
/// training data only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Imputation {
    pub schema_version: String,
    pub length_of_stay: f64,
    pub n_diagnoses: f64,
    pub n_procedures: f64,
    pub n_medications: f64,
    pub prior_admissions_12mo: f64,
    pub charlson_index: f64,
}

/// Median of observed values: middle element for odd counts, mean of the two
/// middle elements for even counts. Errors when every value is missing.
fn median(mut values: Vec<f64>, field: &str) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::invalid_cohort(format!(
            "cannot fit imputation: every {field} value is missing"
        )));
    }
    values.sort_by(|a, b| a.partial_cmp(b).expect("imputation values are finite"));
    let n = values.len();
    Ok(if n % 2 == 1 {
        values[n / 2]
    } else {
        (values[n / 2 - 1] + values[n / 2]) / 2.0
    })
}

/// Fits imputation medians from observed (non-missing) values.
pub fn fit_imputation(train: &Cohort) -> Result<Imputation> {
    let collect_f64 = |f: fn(&PatientRecord) -> Option<f64>| -> Vec<f64> {
        train.records.iter().filter_map(f).collect()
    };
    Ok(Imputation {
        schema_version: SCHEMA_VERSION.to_string(),
        length_of_stay: median(collect_f64(|r| r.length_of_stay), "length_of_stay")?,
        n_diagnoses: median(collect_f64(|r| r.n_diagnoses.map(f64::from)), "n_diagnoses")?,
        n_procedures: median(collect_f64(|r| r.n_procedures.map(f64::from)), "n_procedures")?,
        n_medications: median(collect_f64(|r| r.n_medications.map(f64::from)), "n_medications")?,
        prior_admissions_12mo: median(
            collect_f64(|r| r.prior_admissions_12mo.map(f64::from)),
            "prior_admissions_12mo",
        )?,
        charlson_index: median(collect_f64(|r| r.charlson_index.map(f64::from)), "charlson_index")?,
    })
}

impl Imputation {
    /// Median for an imputable slot, or None for slots that never impute.
    pub fn value_for_slot(&self, index: usize) -> Option<f64> {
        match index {
            schema::slot::LENGTH_OF_STAY => Some(self.length_of_stay),
            schema::slot::N_DIAGNOSES => Some(self.n_diagnoses),
            schema::slot::N_PROCEDURES => Some(self.n_procedures),
            schema::slot::N_MEDICATIONS => Some(self.n_medications),
            schema::slot::PRIOR_ADMISSIONS_12MO => Some(self.prior_admissions_12mo),
            schema::slot::CHARLSON_INDEX => Some(self.charlson_index),
            _ => None,
        }
    }

    /// Replaces NaN slots with fitted medians. Imputation happens in feature
    /// space so fractional medians (e.g. 2.5 for an even count) are applied
    /// exactly; the raw record keeps its missing value and flag.
    pub fn apply_vector(&self, x: &mut FeatureVector) {
        for slot in schema::IMPUTABLE_SLOTS {
            if x.0[slot].is_nan() {
                x.0[slot] = self
                    .value_for_slot(slot)
                    .expect("imputable slots always carry a median");
            }
        }
    }

    pub fn apply_vectors(&self, xs: &mut [FeatureVector]) {
        for x in xs {
            self.apply_vector(x);
        }
    }
}

/// Encodes a cohort and fills missing values with the fitted medians.
pub fn encode_imputed(cohort: &Cohort, imputation: &Imputation) -> Result<Vec<FeatureVector>> {
    let mut xs = cohort.encode()?;
    imputation.apply_vectors(&mut xs);
    Ok(xs)
}

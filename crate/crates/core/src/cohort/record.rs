//! Patient records and their encoding into fixed-layout feature vectors.

use serde::{Deserialize, Serialize};

use crate::cohort::schema::{self, slot, FEATURE_COUNT};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Gender {
    Female,
    Male,
}

impl Gender {
    pub const ALL: [Gender; 2] = [Gender::Female, Gender::Male];

    pub fn as_str(&self) -> &'static str {
        match self {
            Gender::Female => "female",
            Gender::Male => "male",
        }
    }

    pub fn parse(s: &str) -> Option<Gender> {
        Self::ALL.into_iter().find(|g| g.as_str() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Race {
    White,
    Black,
    Hispanic,
    Asian,
    OtherUnknown,
}

impl Race {
    pub const ALL: [Race; 5] = [
        Race::White,
        Race::Black,
        Race::Hispanic,
        Race::Asian,
        Race::OtherUnknown,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Race::White => "white",
            Race::Black => "black",
            Race::Hispanic => "hispanic",
            Race::Asian => "asian",
            Race::OtherUnknown => "other_unknown",
        }
    }

    pub fn parse(s: &str) -> Option<Race> {
        Self::ALL.into_iter().find(|r| r.as_str() == s)
    }

    fn slot(&self) -> usize {
        match self {
            Race::White => slot::RACE_WHITE,
            Race::Black => slot::RACE_BLACK,
            Race::Hispanic => slot::RACE_HISPANIC,
            Race::Asian => slot::RACE_ASIAN,
            Race::OtherUnknown => slot::RACE_OTHER_UNKNOWN,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Insurance {
    Medicare,
    Medicaid,
    Private,
    Other,
}

impl Insurance {
    pub const ALL: [Insurance; 4] = [
        Insurance::Medicare,
        Insurance::Medicaid,
        Insurance::Private,
        Insurance::Other,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Insurance::Medicare => "medicare",
            Insurance::Medicaid => "medicaid",
            Insurance::Private => "private",
            Insurance::Other => "other",
        }
    }

    pub fn parse(s: &str) -> Option<Insurance> {
        Self::ALL.into_iter().find(|i| i.as_str() == s)
    }

    fn slot(&self) -> usize {
        match self {
            Insurance::Medicare => slot::INSURANCE_MEDICARE,
            Insurance::Medicaid => slot::INSURANCE_MEDICAID,
            Insurance::Private => slot::INSURANCE_PRIVATE,
            Insurance::Other => slot::INSURANCE_OTHER,
        }
    }
}

/// Age bands used for the one-hot block and for fairness slicing. Bands are
/// inclusive of their lower bound; `85+` starts at 85, so the band printed
/// `76-84` ends at 84.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AgeBand {
    Age18To50,
    Age51To65,
    Age66To75,
    Age76To84,
    Age85Plus,
}

impl AgeBand {
    pub const ALL: [AgeBand; 5] = [
        AgeBand::Age18To50,
        AgeBand::Age51To65,
        AgeBand::Age66To75,
        AgeBand::Age76To84,
        AgeBand::Age85Plus,
    ];

    pub fn of_age(age: u32) -> Result<AgeBand> {
        match age {
            18..=50 => Ok(AgeBand::Age18To50),
            51..=65 => Ok(AgeBand::Age51To65),
            66..=75 => Ok(AgeBand::Age66To75),
            76..=84 => Ok(AgeBand::Age76To84),
            85.. => Ok(AgeBand::Age85Plus),
            _ => Err(Error::invalid_record(format!(
                "age {age} outside adult range (>= 18)"
            ))),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            AgeBand::Age18To50 => "18-50",
            AgeBand::Age51To65 => "51-65",
            AgeBand::Age66To75 => "66-75",
            AgeBand::Age76To84 => "76-84",
            AgeBand::Age85Plus => "85+",
        }
    }

    fn slot(&self) -> usize {
        match self {
            AgeBand::Age18To50 => slot::AGE_GROUP_18_50,
            AgeBand::Age51To65 => slot::AGE_GROUP_51_65,
            AgeBand::Age66To75 => slot::AGE_GROUP_66_75,
            AgeBand::Age76To84 => slot::AGE_GROUP_76_85,
            AgeBand::Age85Plus => slot::AGE_GROUP_85_PLUS,
        }
    }
}

/// Demographic axes audited for fairness. Also reused by the cohort
/// generator's bias knob to scope noise to one group.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dimension {
    Gender,
    Race,
    Insurance,
    AgeBand,
}

impl Dimension {
    pub const ALL: [Dimension; 4] = [
        Dimension::Gender,
        Dimension::Race,
        Dimension::Insurance,
        Dimension::AgeBand,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Dimension::Gender => "gender",
            Dimension::Race => "race",
            Dimension::Insurance => "insurance",
            Dimension::AgeBand => "age_band",
        }
    }
}

/// One demographic subgroup: a value along a single [`Dimension`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SubgroupKey {
    Gender(Gender),
    Race(Race),
    Insurance(Insurance),
    AgeBand(AgeBand),
}

impl SubgroupKey {
    pub fn dimension(&self) -> Dimension {
        match self {
            SubgroupKey::Gender(_) => Dimension::Gender,
            SubgroupKey::Race(_) => Dimension::Race,
            SubgroupKey::Insurance(_) => Dimension::Insurance,
            SubgroupKey::AgeBand(_) => Dimension::AgeBand,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            SubgroupKey::Gender(g) => g.as_str(),
            SubgroupKey::Race(r) => r.as_str(),
            SubgroupKey::Insurance(i) => i.as_str(),
            SubgroupKey::AgeBand(b) => b.label(),
        }
    }

    /// All 16 subgroups, ordered by dimension then value.
    pub fn all() -> Vec<SubgroupKey> {
        let mut keys = Vec::with_capacity(16);
        keys.extend(Gender::ALL.map(SubgroupKey::Gender));
        keys.extend(Race::ALL.map(SubgroupKey::Race));
        keys.extend(Insurance::ALL.map(SubgroupKey::Insurance));
        keys.extend(AgeBand::ALL.map(SubgroupKey::AgeBand));
        keys
    }

    /// Whether `record` belongs to this subgroup.
    pub fn matches(&self, record: &PatientRecord) -> bool {
        match self {
            SubgroupKey::Gender(g) => record.gender == *g,
            SubgroupKey::Race(r) => record.race == *r,
            SubgroupKey::Insurance(i) => record.insurance == *i,
            SubgroupKey::AgeBand(b) => AgeBand::of_age(record.age).ok() == Some(*b),
        }
    }
}

/// Presence flags for the imputable numeric fields. `true` means the value
/// was absent in the source data; retained after imputation so downstream
/// consumers can distinguish observed from filled-in values.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MissingFlags {
    pub length_of_stay: bool,
    pub n_diagnoses: bool,
    pub n_procedures: bool,
    pub n_medications: bool,
    pub prior_admissions_12mo: bool,
    pub charlson_index: bool,
}

impl MissingFlags {
    pub fn any(&self) -> bool {
        self.length_of_stay
            || self.n_diagnoses
            || self.n_procedures
            || self.n_medications
            || self.prior_admissions_12mo
            || self.charlson_index
    }
}

/// One hospital admission. Numeric clinical fields are optional until
/// imputation; demographics and flags are required.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatientRecord {
    pub admission_id: u64,
    /// Seconds since epoch; orders the chronological split.
    pub admission_time: i64,
    pub age: u32,
    pub gender: Gender,
    pub race: Race,
    pub insurance: Insurance,
    pub length_of_stay: Option<f64>,
    pub n_diagnoses: Option<u32>,
    pub n_procedures: Option<u32>,
    pub n_medications: Option<u32>,
    pub prior_admissions_12mo: Option<u32>,
    pub charlson_index: Option<u32>,
    pub emergency_admission: bool,
    pub high_risk_med: bool,
    pub polypharmacy: bool,
    pub non_home_admission_source: bool,
    /// 30-day readmission outcome; absent on serving requests.
    pub label: Option<bool>,
    pub missing: MissingFlags,
}

impl PatientRecord {
    /// Structural validation independent of any cohort context.
    pub fn validate(&self) -> Result<()> {
        AgeBand::of_age(self.age)?;
        if let Some(los) = self.length_of_stay {
            if !los.is_finite() || los < 0.0 {
                return Err(Error::invalid_record(format!(
                    "admission {}: length_of_stay must be finite and >= 0, got {los}",
                    self.admission_id
                )));
            }
        }
        // A value may legitimately be present with the missing flag set
        // (post-imputation state), but an absent value must be flagged.
        let flag_consistency = [
            (self.length_of_stay.is_none(), self.missing.length_of_stay, "length_of_stay"),
            (self.n_diagnoses.is_none(), self.missing.n_diagnoses, "n_diagnoses"),
            (self.n_procedures.is_none(), self.missing.n_procedures, "n_procedures"),
            (self.n_medications.is_none(), self.missing.n_medications, "n_medications"),
            (
                self.prior_admissions_12mo.is_none(),
                self.missing.prior_admissions_12mo,
                "prior_admissions_12mo",
            ),
            (self.charlson_index.is_none(), self.missing.charlson_index, "charlson_index"),
        ];
        for (absent, flagged, field) in flag_consistency {
            if absent && !flagged {
                return Err(Error::invalid_record(format!(
                    "admission {}: {field} absent but missing flag unset",
                    self.admission_id
                )));
            }
        }
        Ok(())
    }

    pub fn age_band(&self) -> Result<AgeBand> {
        AgeBand::of_age(self.age)
    }
}

/// Encoded features in the canonical 26-slot layout. Missing numeric values
/// are represented as NaN; tree traversal routes NaN through each node's
/// `default_left` direction, and training rejects NaN outright.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector(pub [f64; FEATURE_COUNT]);

impl FeatureVector {
    pub fn values(&self) -> &[f64; FEATURE_COUNT] {
        &self.0
    }

    pub fn is_missing(&self, index: usize) -> bool {
        self.0[index].is_nan()
    }

    pub fn has_missing(&self) -> bool {
        self.0.iter().any(|v| v.is_nan())
    }

    /// Checks the layout invariants: finite indicator slots that are exactly
    /// 0 or 1, one-hot blocks summing to 1, and the age-group flag agreeing
    /// with the age slot when age is present.
    pub fn validate(&self) -> Result<()> {
        for i in 0..FEATURE_COUNT {
            let v = self.0[i];
            if schema::is_numeric_slot(i) {
                if v.is_infinite() {
                    return Err(Error::invalid_record(format!(
                        "feature {} is infinite",
                        schema::FEATURE_NAMES[i]
                    )));
                }
            } else if v != 0.0 && v != 1.0 {
                return Err(Error::invalid_record(format!(
                    "indicator feature {} must be 0 or 1, got {v}",
                    schema::FEATURE_NAMES[i]
                )));
            }
        }
        for (start, end) in schema::ONE_HOT_BLOCKS {
            let sum: f64 = self.0[start..=end].iter().sum();
            if sum != 1.0 {
                return Err(Error::invalid_record(format!(
                    "one-hot block starting at {} sums to {sum}, expected 1",
                    schema::FEATURE_NAMES[start]
                )));
            }
        }
        let age = self.0[slot::AGE];
        if age.is_nan() {
            return Err(Error::invalid_record("age slot must not be missing"));
        }
        let band = AgeBand::of_age(age as u32)?;
        if self.0[band.slot()] != 1.0 {
            return Err(Error::invalid_record(format!(
                "age {age} disagrees with its age-group flag"
            )));
        }
        Ok(())
    }
}

fn opt_u32(v: Option<u32>) -> f64 {
    v.map(|x| x as f64).unwrap_or(f64::NAN)
}

/// Encodes a record into the canonical layout. The record must validate;
/// missing imputable numerics become NaN, which models must either impute
/// away (training) or route via default directions (inference).
pub fn encode_record(record: &PatientRecord) -> Result<FeatureVector> {
    record.validate()?;
    let mut x = [0.0_f64; FEATURE_COUNT];
    x[slot::AGE] = record.age as f64;
    x[slot::LENGTH_OF_STAY] = record.length_of_stay.unwrap_or(f64::NAN);
    x[slot::N_DIAGNOSES] = opt_u32(record.n_diagnoses);
    x[slot::N_PROCEDURES] = opt_u32(record.n_procedures);
    x[slot::N_MEDICATIONS] = opt_u32(record.n_medications);
    x[slot::PRIOR_ADMISSIONS_12MO] = opt_u32(record.prior_admissions_12mo);
    x[slot::CHARLSON_INDEX] = opt_u32(record.charlson_index);
    x[slot::GENDER_MALE] = if record.gender == Gender::Male { 1.0 } else { 0.0 };
    x[record.race.slot()] = 1.0;
    x[record.insurance.slot()] = 1.0;
    x[record.age_band()?.slot()] = 1.0;
    x[slot::EMERGENCY_ADMISSION] = record.emergency_admission as u8 as f64;
    x[slot::HIGH_RISK_MED] = record.high_risk_med as u8 as f64;
    x[slot::POLYPHARMACY] = record.polypharmacy as u8 as f64;
    x[slot::NON_HOME_ADMISSION_SOURCE] = record.non_home_admission_source as u8 as f64;
    Ok(FeatureVector(x))
}

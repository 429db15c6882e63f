//! Canonical feature layout.
//!
//! Every model, explanation, fairness slice, and drift report in this
//! workspace indexes features by the positions frozen here. The order is part
//! of the `readmit-v1` artifact contract: changing it invalidates every saved
//! model and reference distribution, so additions must append, never reorder.

/// Number of feature slots in an encoded vector.
pub const FEATURE_COUNT: usize = 26;

/// Feature names, index-aligned with [`slot`] and with encoded vectors.
pub const FEATURE_NAMES: [&str; FEATURE_COUNT] = [
    "age",
    "length_of_stay",
    "n_diagnoses",
    "n_procedures",
    "n_medications",
    "prior_admissions_12mo",
    "charlson_index",
    "gender_male",
    "race_white",
    "race_black",
    "race_hispanic",
    "race_asian",
    "race_other_unknown",
    "insurance_medicare",
    "insurance_medicaid",
    "insurance_private",
    "insurance_other",
    "age_group_18_50",
    "age_group_51_65",
    "age_group_66_75",
    "age_group_76_85",
    "age_group_85_plus",
    "emergency_admission",
    "high_risk_med",
    "polypharmacy",
    "non_home_admission_source",
];

/// Named indices into an encoded feature vector.
pub mod slot {
    pub const AGE: usize = 0;
    pub const LENGTH_OF_STAY: usize = 1;
    pub const N_DIAGNOSES: usize = 2;
    pub const N_PROCEDURES: usize = 3;
    pub const N_MEDICATIONS: usize = 4;
    pub const PRIOR_ADMISSIONS_12MO: usize = 5;
    pub const CHARLSON_INDEX: usize = 6;
    pub const GENDER_MALE: usize = 7;
    pub const RACE_WHITE: usize = 8;
    pub const RACE_BLACK: usize = 9;
    pub const RACE_HISPANIC: usize = 10;
    pub const RACE_ASIAN: usize = 11;
    pub const RACE_OTHER_UNKNOWN: usize = 12;
    pub const INSURANCE_MEDICARE: usize = 13;
    pub const INSURANCE_MEDICAID: usize = 14;
    pub const INSURANCE_PRIVATE: usize = 15;
    pub const INSURANCE_OTHER: usize = 16;
    pub const AGE_GROUP_18_50: usize = 17;
    pub const AGE_GROUP_51_65: usize = 18;
    pub const AGE_GROUP_66_75: usize = 19;
    pub const AGE_GROUP_76_85: usize = 20;
    pub const AGE_GROUP_85_PLUS: usize = 21;
    pub const EMERGENCY_ADMISSION: usize = 22;
    pub const HIGH_RISK_MED: usize = 23;
    pub const POLYPHARMACY: usize = 24;
    pub const NON_HOME_ADMISSION_SOURCE: usize = 25;
}

/// Slots holding continuous or count values; everything else is 0/1.
pub const NUMERIC_SLOTS: [usize; 7] = [
    slot::AGE,
    slot::LENGTH_OF_STAY,
    slot::N_DIAGNOSES,
    slot::N_PROCEDURES,
    slot::N_MEDICATIONS,
    slot::PRIOR_ADMISSIONS_12MO,
    slot::CHARLSON_INDEX,
];

/// Slots that may legitimately be missing in a raw record. Age is excluded:
/// the age-group one-hot block cannot be formed without it, so records with
/// no age are rejected rather than imputed.
pub const IMPUTABLE_SLOTS: [usize; 6] = [
    slot::LENGTH_OF_STAY,
    slot::N_DIAGNOSES,
    slot::N_PROCEDURES,
    slot::N_MEDICATIONS,
    slot::PRIOR_ADMISSIONS_12MO,
    slot::CHARLSON_INDEX,
];

/// One-hot blocks (inclusive slot ranges). Each block sums to exactly 1 in a
/// valid encoded vector.
pub const ONE_HOT_BLOCKS: [(usize, usize); 3] = [
    (slot::RACE_WHITE, slot::RACE_OTHER_UNKNOWN),
    (slot::INSURANCE_MEDICARE, slot::INSURANCE_OTHER),
    (slot::AGE_GROUP_18_50, slot::AGE_GROUP_85_PLUS),
];

/// Whether a slot carries a numeric (non-indicator) value.
pub fn is_numeric_slot(index: usize) -> bool {
    NUMERIC_SLOTS.contains(&index)
}

/// Look up a slot index by feature name.
pub fn slot_of(name: &str) -> Option<usize> {
    FEATURE_NAMES.iter().position(|n| *n == name)
}

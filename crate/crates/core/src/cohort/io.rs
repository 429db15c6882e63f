//! Cohort CSV persistence.
//!
//! Layout: a `schema=readmit-v1` preamble line, a fixed header, then one row
//! per admission. Missing numerics are empty cells paired with a sidecar
//! `missing_<field>` flag; the flag for age exists for layout uniformity but
//! must always be 0 because age is required. No field ever contains a comma
//! or quote, so no quoting dialect is needed; the writer emits `\n` line
//! endings unconditionally to keep output byte-stable across platforms.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::cohort::record::{Gender, Insurance, MissingFlags, PatientRecord, Race};
use crate::cohort::{Cohort, Imputation};
use crate::error::{Error, Result};
use crate::SCHEMA_VERSION;

const HEADER: &str = "admission_id,admission_time,age,gender,race,insurance,length_of_stay,n_diagnoses,n_procedures,n_medications,prior_admissions_12mo,charlson_index,emergency_admission,high_risk_med,polypharmacy,non_home_admission_source,missing_age,missing_length_of_stay,missing_n_diagnoses,missing_n_procedures,missing_n_medications,missing_prior_admissions_12mo,missing_charlson_index,label";

const FIELD_COUNT: usize = 24;

fn opt_u32_cell(v: Option<u32>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn bool_cell(b: bool) -> &'static str {
    if b {
        "1"
    } else {
        "0"
    }
}

/// Serializes a cohort to CSV text.
pub fn cohort_to_csv(cohort: &Cohort) -> Result<String> {
    cohort.validate()?;
    let mut out = String::with_capacity(64 + cohort.len() * 96);
    writeln!(out, "schema={}", cohort.schema_version).expect("string write");
    out.push_str(HEADER);
    out.push('\n');
    for r in &cohort.records {
        let los = r.length_of_stay.map(|v| v.to_string()).unwrap_or_default();
        let label = match r.label {
            Some(true) => "1",
            Some(false) => "0",
            None => "",
        };
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.admission_id,
            r.admission_time,
            r.age,
            r.gender.as_str(),
            r.race.as_str(),
            r.insurance.as_str(),
            los,
            opt_u32_cell(r.n_diagnoses),
            opt_u32_cell(r.n_procedures),
            opt_u32_cell(r.n_medications),
            opt_u32_cell(r.prior_admissions_12mo),
            opt_u32_cell(r.charlson_index),
            bool_cell(r.emergency_admission),
            bool_cell(r.high_risk_med),
            bool_cell(r.polypharmacy),
            bool_cell(r.non_home_admission_source),
            "0",
            bool_cell(r.missing.length_of_stay),
            bool_cell(r.missing.n_diagnoses),
            bool_cell(r.missing.n_procedures),
            bool_cell(r.missing.n_medications),
            bool_cell(r.missing.prior_admissions_12mo),
            bool_cell(r.missing.charlson_index),
            label,
        )
        .expect("string write");
    }
    Ok(out)
}

struct RowParser<'a> {
    line: usize,
    fields: Vec<&'a str>,
}

impl<'a> RowParser<'a> {
    fn err(&self, message: impl Into<String>) -> Error {
        Error::CsvParse {
            line: self.line,
            message: message.into(),
        }
    }

    fn field(&self, i: usize) -> &'a str {
        self.fields[i]
    }

    fn parse<T: std::str::FromStr>(&self, i: usize, name: &str) -> Result<T> {
        self.field(i)
            .parse()
            .map_err(|_| self.err(format!("bad {name}: {:?}", self.field(i))))
    }

    fn parse_bool(&self, i: usize, name: &str) -> Result<bool> {
        match self.field(i) {
            "0" => Ok(false),
            "1" => Ok(true),
            other => Err(self.err(format!("bad {name}: {other:?} (expected 0 or 1)"))),
        }
    }

    /// Optional numeric cell; `missing` is the paired sidecar flag. An empty
    /// cell requires the flag set and vice versa.
    fn parse_opt<T: std::str::FromStr>(
        &self,
        i: usize,
        missing: bool,
        name: &str,
    ) -> Result<Option<T>> {
        let cell = self.field(i);
        match (cell.is_empty(), missing) {
            (true, true) => Ok(None),
            (false, false) => Ok(Some(self.parse(i, name)?)),
            (true, false) => Err(self.err(format!("{name} empty but missing_{name} is 0"))),
            (false, true) => Err(self.err(format!("{name} present but missing_{name} is 1"))),
        }
    }
}

/// Parses cohort CSV text, enforcing the schema preamble, exact header, and
/// per-row structural invariants.
pub fn cohort_from_csv(text: &str) -> Result<Cohort> {
    let mut lines = text.lines().enumerate();
    let (_, preamble) = lines
        .next()
        .ok_or_else(|| Error::invalid_cohort("empty cohort file"))?;
    let version = preamble
        .strip_prefix("schema=")
        .ok_or_else(|| Error::invalid_cohort(format!("missing schema preamble, got {preamble:?}")))?;
    if version != SCHEMA_VERSION {
        return Err(Error::invalid_cohort(format!(
            "schema version {version} not supported (expected {SCHEMA_VERSION})"
        )));
    }
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::invalid_cohort("missing header line"))?;
    if header != HEADER {
        return Err(Error::invalid_cohort("header does not match readmit-v1 layout"));
    }

    let mut records = Vec::new();
    for (index, line) in lines {
        if line.is_empty() {
            continue;
        }
        let row = RowParser {
            line: index + 1,
            fields: line.split(',').collect(),
        };
        if row.fields.len() != FIELD_COUNT {
            return Err(row.err(format!(
                "expected {FIELD_COUNT} fields, got {}",
                row.fields.len()
            )));
        }

        let gender = Gender::parse(row.field(3))
            .ok_or_else(|| row.err(format!("bad gender: {:?}", row.field(3))))?;
        let race = Race::parse(row.field(4))
            .ok_or_else(|| row.err(format!("bad race: {:?}", row.field(4))))?;
        let insurance = Insurance::parse(row.field(5))
            .ok_or_else(|| row.err(format!("bad insurance: {:?}", row.field(5))))?;

        if row.parse_bool(16, "missing_age")? {
            return Err(row.err("age is required; missing_age must be 0"));
        }
        let missing = MissingFlags {
            length_of_stay: row.parse_bool(17, "missing_length_of_stay")?,
            n_diagnoses: row.parse_bool(18, "missing_n_diagnoses")?,
            n_procedures: row.parse_bool(19, "missing_n_procedures")?,
            n_medications: row.parse_bool(20, "missing_n_medications")?,
            prior_admissions_12mo: row.parse_bool(21, "missing_prior_admissions_12mo")?,
            charlson_index: row.parse_bool(22, "missing_charlson_index")?,
        };

        let label = match row.field(23) {
            "" => None,
            "0" => Some(false),
            "1" => Some(true),
            other => return Err(row.err(format!("bad label: {other:?}"))),
        };

        let record = PatientRecord {
            admission_id: row.parse(0, "admission_id")?,
            admission_time: row.parse(1, "admission_time")?,
            age: row.parse(2, "age")?,
            gender,
            race,
            insurance,
            length_of_stay: row.parse_opt(6, missing.length_of_stay, "length_of_stay")?,
            n_diagnoses: row.parse_opt(7, missing.n_diagnoses, "n_diagnoses")?,
            n_procedures: row.parse_opt(8, missing.n_procedures, "n_procedures")?,
            n_medications: row.parse_opt(9, missing.n_medications, "n_medications")?,
            prior_admissions_12mo: row.parse_opt(
                10,
                missing.prior_admissions_12mo,
                "prior_admissions_12mo",
            )?,
            charlson_index: row.parse_opt(11, missing.charlson_index, "charlson_index")?,
            emergency_admission: row.parse_bool(12, "emergency_admission")?,
            high_risk_med: row.parse_bool(13, "high_risk_med")?,
            polypharmacy: row.parse_bool(14, "polypharmacy")?,
            non_home_admission_source: row.parse_bool(15, "non_home_admission_source")?,
            label,
            missing,
        };
        record
            .validate()
            .map_err(|e| row.err(format!("invalid record: {e}")))?;
        records.push(record);
    }

    let cohort = Cohort::new(records);
    cohort.validate()?;
    Ok(cohort)
}

pub fn save_cohort_csv(cohort: &Cohort, path: &Path) -> Result<()> {
    fs::write(path, cohort_to_csv(cohort)?)?;
    Ok(())
}

pub fn load_cohort_csv(path: &Path) -> Result<Cohort> {
    cohort_from_csv(&fs::read_to_string(path)?)
}

/// Imputation medians travel as their own JSON artifact: serving must apply
/// the training-set medians verbatim, never medians recomputed online.
pub fn imputation_to_json(imputation: &Imputation) -> Result<String> {
    let mut json = serde_json::to_string_pretty(imputation)?;
    json.push('\n');
    Ok(json)
}

pub fn imputation_from_json(text: &str) -> Result<Imputation> {
    let imputation: Imputation = serde_json::from_str(text)?;
    if imputation.schema_version != SCHEMA_VERSION {
        return Err(Error::invalid_config(format!(
            "schema version {} not supported (expected {SCHEMA_VERSION})",
            imputation.schema_version
        )));
    }
    Ok(imputation)
}

pub fn save_imputation(imputation: &Imputation, path: &Path) -> Result<()> {
    fs::write(path, imputation_to_json(imputation)?)?;
    Ok(())
}

pub fn load_imputation(path: &Path) -> Result<Imputation> {
    imputation_from_json(&fs::read_to_string(path)?)
}

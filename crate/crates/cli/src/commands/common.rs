//! Helpers shared across subcommands: artifact IO, scoring, and the CSV
//! table schemas consumed by `chart`.

use std::path::{Path, PathBuf};
use std::time::Instant;

use readmit_core::cohort::io::{load_cohort_csv, load_imputation};
use readmit_core::cohort::{encode_imputed, encode_record, Cohort, FeatureVector, Imputation};
use readmit_core::eval::{CalibrationBin, PrPoint, RocPoint, ScoredSet, SweepRow};
use readmit_core::explain::{Direction, GlobalImportance};
use readmit_core::model::{load_model, Model};
use readmit_core::{Error, Result};

pub fn ensure_dir(path: &Path) -> Result<()> {
    std::fs::create_dir_all(path)?;
    Ok(())
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text)?;
    Ok(())
}

pub fn read_cohort(path: &Path) -> Result<Cohort> {
    load_cohort_csv(path)
}

pub struct Scorer {
    pub model: Model,
    pub imputation: Imputation,
}

impl Scorer {
    pub fn load(model_path: &Path, imputation_path: &Path) -> Result<Scorer> {
        Ok(Scorer {
            model: load_model(model_path)?,
            imputation: load_imputation(imputation_path)?,
        })
    }

    /// Imputed feature matrix for `cohort`, using the training medians.
    pub fn features(&self, cohort: &Cohort) -> Result<Vec<FeatureVector>> {
        encode_imputed(cohort, &self.imputation)
    }

    /// Raw (NaN-preserving) vectors, for display values and beeswarm cells.
    pub fn raw_features(&self, cohort: &Cohort) -> Result<Vec<FeatureVector>> {
        cohort.records.iter().map(encode_record).collect()
    }

    pub fn probabilities(&self, features: &[FeatureVector]) -> Vec<f64> {
        features.iter().map(|x| self.model.predict_proba(x)).collect()
    }

    pub fn scored_set(&self, cohort: &Cohort) -> Result<ScoredSet> {
        let features = self.features(cohort)?;
        ScoredSet::new(self.probabilities(&features), cohort.labels()?)
    }
}

/// Serializes with two-space indentation and a trailing newline, the house
/// convention for every JSON artifact.
pub fn to_pretty_json<T: serde::Serialize>(value: &T) -> Result<String> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::invalid_input(format!("serialization failed: {e}")))?;
    text.push('\n');
    Ok(text)
}

fn cell(value: Option<f64>) -> String {
    value.map(|v| v.to_string()).unwrap_or_default()
}

pub fn roc_csv(points: &[RocPoint]) -> String {
    let mut out = String::from("threshold,fpr,tpr\n");
    for p in points {
        out.push_str(&format!("{},{},{}\n", p.threshold, p.fpr, p.tpr));
    }
    out
}

pub fn prc_csv(points: &[PrPoint]) -> String {
    let mut out = String::from("threshold,recall,precision\n");
    for p in points {
        out.push_str(&format!("{},{},{}\n", p.threshold, p.recall, p.precision));
    }
    out
}

pub fn calibration_csv(bins: &[CalibrationBin]) -> String {
    let mut out = String::from("lo,hi,count,mean_score,observed_rate\n");
    for b in bins {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            b.lo,
            b.hi,
            b.count,
            cell(b.mean_score),
            cell(b.observed_rate)
        ));
    }
    out
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("threshold,precision,recall,f1,tp,fp,tn,fn\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.threshold,
            cell(r.precision),
            cell(r.recall),
            cell(r.f1),
            r.tp,
            r.fp,
            r.tn,
            r.fn_
        ));
    }
    out
}

pub fn importance_csv(importance: &GlobalImportance) -> String {
    let mut out = String::from("feature,mean_abs_phi,direction\n");
    for entry in &importance.ranked {
        let direction = match entry.direction {
            Direction::Increases => "increases",
            Direction::Decreases => "decreases",
            Direction::Varies => "varies",
        };
        out.push_str(&format!("{},{},{}\n", entry.feature, entry.mean_abs_phi, direction));
    }
    out
}

/// Millisecond wall-clock for manifest timings.
pub struct Stage(Instant);

impl Stage {
    pub fn start() -> Stage {
        Stage(Instant::now())
    }

    pub fn lap(&mut self) -> u64 {
        let elapsed = self.0.elapsed().as_millis() as u64;
        self.0 = Instant::now();
        elapsed
    }
}

/// Output path inside the command's --out-dir.
pub fn out_path(dir: &Path, name: &str) -> PathBuf {
    dir.join(name)
}

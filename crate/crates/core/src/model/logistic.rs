//! L2-regularized logistic regression trained by full-batch gradient
//! descent with Armijo backtracking.
//!
//! Features are z-score standardized with statistics from the training set
//! (stored in the model so scoring applies the identical transform; a zero
//! standard deviation falls back to 1 to leave constant columns untouched).
//! The objective is
//!
//! ```text
//! J(w, b) = mean logloss + ||w||^2 / (2 C n)
//! ```
//!
//! with an unpenalized intercept. Smaller `c` means stronger regularization
//! (matching the common inverse-strength convention). Optimization stops
//! when the gradient's max-norm drops below `tol` or after `max_iter` steps.

use serde::{Deserialize, Serialize};

use crate::cohort::schema::FEATURE_COUNT;
use crate::cohort::FeatureVector;
use crate::error::{Error, Result};
use crate::model::gbdt::sigmoid;

/// Armijo sufficient-decrease constant.
const ARMIJO_C1: f64 = 1e-4;
/// Maximum step halvings per line search.
const MAX_BACKTRACKS: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogisticConfig {
    /// Inverse regularization strength.
    pub c: f64,
    /// Convergence threshold on the gradient max-norm.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for LogisticConfig {
    fn default() -> Self {
        LogisticConfig { c: 0.001, tol: 1e-6, max_iter: 5000 }
    }
}

impl LogisticConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(Error::invalid_config("c must be positive and finite"));
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::invalid_config("tol must be positive and finite"));
        }
        if self.max_iter == 0 {
            return Err(Error::invalid_config("max_iter must be positive"));
        }
        Ok(())
    }
}

/// Per-feature standardization statistics, fitted on the training set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    /// Population standard deviation; exact zeros are stored as 1.0.
    pub sd: Vec<f64>,
}

impl Standardizer {
    pub fn fit(features: &[FeatureVector]) -> Result<Standardizer> {
        if features.is_empty() {
            return Err(Error::invalid_input("cannot standardize an empty set"));
        }
        let n = features.len() as f64;
        let mut mean = vec![0.0_f64; FEATURE_COUNT];
        for x in features {
            for (m, v) in mean.iter_mut().zip(&x.0) {
                if !v.is_finite() {
                    return Err(Error::invalid_input(
                        "standardization requires finite values (impute missing data first)",
                    ));
                }
                *m += v;
            }
        }
        for m in &mut mean {
            *m /= n;
        }
        let mut var = vec![0.0_f64; FEATURE_COUNT];
        for x in features {
            for ((s, v), m) in var.iter_mut().zip(&x.0).zip(&mean) {
                let d = v - m;
                *s += d * d;
            }
        }
        let sd = var
            .iter()
            .map(|s| {
                let sd = (s / n).sqrt();
                if sd == 0.0 {
                    1.0
                } else {
                    sd
                }
            })
            .collect();
        Ok(Standardizer { mean, sd })
    }

    pub fn transform(&self, x: &FeatureVector) -> [f64; FEATURE_COUNT] {
        let mut z = [0.0; FEATURE_COUNT];
        for i in 0..FEATURE_COUNT {
            z[i] = (x.0[i] - self.mean[i]) / self.sd[i];
        }
        z
    }

    pub fn validate(&self) -> Result<()> {
        if self.mean.len() != FEATURE_COUNT || self.sd.len() != FEATURE_COUNT {
            return Err(Error::invalid_model("standardizer dimension mismatch"));
        }
        if self.mean.iter().any(|m| !m.is_finite()) {
            return Err(Error::invalid_model("standardizer means must be finite"));
        }
        if self.sd.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
            return Err(Error::invalid_model("standardizer sds must be finite and positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    /// Weights in standardized feature space.
    pub weights: Vec<f64>,
    pub intercept: f64,
    pub standardizer: Standardizer,
    pub config: LogisticConfig,
    /// Iterations actually used; equals `max_iter` when tolerance was not hit.
    pub iterations: usize,
    pub converged: bool,
}

impl LogisticModel {
    pub fn predict_margin(&self, x: &FeatureVector) -> f64 {
        let z = self.standardizer.transform(x);
        let mut acc = self.intercept;
        for (w, v) in self.weights.iter().zip(&z) {
            acc += w * v;
        }
        acc
    }

    pub fn predict_proba(&self, x: &FeatureVector) -> f64 {
        sigmoid(self.predict_margin(x))
    }

    pub fn validate(&self) -> Result<()> {
        if self.weights.len() != FEATURE_COUNT {
            return Err(Error::invalid_model(format!(
                "expected {FEATURE_COUNT} weights, found {}",
                self.weights.len()
            )));
        }
        if self.weights.iter().any(|w| !w.is_finite()) || !self.intercept.is_finite() {
            return Err(Error::invalid_model("weights and intercept must be finite"));
        }
        self.standardizer.validate()?;
        self.config.validate()
    }
}

/// Objective and gradient at (weights, intercept) on standardized rows.
fn objective_and_gradient(
    rows: &[[f64; FEATURE_COUNT]],
    labels: &[bool],
    weights: &[f64],
    intercept: f64,
    c: f64,
) -> (f64, Vec<f64>, f64) {
    let n = rows.len() as f64;
    let mut loss = 0.0;
    let mut grad_w = vec![0.0_f64; FEATURE_COUNT];
    let mut grad_b = 0.0;
    for (x, y) in rows.iter().zip(labels) {
        let mut m = intercept;
        for (w, v) in weights.iter().zip(x) {
            m += w * v;
        }
        // Stable logloss: softplus(m) - y*m.
        let sp = if m > 0.0 { m + (-m).exp().ln_1p() } else { m.exp().ln_1p() };
        let y = *y as u8 as f64;
        loss += sp - y * m;
        let r = sigmoid(m) - y;
        for (g, v) in grad_w.iter_mut().zip(x) {
            *g += r * v;
        }
        grad_b += r;
    }
    loss /= n;
    grad_b /= n;
    let mut penalty = 0.0;
    for (g, w) in grad_w.iter_mut().zip(weights) {
        *g = *g / n + w / (c * n);
        penalty += w * w;
    }
    loss += penalty / (2.0 * c * n);
    (loss, grad_w, grad_b)
}

pub fn train_logistic(
    features: &[FeatureVector],
    labels: &[bool],
    config: &LogisticConfig,
) -> Result<LogisticModel> {
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
    if pos == 0 || pos == labels.len() {
        return Err(Error::invalid_input(
            "training needs both classes (got a single-class label vector)",
        ));
    }
    let standardizer = Standardizer::fit(features)?;
    let rows: Vec<[f64; FEATURE_COUNT]> =
        features.iter().map(|x| standardizer.transform(x)).collect();

    let mut weights = vec![0.0_f64; FEATURE_COUNT];
    let mut intercept = 0.0_f64;
    let (mut loss, mut grad_w, mut grad_b) =
        objective_and_gradient(&rows, labels, &weights, intercept, config.c);

    let mut iterations = 0;
    let mut converged = false;
    for iter in 0..config.max_iter {
        iterations = iter;
        let grad_max = grad_w
            .iter()
            .chain(std::iter::once(&grad_b))
            .fold(0.0_f64, |acc, g| acc.max(g.abs()));
        if grad_max < config.tol {
            converged = true;
            break;
        }
        let grad_sq: f64 = grad_w.iter().map(|g| g * g).sum::<f64>() + grad_b * grad_b;

        // Backtracking line search along the negative gradient.
        let mut step = 1.0_f64;
        let mut accepted = false;
        for _ in 0..=MAX_BACKTRACKS {
            let trial_w: Vec<f64> =
                weights.iter().zip(&grad_w).map(|(w, g)| w - step * g).collect();
            let trial_b = intercept - step * grad_b;
            let (trial_loss, tg_w, tg_b) =
                objective_and_gradient(&rows, labels, &trial_w, trial_b, config.c);
            if trial_loss <= loss - ARMIJO_C1 * step * grad_sq {
                weights = trial_w;
                intercept = trial_b;
                loss = trial_loss;
                grad_w = tg_w;
                grad_b = tg_b;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            // Step size underflowed; we are at numerical precision.
            converged = true;
            break;
        }
    }
    if converged {
        iterations += 1;
    } else {
        iterations = config.max_iter;
    }

    let model = LogisticModel {
        weights,
        intercept,
        standardizer,
        config: *config,
        iterations,
        converged,
    };
    model.validate()?;
    Ok(model)
}

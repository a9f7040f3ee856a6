//! Feedback factor from the previous release and `1/FF` scaling of the inputs of
//! re-implemented requirements.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::model::{RatingMatrices, RequirementId};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FeedbackError {
    #[error("estimated hours must be positive, got {0}")]
    Estimated(f64),
    #[error("actual hours must be non-negative, got {0}")]
    Actual(f64),
    #[error("no requirements were implemented; use the first-increment factor instead")]
    NothingImplemented,
    #[error("{failed} failed requirements exceed {implemented} implemented")]
    TooManyFailed { failed: u32, implemented: u32 },
    #[error("user perception must lie in [0,1], got {0}")]
    Perception(f64),
    #[error("feedback factor must be positive, got {0}")]
    Factor(f64),
    #[error("model weight must lie in [0,1] and floor in (0,1]: weight {model_weight}, floor {ff_floor}")]
    Config { model_weight: f64, ff_floor: f64 },
    #[error("requirement {0} is not a candidate")]
    UnknownCandidate(RequirementId),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReleaseOutcome {
    pub actual_hours: f64,
    pub estimated_hours: f64,
    pub failed_count: u32,
    pub implemented_count: u32,
    /// Overall customer rating of the release in `[0, 1]`.
    pub user_perception: f64,
}

impl ReleaseOutcome {
    pub fn check(&self) -> Result<(), FeedbackError> {
        if !(self.estimated_hours > 0.0 && self.estimated_hours.is_finite()) {
            return Err(FeedbackError::Estimated(self.estimated_hours));
        }
        if !(self.actual_hours >= 0.0 && self.actual_hours.is_finite()) {
            return Err(FeedbackError::Actual(self.actual_hours));
        }
        if self.implemented_count == 0 {
            return Err(FeedbackError::NothingImplemented);
        }
        if self.failed_count > self.implemented_count {
            return Err(FeedbackError::TooManyFailed {
                failed: self.failed_count,
                implemented: self.implemented_count,
            });
        }
        if !(0.0..=1.0).contains(&self.user_perception) {
            return Err(FeedbackError::Perception(self.user_perception));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeedbackConfig {
    /// Share given to model accuracy (`dT + FR`); the rest goes to user perception.
    #[serde(default = "default_model_weight")]
    pub model_weight: f64,
    #[serde(default = "default_ff_floor")]
    pub ff_floor: f64,
}

fn default_model_weight() -> f64 {
    0.5
}

fn default_ff_floor() -> f64 {
    0.05
}

impl Default for FeedbackConfig {
    fn default() -> Self {
        Self {
            model_weight: default_model_weight(),
            ff_floor: default_ff_floor(),
        }
    }
}

impl FeedbackConfig {
    pub fn check(&self) -> Result<(), FeedbackError> {
        if (0.0..=1.0).contains(&self.model_weight) && self.ff_floor > 0.0 && self.ff_floor <= 1.0 {
            Ok(())
        } else {
            Err(FeedbackError::Config {
                model_weight: self.model_weight,
                ff_floor: self.ff_floor,
            })
        }
    }
}

/// Schedule overrun: 0 when on time, the relative overrun up to a factor of
/// two, and 1 beyond that.
pub fn compute_dt(actual: f64, estimated: f64) -> Result<f64, FeedbackError> {
    if !(estimated > 0.0 && estimated.is_finite()) {
        return Err(FeedbackError::Estimated(estimated));
    }
    if actual.is_nan() || actual < 0.0 {
        return Err(FeedbackError::Actual(actual));
    }
    Ok(if actual <= estimated {
        0.0
    } else if actual <= 2.0 * estimated {
        (actual - estimated) / estimated
    } else {
        1.0
    })
}

pub fn compute_fr(failed: u32, implemented: u32) -> Result<f64, FeedbackError> {
    if implemented == 0 {
        return Err(FeedbackError::NothingImplemented);
    }
    if failed > implemented {
        return Err(FeedbackError::TooManyFailed { failed, implemented });
    }
    Ok(f64::from(failed) / f64::from(implemented))
}

/// `UP - w * (dT + FR)` clamped into `[ff_floor, 1]`.
pub fn feedback_factor(dt: f64, fr: f64, up: f64, cfg: &FeedbackConfig) -> f64 {
    let raw = up - cfg.model_weight * (dt + fr);
    raw.clamp(cfg.ff_floor, 1.0)
}

pub fn compute_ff(outcome: &ReleaseOutcome, cfg: &FeedbackConfig) -> Result<f64, FeedbackError> {
    outcome.check()?;
    cfg.check()?;
    let dt = compute_dt(outcome.actual_hours, outcome.estimated_hours)?;
    let fr = compute_fr(outcome.failed_count, outcome.implemented_count)?;
    Ok(feedback_factor(dt, fr, outcome.user_perception, cfg))
}

/// Feedback factor for the first increment, where no previous release exists.
pub fn first_increment_ff() -> f64 {
    1.0
}

/// Times and ratings of one iteration's candidates, column-aligned with `candidates`.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanningInputs {
    pub candidates: Vec<RequirementId>,
    pub times: Vec<f64>,
    pub matrices: RatingMatrices,
}

/// Divides the time, priority and value of every re-implemented candidate by `ff`.
/// Everything else is copied unchanged.
pub fn apply_feedback(
    inputs: &PlanningInputs,
    reimplemented: &BTreeSet<RequirementId>,
    ff: f64,
) -> Result<PlanningInputs, FeedbackError> {
    if !(ff > 0.0 && ff.is_finite()) {
        return Err(FeedbackError::Factor(ff));
    }
    let mut columns = Vec::with_capacity(reimplemented.len());
    for id in reimplemented {
        let c = inputs
            .candidates
            .iter()
            .position(|x| x == id)
            .ok_or_else(|| FeedbackError::UnknownCandidate(id.clone()))?;
        columns.push(c);
    }
    let mut out = inputs.clone();
    for &c in &columns {
        out.times[c] /= ff;
        for row in out.matrices.prio.iter_mut().chain(out.matrices.value.iter_mut()) {
            row[c] /= ff;
        }
    }
    Ok(out)
}

//! Confusion-matrix metrics and event-weighted aggregation across learners.
//!
//! Undefined ratios (0/0) are reported as 0.

use std::ops::AddAssign;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::EngagementLabel;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tn: u64,
}

impl ConfusionMatrix {
    pub fn new(tp: u64, fp: u64, fn_: u64, tn: u64) -> Self {
        ConfusionMatrix { tp, fp, fn_, tn }
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.fn_ + self.tn
    }

    pub fn is_empty(&self) -> bool {
        self.total() == 0
    }

    pub fn record(&mut self, predicted: EngagementLabel, actual: EngagementLabel) {
        match (predicted.is_engaged(), actual.is_engaged()) {
            (true, true) => self.tp += 1,
            (true, false) => self.fp += 1,
            (false, true) => self.fn_ += 1,
            (false, false) => self.tn += 1,
        }
    }
}

impl AddAssign for ConfusionMatrix {
    fn add_assign(&mut self, rhs: Self) {
        self.tp += rhs.tp;
        self.fp += rhs.fp;
        self.fn_ += rhs.fn_;
        self.tn += rhs.tn;
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Scores {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

fn ratio(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

pub fn compute(cm: &ConfusionMatrix) -> Result<Scores> {
    if cm.is_empty() {
        return Err(Error::EmptyConfusionMatrix);
    }
    let (tp, fp, fn_, tn) = (cm.tp as f64, cm.fp as f64, cm.fn_ as f64, cm.tn as f64);
    let precision = ratio(tp, tp + fp);
    let recall = ratio(tp, tp + fn_);
    Ok(Scores {
        accuracy: (tp + tn) / (tp + fp + fn_ + tn),
        precision,
        recall,
        f1: ratio(2.0 * precision * recall, precision + recall),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LearnerMetrics {
    pub learner_id: String,
    pub event_count: u64,
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl LearnerMetrics {
    pub fn from_confusion(learner_id: impl Into<String>, cm: &ConfusionMatrix) -> Result<Self> {
        let s = compute(cm)?;
        Ok(LearnerMetrics {
            learner_id: learner_id.into(),
            event_count: cm.total(),
            accuracy: s.accuracy,
            precision: s.precision,
            recall: s.recall,
            f1: s.f1,
        })
    }

    pub fn scores(&self) -> Scores {
        Scores {
            accuracy: self.accuracy,
            precision: self.precision,
            recall: self.recall,
            f1: self.f1,
        }
    }
}

/// Event-weighted aggregate over learners.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AggregateMetrics {
    pub learners: u64,
    pub events: u64,
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl AggregateMetrics {
    pub fn scores(&self) -> Scores {
        Scores {
            accuracy: self.accuracy,
            precision: self.precision,
            recall: self.recall,
            f1: self.f1,
        }
    }
}

/// Each metric is `Σ metricₗ · nₗ / Σ nₗ`. Learners with no scored events
/// carry no weight; an empty input gives all-zero metrics.
pub fn weighted_aggregate(per_learner: &[LearnerMetrics]) -> AggregateMetrics {
    let events: u64 = per_learner.iter().map(|m| m.event_count).sum();
    let mut agg = AggregateMetrics {
        learners: per_learner.len() as u64,
        events,
        ..Default::default()
    };
    if events == 0 {
        return agg;
    }
    let n = events as f64;
    let weighted = |f: fn(&LearnerMetrics) -> f64| -> f64 {
        per_learner
            .iter()
            .map(|m| f(m) * m.event_count as f64)
            .sum::<f64>()
            / n
    };
    agg.accuracy = weighted(|m| m.accuracy);
    agg.precision = weighted(|m| m.precision);
    agg.recall = weighted(|m| m.recall);
    agg.f1 = weighted(|m| m.f1);
    agg
}

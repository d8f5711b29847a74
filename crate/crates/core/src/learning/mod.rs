//! Online engagement classifiers.
//!
//! Every classifier follows the same contract: `fit` applies one online
//! update for one event, `predict_proba` returns the engagement probability
//! and `predict` thresholds it. Classifiers only hold validated
//! hyperparameters; all per-learner state lives in the [`LearnerModel`], so
//! one classifier can serve any number of learners concurrently.

mod baselines;
mod ink;
mod interest;
mod knowledge;
mod novelty;
mod params;
mod team;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use baselines::{EngageClassifier, MajorityClassifier, PersistenceClassifier};
pub use ink::InkClassifier;
pub use interest::InterestClassifier;
pub use knowledge::KnowledgeClassifier;
pub use novelty::NoveltyClassifier;
pub use params::ClassifierParams;
pub use team::Outcome;

use crate::error::{Error, Result};
use crate::models::{EngagementLabel, EventModel, LearnerModel, StateKind};

/// A thresholded engagement probability.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub probability: f64,
    pub label: EngagementLabel,
}

impl Prediction {
    pub fn from_probability(probability: f64, threshold: f64) -> Self {
        Prediction {
            probability,
            label: EngagementLabel::from_engaged(probability >= threshold),
        }
    }
}

pub trait EngagementClassifier: Send + Sync {
    fn kind(&self) -> ModelKind;

    fn params(&self) -> &ClassifierParams;

    /// The belief map this classifier updates, if any.
    fn state_kind(&self) -> Option<StateKind>;

    /// Probability that the learner engages with the event.
    fn predict_proba(&self, learner: &LearnerModel, event: &EventModel) -> Result<f64>;

    /// Belief update for one labelled event, without bookkeeping.
    fn update_beliefs(
        &self,
        learner: &mut LearnerModel,
        event: &EventModel,
        label: EngagementLabel,
    ) -> Result<()>;

    fn predict(&self, learner: &LearnerModel, event: &EventModel) -> Result<Prediction> {
        let p = self.predict_proba(learner, event)?;
        Ok(Prediction::from_probability(p, self.params().threshold))
    }

    /// Applies one online update and records the outcome on the learner.
    ///
    /// Events must arrive in timestamp order. On error the learner is left
    /// unchanged.
    fn fit(&self, learner: &mut LearnerModel, event: &EventModel, label: EngagementLabel) -> Result<()> {
        check_event(event)?;
        if let Some(last) = learner.last_event_time {
            if event.timestamp < last {
                return Err(Error::OutOfOrder {
                    event: event.timestamp,
                    last,
                });
            }
        }
        self.update_beliefs(learner, event, label)?;
        learner.record_outcome(event.timestamp, label);
        Ok(())
    }
}

pub(crate) fn check_event(event: &EventModel) -> Result<()> {
    if event.topics.is_empty() {
        Err(Error::EmptyTopics)
    } else {
        Ok(())
    }
}

/// Names of the available classifiers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Engage,
    Majority,
    Persistence,
    Interest,
    Novelty,
    Knowledge,
    Ink,
}

impl ModelKind {
    pub const ALL: [ModelKind; 7] = [
        ModelKind::Engage,
        ModelKind::Majority,
        ModelKind::Persistence,
        ModelKind::Interest,
        ModelKind::Novelty,
        ModelKind::Knowledge,
        ModelKind::Ink,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Engage => "engage",
            ModelKind::Majority => "majority",
            ModelKind::Persistence => "persistence",
            ModelKind::Interest => "interest",
            ModelKind::Novelty => "novelty",
            ModelKind::Knowledge => "knowledge",
            ModelKind::Ink => "ink",
        }
    }

    pub fn build(self, params: ClassifierParams) -> Result<Box<dyn EngagementClassifier>> {
        let params = params.validated()?;
        Ok(match self {
            ModelKind::Engage => Box::new(EngageClassifier::new(params)),
            ModelKind::Majority => Box::new(MajorityClassifier::new(params)),
            ModelKind::Persistence => Box::new(PersistenceClassifier::new(params)),
            ModelKind::Interest => Box::new(InterestClassifier::new(params)?),
            ModelKind::Novelty => Box::new(NoveltyClassifier::new(params)?),
            ModelKind::Knowledge => Box::new(KnowledgeClassifier::new(params)?),
            ModelKind::Ink => Box::new(InkClassifier::new(params)?),
        })
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ModelKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::UnknownModel(s.to_string()))
    }
}

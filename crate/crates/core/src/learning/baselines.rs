use super::{check_event, ClassifierParams, EngagementClassifier, ModelKind};
use crate::error::Result;
use crate::models::{EngagementLabel, EventModel, LearnerModel, StateKind};

/// Always predicts engagement.
#[derive(Clone, Debug)]
pub struct EngageClassifier {
    params: ClassifierParams,
}

impl EngageClassifier {
    pub fn new(params: ClassifierParams) -> Self {
        EngageClassifier { params }
    }
}

impl EngagementClassifier for EngageClassifier {
    fn kind(&self) -> ModelKind {
        ModelKind::Engage
    }

    fn params(&self) -> &ClassifierParams {
        &self.params
    }

    fn state_kind(&self) -> Option<StateKind> {
        None
    }

    fn predict_proba(&self, _learner: &LearnerModel, event: &EventModel) -> Result<f64> {
        check_event(event)?;
        Ok(1.0)
    }

    fn update_beliefs(&self, _: &mut LearnerModel, _: &EventModel, _: EngagementLabel) -> Result<()> {
        Ok(())
    }
}

/// Predicts the learner's majority label so far; the probability is the
/// engaged fraction, and an empty history counts as a tie.
#[derive(Clone, Debug)]
pub struct MajorityClassifier {
    params: ClassifierParams,
}

impl MajorityClassifier {
    pub fn new(params: ClassifierParams) -> Self {
        MajorityClassifier { params }
    }
}

impl EngagementClassifier for MajorityClassifier {
    fn kind(&self) -> ModelKind {
        ModelKind::Majority
    }

    fn params(&self) -> &ClassifierParams {
        &self.params
    }

    fn state_kind(&self) -> Option<StateKind> {
        None
    }

    fn predict_proba(&self, learner: &LearnerModel, event: &EventModel) -> Result<f64> {
        check_event(event)?;
        let total = learner.event_count();
        if total == 0 {
            return Ok(0.5);
        }
        Ok(learner.engaged_count as f64 / total as f64)
    }

    fn update_beliefs(&self, _: &mut LearnerModel, _: &EventModel, _: EngagementLabel) -> Result<()> {
        Ok(())
    }
}

/// Repeats the learner's previous label; the first event counts as engaged.
#[derive(Clone, Debug)]
pub struct PersistenceClassifier {
    params: ClassifierParams,
}

impl PersistenceClassifier {
    pub fn new(params: ClassifierParams) -> Self {
        PersistenceClassifier { params }
    }
}

impl EngagementClassifier for PersistenceClassifier {
    fn kind(&self) -> ModelKind {
        ModelKind::Persistence
    }

    fn params(&self) -> &ClassifierParams {
        &self.params
    }

    fn state_kind(&self) -> Option<StateKind> {
        None
    }

    fn predict_proba(&self, learner: &LearnerModel, event: &EventModel) -> Result<f64> {
        check_event(event)?;
        Ok(match learner.last_label {
            None | Some(EngagementLabel::Engaged) => 1.0,
            Some(EngagementLabel::NotEngaged) => 0.0,
        })
    }

    fn update_beliefs(&self, _: &mut LearnerModel, _: &EventModel, _: EngagementLabel) -> Result<()> {
        Ok(())
    }
}

use super::{
    check_event, ClassifierParams, EngagementClassifier, InterestClassifier, KnowledgeClassifier,
    ModelKind, NoveltyClassifier,
};
use crate::error::Result;
use crate::models::{EngagementLabel, EventModel, LearnerModel, StateKind};

pub const UNIFORM_WEIGHTS: [f64; 3] = [1.0 / 3.0; 3];

/// Ensemble of the interest, novelty and knowledge models.
///
/// The engagement probability is a convex mixture of the three constituent
/// probabilities. After each event every weight is multiplied by
/// `exp(-η·|p − y|)` and the weights renormalised. Weights are per learner
/// and stored on the [`LearnerModel`], in the order interest, novelty,
/// knowledge.
///
/// Novelty and knowledge read the same knowledge map, so the map is updated
/// once per event (by the novelty model); the knowledge model only
/// contributes its prediction.
#[derive(Clone, Debug)]
pub struct InkClassifier {
    params: ClassifierParams,
    interest: InterestClassifier,
    novelty: NoveltyClassifier,
    knowledge: KnowledgeClassifier,
}

impl InkClassifier {
    pub fn new(params: ClassifierParams) -> Result<Self> {
        let params = params.validated()?;
        Ok(InkClassifier {
            interest: InterestClassifier::new(params.clone())?,
            novelty: NoveltyClassifier::new(params.clone())?,
            knowledge: KnowledgeClassifier::new(params.clone())?,
            params,
        })
    }

    pub fn weights(learner: &LearnerModel) -> [f64; 3] {
        learner.ensemble_weights.unwrap_or(UNIFORM_WEIGHTS)
    }

    /// Interest, novelty and knowledge probabilities, in that order.
    pub fn constituent_probabilities(&self, learner: &LearnerModel, event: &EventModel) -> Result<[f64; 3]> {
        Ok([
            self.interest.predict_proba(learner, event)?,
            self.novelty.predict_proba(learner, event)?,
            self.knowledge.predict_proba(learner, event)?,
        ])
    }
}

/// Convex combination of `probabilities` under `weights`.
pub fn mix(weights: &[f64; 3], probabilities: &[f64; 3]) -> f64 {
    let p: f64 = weights.iter().zip(probabilities).map(|(w, p)| w * p).sum();
    p.clamp(0.0, 1.0)
}

/// One multiplicative-weights step.
pub fn reweight(weights: &[f64; 3], probabilities: &[f64; 3], target: f64, rate: f64) -> [f64; 3] {
    let mut next = [0.0; 3];
    for i in 0..3 {
        next[i] = weights[i] * (-rate * (probabilities[i] - target).abs()).exp();
    }
    let total: f64 = next.iter().sum();
    if !(total > 0.0) || !total.is_finite() {
        return *weights;
    }
    for w in &mut next {
        *w /= total;
    }
    next
}

impl EngagementClassifier for InkClassifier {
    fn kind(&self) -> ModelKind {
        ModelKind::Ink
    }

    fn params(&self) -> &ClassifierParams {
        &self.params
    }

    fn state_kind(&self) -> Option<StateKind> {
        Some(StateKind::Knowledge)
    }

    fn predict_proba(&self, learner: &LearnerModel, event: &EventModel) -> Result<f64> {
        check_event(event)?;
        let probabilities = self.constituent_probabilities(learner, event)?;
        Ok(mix(&Self::weights(learner), &probabilities))
    }

    fn update_beliefs(
        &self,
        learner: &mut LearnerModel,
        event: &EventModel,
        label: EngagementLabel,
    ) -> Result<()> {
        let probabilities = self.constituent_probabilities(learner, event)?;
        let weights = reweight(
            &Self::weights(learner),
            &probabilities,
            label.as_target(),
            self.params.ink_learning_rate,
        );
        // Stage both updates so a failure leaves the learner untouched.
        let mut staged = learner.clone();
        self.interest.update_beliefs(&mut staged, event, label)?;
        self.novelty.update_beliefs(&mut staged, event, label)?;
        learner.interest = staged.interest;
        learner.knowledge = staged.knowledge;
        learner.ensemble_weights = Some(weights);
        Ok(())
    }
}

use super::knowledge::knowledge_team;
use super::team::{Outcome, Team};
use super::{check_event, ClassifierParams, EngagementClassifier, ModelKind};
use crate::bayes::{draw_margin, std_interval_probability, Gaussian};
use crate::error::Result;
use crate::models::{EngagementLabel, EventModel, LearnerModel, StateKind};

/// Novelty model: the learner engages when the material is neither too easy
/// nor too hard, i.e. when the learner-versus-content comparison ends in a
/// draw.
#[derive(Clone, Debug)]
pub struct NoveltyClassifier {
    params: ClassifierParams,
    prior: Gaussian,
}

impl NoveltyClassifier {
    pub fn new(params: ClassifierParams) -> Result<Self> {
        let params = params.validated()?;
        let prior = Gaussian::new(params.init_mean, params.init_variance)?;
        Ok(NoveltyClassifier { params, prior })
    }

    /// Half-width of the draw interval for an event with `topics` topics.
    pub fn margin(&self, topics: usize) -> f64 {
        match self.params.draw_margin {
            Some(m) => m,
            None => draw_margin(self.params.draw_probability, self.params.beta, 2 * topics),
        }
    }

    fn team(&self, learner: &LearnerModel, event: &EventModel, tau: f64) -> Team {
        knowledge_team(&self.params, self.prior, learner, event, tau)
    }
}

impl EngagementClassifier for NoveltyClassifier {
    fn kind(&self) -> ModelKind {
        ModelKind::Novelty
    }

    fn params(&self) -> &ClassifierParams {
        &self.params
    }

    fn state_kind(&self) -> Option<StateKind> {
        Some(StateKind::Knowledge)
    }

    fn predict_proba(&self, learner: &LearnerModel, event: &EventModel) -> Result<f64> {
        check_event(event)?;
        let d = self.team(learner, event, 0.0).performance();
        let eps = self.margin(event.topics.len());
        if eps.is_infinite() {
            return Ok(1.0);
        }
        let s = d.std_dev();
        Ok(std_interval_probability((-eps - d.mean()) / s, (eps - d.mean()) / s))
    }

    fn update_beliefs(
        &self,
        learner: &mut LearnerModel,
        event: &EventModel,
        label: EngagementLabel,
    ) -> Result<()> {
        let team = self.team(learner, event, self.params.tau);
        let eps = self.margin(event.topics.len());
        let outcome = match label {
            EngagementLabel::Engaged => Outcome::Within(eps),
            // Disengagement alone does not say whether the material was too
            // easy or too hard; follow the sign of the current difference,
            // with a tie read as too hard.
            EngagementLabel::NotEngaged if team.performance().mean() > 0.0 => Outcome::Above(eps),
            EngagementLabel::NotEngaged => Outcome::Below(eps),
        };
        let posteriors = team.posteriors(outcome)?;
        team.commit(learner, StateKind::Knowledge, &posteriors);
        Ok(())
    }
}

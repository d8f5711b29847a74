use super::team::{Member, Outcome, Team};
use super::{check_event, ClassifierParams, EngagementClassifier, ModelKind};
use crate::bayes::{std_cdf, Gaussian};
use crate::error::Result;
use crate::models::{EngagementLabel, EventModel, LearnerModel, StateKind};

/// Knowledge model: the learner engages when their summed skill on the
/// event's topics exceeds the summed coverage depth.
///
/// The content side is a point mass at `Σ depth`, so the comparison
/// variance is the learner's skill variance plus `2·n·β²` performance noise
/// for the `n` topics on each side.
#[derive(Clone, Debug)]
pub struct KnowledgeClassifier {
    params: ClassifierParams,
    prior: Gaussian,
}

impl KnowledgeClassifier {
    pub fn new(params: ClassifierParams) -> Result<Self> {
        let params = params.validated()?;
        let prior = Gaussian::new(params.init_mean, params.init_variance)?;
        Ok(KnowledgeClassifier { params, prior })
    }

    pub(crate) fn team(&self, learner: &LearnerModel, event: &EventModel, tau: f64) -> Team {
        knowledge_team(&self.params, self.prior, learner, event, tau)
    }
}

/// Learner-versus-content comparison on the knowledge map, with `tau²`
/// added to every member's variance.
pub(crate) fn knowledge_team(
    params: &ClassifierParams,
    prior: Gaussian,
    learner: &LearnerModel,
    event: &EventModel,
    tau: f64,
) -> Team {
    let members: Vec<Member> = Team::members_for(learner, StateKind::Knowledge, event, prior, |_| 1.0)
        .into_iter()
        .map(|mut m| {
            m.belief = m.belief.widen(tau * tau);
            m
        })
        .collect();
    let n = event.topics.len();
    Team {
        members,
        offset: -event.topics.iter().map(|t| t.depth).sum::<f64>(),
        noise_variance: 2.0 * params.performance_variance(n),
    }
}

impl EngagementClassifier for KnowledgeClassifier {
    fn kind(&self) -> ModelKind {
        ModelKind::Knowledge
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
        Ok(std_cdf(d.mean() / d.std_dev()))
    }

    fn update_beliefs(
        &self,
        learner: &mut LearnerModel,
        event: &EventModel,
        label: EngagementLabel,
    ) -> Result<()> {
        let team = self.team(learner, event, self.params.tau);
        let outcome = match label {
            EngagementLabel::Engaged => Outcome::Above(0.0),
            EngagementLabel::NotEngaged => Outcome::Below(0.0),
        };
        let posteriors = team.posteriors(outcome)?;
        team.commit(learner, StateKind::Knowledge, &posteriors);
        Ok(())
    }
}

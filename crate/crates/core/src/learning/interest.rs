use super::team::{Outcome, Team};
use super::{check_event, ClassifierParams, EngagementClassifier, ModelKind};
use crate::bayes::{std_cdf, Gaussian};
use crate::error::Result;
use crate::models::{EngagementLabel, EventModel, LearnerModel, StateKind};

const SECONDS_PER_HOUR: f64 = 3600.0;

/// Interest model: the learner engages when their presence-weighted mean
/// interest in the event's topics exceeds `interest_threshold`.
///
/// The engagement probability is `Φ((Σ iₓ μₓ / n − θ) / s)` with
/// `s² = Σ iₓ² σₓ² + 2·n·β²`. The update conditions the same comparison on
/// the observed label, so prediction and fit share one observation model.
/// Interest beliefs forget between events: before an update each topic's
/// variance grows by `decay_rate · hours_elapsed · τ²`.
#[derive(Clone, Debug)]
pub struct InterestClassifier {
    params: ClassifierParams,
    prior: Gaussian,
}

impl InterestClassifier {
    pub fn new(params: ClassifierParams) -> Result<Self> {
        let params = params.validated()?;
        let prior = Gaussian::new(params.init_mean, params.init_variance)?;
        Ok(InterestClassifier { params, prior })
    }

    fn team(&self, learner: &LearnerModel, event: &EventModel, drift: f64) -> Team {
        let n = event.topics.len() as f64;
        let mut members = Team::members_for(learner, StateKind::Interest, event, self.prior, |i| {
            event.topics[i].presence / n
        });
        for m in &mut members {
            m.belief = m.belief.widen(drift);
        }
        let weighted_variance: f64 = event
            .topics
            .iter()
            .zip(&members)
            .map(|(t, m)| t.presence * t.presence * m.belief.variance())
            .sum();
        let predictive = weighted_variance + 2.0 * self.params.performance_variance(event.topics.len());
        let mut team = Team {
            members,
            offset: -self.params.interest_threshold,
            noise_variance: 0.0,
        };
        team.noise_variance = predictive - team.skill_variance();
        team
    }

    /// Variance added to each topic's interest before fitting `event`.
    pub fn drift(&self, learner: &LearnerModel, event: &EventModel) -> f64 {
        let hours = learner
            .last_event_time
            .map(|last| ((event.timestamp - last) / SECONDS_PER_HOUR).max(0.0))
            .unwrap_or(0.0);
        self.params.decay_rate * hours * self.params.tau * self.params.tau
    }
}

impl EngagementClassifier for InterestClassifier {
    fn kind(&self) -> ModelKind {
        ModelKind::Interest
    }

    fn params(&self) -> &ClassifierParams {
        &self.params
    }

    fn state_kind(&self) -> Option<StateKind> {
        Some(StateKind::Interest)
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
        let team = self.team(learner, event, self.drift(learner, event));
        let outcome = match label {
            EngagementLabel::Engaged => Outcome::Above(0.0),
            EngagementLabel::NotEngaged => Outcome::Below(0.0),
        };
        let posteriors = team.posteriors(outcome)?;
        team.commit(learner, StateKind::Interest, &posteriors);
        Ok(())
    }
}

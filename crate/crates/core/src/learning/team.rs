//! Expectation-propagation update for a single linear comparison.
//!
//! A team performance `D = Σ wᵢ sᵢ + offset + noise` is formed from
//! independent Gaussian skills `sᵢ`. Observing an outcome on `D` (above a
//! margin, below it, or within it) moment-matches `D` and sends the
//! resulting message back to each skill through the sum.

use crate::bayes::{truncate, Gaussian, TruncationMode};
use crate::error::Result;
use crate::models::{EventModel, KcBelief, KcId, LearnerModel, StateKind};

/// Observed relation between team performance and zero.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Outcome {
    /// `D > margin`
    Above(f64),
    /// `D < -margin`
    Below(f64),
    /// `|D| <= margin`
    Within(f64),
}

#[derive(Clone, Debug)]
pub(crate) struct Member {
    pub id: KcId,
    pub title: String,
    pub weight: f64,
    pub belief: Gaussian,
}

#[derive(Clone, Debug)]
pub(crate) struct Team {
    pub members: Vec<Member>,
    pub offset: f64,
    pub noise_variance: f64,
}

impl Team {
    /// Members drawn from one of the learner's maps, prior for unseen ones.
    pub fn members_for(
        learner: &LearnerModel,
        kind: StateKind,
        event: &EventModel,
        prior: Gaussian,
        weight: impl Fn(usize) -> f64,
    ) -> Vec<Member> {
        let map = learner.beliefs(kind);
        event
            .topics
            .iter()
            .enumerate()
            .map(|(i, topic)| Member {
                id: topic.kc.id,
                title: topic.kc.title.clone(),
                weight: weight(i),
                belief: map.get(&topic.kc.id).map(|b| b.belief).unwrap_or(prior),
            })
            .collect()
    }

    pub fn skill_variance(&self) -> f64 {
        self.members
            .iter()
            .map(|m| m.weight * m.weight * m.belief.variance())
            .sum()
    }

    pub fn performance(&self) -> Gaussian {
        let mean = self
            .members
            .iter()
            .map(|m| m.weight * m.belief.mean())
            .sum::<f64>()
            + self.offset;
        let variance = self.skill_variance() + self.noise_variance;
        Gaussian::new(mean, variance).unwrap_or(Gaussian::UNINFORMATIVE)
    }

    /// Posterior belief of every member after observing `outcome`.
    pub fn posteriors(&self, outcome: Outcome) -> Result<Vec<Gaussian>> {
        let prior = self.performance();
        let posterior = match outcome {
            Outcome::Above(margin) => truncate(&prior, 0.0, margin, TruncationMode::Greater)?,
            Outcome::Below(margin) => {
                truncate(&prior.affine(-1.0, 0.0), 0.0, margin, TruncationMode::Greater)?
                    .affine(-1.0, 0.0)
            }
            Outcome::Within(margin) => truncate(&prior, 0.0, margin, TruncationMode::Within)?,
        };
        let message = posterior.divide(&prior);

        Ok(self
            .members
            .iter()
            .map(|m| {
                if m.weight == 0.0 || message.is_uninformative() {
                    return m.belief;
                }
                // Everything in D except this member's contribution.
                let rest_mean = prior.mean() - m.weight * m.belief.mean();
                let rest_variance = prior.variance() - m.weight * m.weight * m.belief.variance();
                let to_member_variance =
                    (message.variance() + rest_variance) / (m.weight * m.weight);
                let to_member_mean = (message.mean() - rest_mean) / m.weight;
                let to_member = Gaussian::from_natural(
                    1.0 / to_member_variance,
                    to_member_mean / to_member_variance,
                );
                m.belief.multiply(&to_member)
            })
            .collect())
    }

    /// Writes `posteriors` back into the learner's map.
    pub fn commit(&self, learner: &mut LearnerModel, kind: StateKind, posteriors: &[Gaussian]) {
        let map = learner.beliefs_mut(kind);
        for (m, belief) in self.members.iter().zip(posteriors) {
            map.insert(
                m.id,
                KcBelief {
                    title: m.title.clone(),
                    belief: *belief,
                },
            );
        }
    }
}

//! Online Bayesian models of learner engagement with educational video.
//!
//! Each learner carries a Gaussian belief per knowledge component (topic).
//! Classifiers predict whether a learner will engage with a video fragment
//! from the topics it covers, then refine the beliefs from the observed
//! label. The crate also provides dataset loading, a sequential evaluation
//! harness, classification metrics and learner-state charts.

pub mod bayes;
pub mod datasets;
pub mod error;
pub mod harness;
pub mod learning;
pub mod metrics;
pub mod models;
pub mod viz;

pub use bayes::Gaussian;
pub use error::{Error, ErrorClass, Result};
pub use learning::{ClassifierParams, EngagementClassifier, ModelKind, Prediction};
pub use metrics::{AggregateMetrics, ConfusionMatrix, LearnerMetrics, Scores};
pub use models::{
    EngagementLabel, EventModel, EventTopic, KcId, KnowledgeComponent, LearnerHistory, LearnerModel,
    SnapshotEntry, StateKind,
};

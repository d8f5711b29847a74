//! Sequential predict-then-fit evaluation and exhaustive hyperparameter
//! sweeps.
//!
//! Each learner's stream is replayed in order: every event is scored with
//! the model fitted on that learner's earlier events only, then used to fit.
//! Learners never share state, so they are replayed in parallel and the
//! results are reassembled in learner-id order.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::datasets::{ColumnMapping, Stream, Streams};
use crate::error::{Error, Result};
use crate::learning::{ClassifierParams, EngagementClassifier, ModelKind};
use crate::metrics::{weighted_aggregate, AggregateMetrics, ConfusionMatrix, LearnerMetrics};
use crate::models::{LearnerHistory, LearnerModel};

/// Candidate values per parameter name.
pub type ParamGrid = BTreeMap<String, Vec<f64>>;

/// One grid point: parameter name to value.
pub type GridPoint = BTreeMap<String, f64>;

/// Explicit interaction files, used instead of a cached PEEK download.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetFiles {
    #[serde(default)]
    pub train: Vec<PathBuf>,
    #[serde(default)]
    pub test: Vec<PathBuf>,
    /// `id,url,title,description` topic mapping.
    #[serde(default)]
    pub titles: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelKind,
    /// Starting point that grid values override.
    #[serde(default)]
    pub params: ClassifierParams,
    #[serde(default)]
    pub grid: ParamGrid,
    #[serde(default)]
    pub warm_up_events: usize,
    /// Learners with fewer events are skipped entirely.
    #[serde(default)]
    pub min_events: Option<usize>,
    #[serde(default)]
    pub record_wall_time: bool,
    #[serde(default)]
    pub cache_dir: Option<PathBuf>,
    #[serde(default)]
    pub columns: Option<ColumnMapping>,
    #[serde(default)]
    pub dataset: Option<DatasetFiles>,
}

impl ExperimentConfig {
    pub fn new(model: ModelKind) -> Self {
        ExperimentConfig {
            model,
            params: ClassifierParams::default(),
            grid: ParamGrid::new(),
            warm_up_events: 0,
            min_events: None,
            record_wall_time: false,
            cache_dir: None,
            columns: None,
            dataset: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let config: ExperimentConfig = serde_json::from_str(text)?;
        config.params.validate()?;
        grid_points(&config.grid)?;
        Ok(config)
    }

    fn keeps(&self, stream: &Stream) -> bool {
        self.min_events.is_none_or(|m| stream.len() >= m)
    }
}

/// Every grid point, in lexicographic order: names ascending, then values
/// ascending with the first name most significant. An empty grid is the
/// single empty point.
pub fn grid_points(grid: &ParamGrid) -> Result<Vec<GridPoint>> {
    let mut points = vec![GridPoint::new()];
    for (name, values) in grid {
        let mut values = values.clone();
        if values.is_empty() || values.iter().any(|v| !v.is_finite()) {
            return Err(Error::EmptyGrid);
        }
        values.sort_by(f64::total_cmp);
        values.dedup();
        points = points
            .into_iter()
            .flat_map(|p| {
                values.iter().map(move |v| {
                    let mut q = p.clone();
                    q.insert(name.clone(), *v);
                    q
                })
            })
            .collect();
    }
    Ok(points)
}

/// Outcome of replaying one learner's stream.
#[derive(Clone, Debug)]
pub struct LearnerRun {
    pub learner_id: String,
    pub confusion: ConfusionMatrix,
    pub learner: LearnerModel,
    pub history: LearnerHistory,
}

/// Predict-then-fit over one stream. The first `warm_up` events are fitted
/// but not scored.
pub fn run_sequential(
    classifier: &dyn EngagementClassifier,
    learner_id: &str,
    stream: &[(crate::models::EventModel, crate::models::EngagementLabel)],
    warm_up: usize,
) -> Result<LearnerRun> {
    replay(classifier, learner_id, stream, warm_up, true)
}

fn replay(
    classifier: &dyn EngagementClassifier,
    learner_id: &str,
    stream: &[(crate::models::EventModel, crate::models::EngagementLabel)],
    warm_up: usize,
    record_history: bool,
) -> Result<LearnerRun> {
    let mut learner = LearnerModel::new(learner_id);
    let state = classifier.state_kind();
    let mut history = LearnerHistory::new(learner_id, state);
    let mut confusion = ConfusionMatrix::default();
    for (i, (event, label)) in stream.iter().enumerate() {
        if i >= warm_up {
            let prediction = classifier.predict(&learner, event).map_err(|e| e.at_event(i))?;
            confusion.record(prediction.label, *label);
        }
        classifier.fit(&mut learner, event, *label).map_err(|e| e.at_event(i))?;
        if let (true, Some(kind)) = (record_history, state) {
            history.record(i, event.timestamp, &learner, kind, event.topics.iter().map(|t| t.kc.id));
        }
    }
    Ok(LearnerRun {
        learner_id: learner_id.to_string(),
        confusion,
        learner,
        history,
    })
}

/// Replays every kept learner in parallel; results in learner-id order.
pub fn run_all(
    classifier: &dyn EngagementClassifier,
    streams: &Streams,
    config: &ExperimentConfig,
    record_history: bool,
) -> Result<Vec<LearnerRun>> {
    let learners: Vec<(&String, &Stream)> = streams.iter().filter(|(_, s)| config.keeps(s)).collect();
    learners
        .par_iter()
        .map(|(id, stream)| replay(classifier, id, stream, config.warm_up_events, record_history))
        .collect()
}

fn learner_metrics(runs: &[LearnerRun]) -> Result<Vec<LearnerMetrics>> {
    runs.iter()
        .filter(|r| !r.confusion.is_empty())
        .map(|r| LearnerMetrics::from_confusion(&r.learner_id, &r.confusion))
        .collect()
}

/// Event-weighted metrics of one parameter setting over `streams`.
pub fn score(
    classifier: &dyn EngagementClassifier,
    streams: &Streams,
    config: &ExperimentConfig,
) -> Result<(AggregateMetrics, Vec<LearnerMetrics>)> {
    let runs = run_all(classifier, streams, config, false)?;
    let per_learner = learner_metrics(&runs)?;
    Ok((weighted_aggregate(&per_learner), per_learner))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub params: GridPoint,
    pub f1: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub model: ModelKind,
    pub best_params: GridPoint,
    pub params: ClassifierParams,
    pub f1: f64,
    pub points: Vec<SweepPoint>,
}

/// Exhaustive grid search maximising event-weighted F1 on `train`. Ties go
/// to the earliest point in lexicographic order.
pub fn sweep(config: &ExperimentConfig, train: &Streams) -> Result<SweepResult> {
    let mut best: Option<(GridPoint, ClassifierParams, f64)> = None;
    let mut points = Vec::new();
    for point in grid_points(&config.grid)? {
        let params = config.params.with_overrides(&point)?;
        let classifier = config.model.build(params.clone())?;
        let (aggregate, _) = score(classifier.as_ref(), train, config)?;
        points.push(SweepPoint {
            params: point.clone(),
            f1: aggregate.f1,
        });
        if best.as_ref().is_none_or(|(_, _, f1)| aggregate.f1 > *f1) {
            best = Some((point, params, aggregate.f1));
        }
    }
    let (best_params, params, f1) = best.ok_or(Error::EmptyGrid)?;
    Ok(SweepResult {
        model: config.model,
        best_params,
        params,
        f1,
        points,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub model: ModelKind,
    pub params: ClassifierParams,
    pub aggregate: AggregateMetrics,
    pub per_learner: Vec<LearnerMetrics>,
    pub best_params: GridPoint,
    pub warm_up_events: usize,
    pub wall_time_seconds: Option<f64>,
}

impl EvalReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }
}

/// Evaluates `params` on `test` from fresh learner states.
pub fn evaluate(
    config: &ExperimentConfig,
    best_params: &GridPoint,
    test: &Streams,
) -> Result<(EvalReport, Vec<LearnerRun>)> {
    let started = Instant::now();
    let params = config.params.with_overrides(best_params)?;
    let classifier = config.model.build(params.clone())?;
    let runs = run_all(classifier.as_ref(), test, config, true)?;
    let per_learner = learner_metrics(&runs)?;
    let report = EvalReport {
        model: config.model,
        params,
        aggregate: weighted_aggregate(&per_learner),
        per_learner,
        best_params: best_params.clone(),
        warm_up_events: config.warm_up_events,
        wall_time_seconds: config.record_wall_time.then(|| started.elapsed().as_secs_f64()),
    };
    Ok((report, runs))
}

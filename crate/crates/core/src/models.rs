//! Learner state and learning events.
//!
//! These types carry no algorithmic behaviour: any classifier can read and
//! write a [`LearnerModel`], and the same model can be persisted, inspected
//! or visualised independently of how it was produced.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::bayes::Gaussian;
use crate::error::{Error, Result};

/// Default upper bound on the number of topics attached to one event.
pub const MAX_TOPICS: usize = 5;

/// Stable identifier of a knowledge component (a Wikipedia page id).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct KcId(pub u64);

impl fmt::Display for KcId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KnowledgeComponent {
    pub id: KcId,
    pub title: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
}

impl KnowledgeComponent {
    pub fn new(id: u64, title: impl Into<String>) -> Result<Self> {
        let title = title.into();
        if title.trim().is_empty() {
            return Err(Error::InvalidEvent(format!("knowledge component {id} has an empty title")));
        }
        Ok(KnowledgeComponent {
            id: KcId(id),
            title,
            description: None,
        })
    }

    pub fn with_description(mut self, description: impl Into<String>) -> Self {
        self.description = Some(description.into());
        self
    }
}

/// A topic attached to an event, with its presence weight and coverage depth.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EventTopic {
    pub kc: KnowledgeComponent,
    pub presence: f64,
    pub depth: f64,
}

impl EventTopic {
    pub fn new(kc: KnowledgeComponent, presence: f64, depth: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&presence) {
            return Err(Error::InvalidEvent(format!(
                "presence of {} must lie in [0, 1], got {presence}",
                kc.id
            )));
        }
        if !(depth >= 0.0 && depth.is_finite()) {
            return Err(Error::InvalidEvent(format!(
                "depth of {} must be finite and >= 0, got {depth}",
                kc.id
            )));
        }
        Ok(EventTopic { kc, presence, depth })
    }
}

/// One watch event: a fragment of a resource and its top topics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EventModel {
    pub resource_id: String,
    pub part: u32,
    pub timestamp: f64,
    pub topics: Vec<EventTopic>,
}

impl EventModel {
    pub fn new(
        resource_id: impl Into<String>,
        part: u32,
        timestamp: f64,
        topics: Vec<EventTopic>,
    ) -> Result<Self> {
        Self::with_max_topics(resource_id, part, timestamp, topics, MAX_TOPICS)
    }

    pub fn with_max_topics(
        resource_id: impl Into<String>,
        part: u32,
        timestamp: f64,
        topics: Vec<EventTopic>,
        max_topics: usize,
    ) -> Result<Self> {
        if topics.is_empty() {
            return Err(Error::EmptyTopics);
        }
        if topics.len() > max_topics {
            return Err(Error::InvalidEvent(format!(
                "{} topics exceed the limit of {max_topics}",
                topics.len()
            )));
        }
        if part < 1 {
            return Err(Error::InvalidEvent("part index starts at 1".into()));
        }
        if !timestamp.is_finite() {
            return Err(Error::InvalidEvent(format!("timestamp {timestamp} is not finite")));
        }
        for (i, topic) in topics.iter().enumerate() {
            if topics[..i].iter().any(|t| t.kc.id == topic.kc.id) {
                return Err(Error::InvalidEvent(format!("topic {} listed twice", topic.kc.id)));
            }
        }
        Ok(EventModel {
            resource_id: resource_id.into(),
            part,
            timestamp,
            topics,
        })
    }
}

/// Binary engagement outcome, encoded as `1` / `-1` on the wire.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EngagementLabel {
    Engaged,
    NotEngaged,
}

impl EngagementLabel {
    pub fn from_engaged(engaged: bool) -> Self {
        if engaged {
            EngagementLabel::Engaged
        } else {
            EngagementLabel::NotEngaged
        }
    }

    pub fn is_engaged(self) -> bool {
        self == EngagementLabel::Engaged
    }

    pub fn sign(self) -> i8 {
        match self {
            EngagementLabel::Engaged => 1,
            EngagementLabel::NotEngaged => -1,
        }
    }

    /// `1.0` for engaged, `0.0` otherwise.
    pub fn as_target(self) -> f64 {
        if self.is_engaged() {
            1.0
        } else {
            0.0
        }
    }
}

impl Serialize for EngagementLabel {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_i8(self.sign())
    }
}

impl<'de> Deserialize<'de> for EngagementLabel {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        match i8::deserialize(deserializer)? {
            1 => Ok(EngagementLabel::Engaged),
            -1 => Ok(EngagementLabel::NotEngaged),
            other => Err(serde::de::Error::custom(format!(
                "engagement label must be 1 or -1, got {other}"
            ))),
        }
    }
}

/// A learner's belief about one knowledge component.
#[derive(Clone, Debug, PartialEq)]
pub struct KcBelief {
    pub title: String,
    pub belief: Gaussian,
}

/// Which of the learner's two belief maps to read.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StateKind {
    Knowledge,
    Interest,
}

impl std::str::FromStr for StateKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "knowledge" => Ok(StateKind::Knowledge),
            "interest" => Ok(StateKind::Interest),
            other => Err(Error::invalid_parameter(
                "state",
                format!("expected `knowledge` or `interest`, got `{other}`"),
            )),
        }
    }
}

/// Per-learner state shared by every classifier.
///
/// Knowledge components the learner has never met are absent from both
/// maps; classifiers substitute their prior for them.
#[derive(Clone, Debug, PartialEq)]
pub struct LearnerModel {
    pub learner_id: String,
    pub knowledge: BTreeMap<KcId, KcBelief>,
    pub interest: BTreeMap<KcId, KcBelief>,
    pub engaged_count: u64,
    pub non_engaged_count: u64,
    pub last_event_time: Option<f64>,
    /// Label of the most recent fitted event.
    pub last_label: Option<EngagementLabel>,
    /// Mixture weights of the interest/novelty/knowledge ensemble, when used.
    pub ensemble_weights: Option<[f64; 3]>,
}

impl LearnerModel {
    pub fn new(learner_id: impl Into<String>) -> Self {
        LearnerModel {
            learner_id: learner_id.into(),
            knowledge: BTreeMap::new(),
            interest: BTreeMap::new(),
            engaged_count: 0,
            non_engaged_count: 0,
            last_event_time: None,
            last_label: None,
            ensemble_weights: None,
        }
    }

    pub fn beliefs(&self, kind: StateKind) -> &BTreeMap<KcId, KcBelief> {
        match kind {
            StateKind::Knowledge => &self.knowledge,
            StateKind::Interest => &self.interest,
        }
    }

    pub fn beliefs_mut(&mut self, kind: StateKind) -> &mut BTreeMap<KcId, KcBelief> {
        match kind {
            StateKind::Knowledge => &mut self.knowledge,
            StateKind::Interest => &mut self.interest,
        }
    }

    pub fn event_count(&self) -> u64 {
        self.engaged_count + self.non_engaged_count
    }

    /// Records the outcome of a fitted event.
    pub fn record_outcome(&mut self, timestamp: f64, label: EngagementLabel) {
        match label {
            EngagementLabel::Engaged => self.engaged_count += 1,
            EngagementLabel::NotEngaged => self.non_engaged_count += 1,
        }
        self.last_event_time = Some(timestamp);
        self.last_label = Some(label);
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json()? + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

#[derive(Serialize, Deserialize)]
struct BeliefRecord {
    kc_id: KcId,
    title: String,
    mean: f64,
    variance: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LearnerRecord {
    learner_id: String,
    knowledge: Vec<BeliefRecord>,
    interest: Vec<BeliefRecord>,
    engaged_count: u64,
    non_engaged_count: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    last_event_time: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    last_label: Option<EngagementLabel>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    ensemble_weights: Option<[f64; 3]>,
}

fn to_records(map: &BTreeMap<KcId, KcBelief>) -> Vec<BeliefRecord> {
    map.iter()
        .map(|(id, b)| BeliefRecord {
            kc_id: *id,
            title: b.title.clone(),
            mean: b.belief.mean(),
            variance: b.belief.variance(),
        })
        .collect()
}

fn from_records<E: serde::de::Error>(records: Vec<BeliefRecord>) -> Result<BTreeMap<KcId, KcBelief>, E> {
    let mut map = BTreeMap::new();
    for r in records {
        let belief = Gaussian::new(r.mean, r.variance).map_err(E::custom)?;
        if map
            .insert(
                r.kc_id,
                KcBelief {
                    title: r.title,
                    belief,
                },
            )
            .is_some()
        {
            return Err(E::custom(format!("knowledge component {} listed twice", r.kc_id)));
        }
    }
    Ok(map)
}

impl Serialize for LearnerModel {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        LearnerRecord {
            learner_id: self.learner_id.clone(),
            knowledge: to_records(&self.knowledge),
            interest: to_records(&self.interest),
            engaged_count: self.engaged_count,
            non_engaged_count: self.non_engaged_count,
            last_event_time: self.last_event_time,
            last_label: self.last_label,
            ensemble_weights: self.ensemble_weights,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for LearnerModel {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let r = LearnerRecord::deserialize(deserializer)?;
        Ok(LearnerModel {
            learner_id: r.learner_id,
            knowledge: from_records(r.knowledge)?,
            interest: from_records(r.interest)?,
            engaged_count: r.engaged_count,
            non_engaged_count: r.non_engaged_count,
            last_event_time: r.last_event_time,
            last_label: r.last_label,
            ensemble_weights: r.ensemble_weights,
        })
    }
}

/// One row of a learner-state snapshot.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SnapshotEntry {
    pub kc_id: KcId,
    pub title: String,
    pub mean: f64,
    pub variance: f64,
}

/// The `top_k` components of one belief map, by mean descending with ties
/// broken by ascending id.
pub fn snapshot(learner: &LearnerModel, kind: StateKind, top_k: usize) -> Result<Vec<SnapshotEntry>> {
    if top_k == 0 {
        return Err(Error::invalid_parameter("top_k", "must be at least 1"));
    }
    let mut rows: Vec<SnapshotEntry> = learner
        .beliefs(kind)
        .iter()
        .map(|(id, b)| SnapshotEntry {
            kc_id: *id,
            title: b.title.clone(),
            mean: b.belief.mean(),
            variance: b.belief.variance(),
        })
        .collect();
    rows.sort_by(|a, b| b.mean.total_cmp(&a.mean).then(a.kc_id.cmp(&b.kc_id)));
    rows.truncate(top_k);
    Ok(rows)
}

/// Belief of one component after one fitted event.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HistoryRow {
    pub event_index: usize,
    pub timestamp: f64,
    pub kc_id: KcId,
    pub title: String,
    pub mean: f64,
    pub variance: f64,
}

/// Evolution of a learner's beliefs over an event stream.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LearnerHistory {
    pub learner_id: String,
    pub state: Option<StateKind>,
    pub snapshots: Vec<HistoryRow>,
}

impl LearnerHistory {
    pub fn new(learner_id: impl Into<String>, state: Option<StateKind>) -> Self {
        LearnerHistory {
            learner_id: learner_id.into(),
            state,
            snapshots: Vec::new(),
        }
    }

    /// Appends the current belief of each listed component.
    pub fn record(
        &mut self,
        event_index: usize,
        timestamp: f64,
        learner: &LearnerModel,
        kind: StateKind,
        kcs: impl IntoIterator<Item = KcId>,
    ) {
        let map = learner.beliefs(kind);
        for id in kcs {
            if let Some(b) = map.get(&id) {
                self.snapshots.push(HistoryRow {
                    event_index,
                    timestamp,
                    kc_id: id,
                    title: b.title.clone(),
                    mean: b.belief.mean(),
                    variance: b.belief.variance(),
                });
            }
        }
    }

    pub fn is_empty(&self) -> bool {
        self.snapshots.is_empty()
    }

    /// Rows grouped by component, each in event order.
    pub fn series(&self) -> BTreeMap<KcId, Vec<&HistoryRow>> {
        let mut out: BTreeMap<KcId, Vec<&HistoryRow>> = BTreeMap::new();
        for row in &self.snapshots {
            out.entry(row.kc_id).or_default().push(row);
        }
        out
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }
}

//! Seeded generator of PEEK-layout interaction files, for fixtures and
//! benchmarks when the published dataset is not at hand.
//!
//! Learners carry a latent skill and interest per topic. A fragment is
//! engaged with more often when it matches the learner's interests and when
//! its depth is close to the learner's skill; engaged fragments nudge the
//! skill upwards.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::parse::RawInteractionRow;
use crate::models::MAX_TOPICS;

const TITLES: [&str; 48] = [
    "Machine learning",
    "Linear algebra",
    "Probability theory",
    "Bayesian inference",
    "Gradient descent",
    "Neural network",
    "Statistics",
    "Calculus",
    "Matrix (mathematics)",
    "Eigenvalues and eigenvectors",
    "Graph theory",
    "Algorithm",
    "Computer programming",
    "Python (programming language)",
    "Data structure",
    "Recursion",
    "Sorting algorithm",
    "Complexity class",
    "Quantum mechanics",
    "Thermodynamics",
    "Entropy",
    "Electromagnetism",
    "Classical mechanics",
    "Special relativity",
    "Photosynthesis",
    "Cell (biology)",
    "DNA",
    "Evolution",
    "Genetics",
    "Protein",
    "Climate change",
    "Renewable energy",
    "Economics",
    "Inflation",
    "Supply and demand",
    "Game theory",
    "Philosophy",
    "Ethics",
    "Logic",
    "Epistemology",
    "Psychology",
    "Cognition",
    "Memory",
    "Learning",
    "Education",
    "History of science",
    "Renaissance",
    "Industrial Revolution",
];

/// First topic id; topic `k` of the universe has id `TOPIC_ID_BASE + k`.
pub const TOPIC_ID_BASE: u64 = 1000;

#[derive(Clone, Debug, PartialEq)]
pub struct SyntheticConfig {
    pub seed: u64,
    pub learners: usize,
    pub min_events: usize,
    pub max_events: usize,
    /// Size of the topic universe (at most 48).
    pub topics: usize,
    pub videos: usize,
    pub first_learner_id: u64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            seed: 7,
            learners: 50,
            min_events: 5,
            max_events: 40,
            topics: 40,
            videos: 120,
            first_learner_id: 1,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SyntheticDataset {
    pub rows: Vec<RawInteractionRow>,
    pub titles: Vec<(u64, String)>,
}

struct Video {
    id: String,
    parts: u32,
    topics: Vec<(usize, f64)>,
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

pub fn generate(config: &SyntheticConfig) -> SyntheticDataset {
    let n_topics = config.topics.clamp(MAX_TOPICS, TITLES.len());
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    let videos: Vec<Video> = (0..config.videos)
        .map(|v| {
            let anchor = rng.gen_range(0..n_topics);
            let k = rng.gen_range(1..=MAX_TOPICS);
            let mut topics: Vec<(usize, f64)> = Vec::new();
            while topics.len() < k {
                // Topics cluster around an anchor so videos share themes.
                let t = (anchor + rng.gen_range(0..6)) % n_topics;
                if topics.iter().all(|&(x, _)| x != t) {
                    let coverage = (rng.gen_range(0.05..1.0f64) * 1000.0).round() / 1000.0;
                    topics.push((t, coverage));
                }
            }
            topics.sort_by(|a, b| b.1.total_cmp(&a.1));
            Video {
                id: format!("{}", 5000 + v),
                parts: rng.gen_range(1..=4),
                topics,
            }
        })
        .collect();

    let mut rows = Vec::new();
    for l in 0..config.learners {
        let learner_id = (config.first_learner_id + l as u64).to_string();
        let mut skill: Vec<f64> = (0..n_topics).map(|_| 0.6 * normal(&mut rng) + 0.5).collect();
        let focus = rng.gen_range(0..n_topics);
        let interest: Vec<f64> = (0..n_topics)
            .map(|t| {
                let d = ((t + n_topics - focus) % n_topics).min((focus + n_topics - t) % n_topics) as f64;
                1.5 * (-d / 3.0).exp() + 0.3 * normal(&mut rng) - 0.4
            })
            .collect();
        let propensity = 0.8 * normal(&mut rng);

        let events = rng.gen_range(config.min_events..=config.max_events.max(config.min_events));
        let mut time = rng.gen_range(0.0..86_400.0f64).round();
        let mut last_engaged = false;
        for _ in 0..events {
            // Prefer videos near the learner's focus.
            let video = loop {
                let v = &videos[rng.gen_range(0..videos.len())];
                let near = v.topics.iter().any(|&(t, _)| interest[t] > 0.3);
                if near || rng.gen_bool(0.3) {
                    break v;
                }
            };
            let part = rng.gen_range(1..=video.parts);
            let depth: f64 = video.topics.iter().map(|&(_, c)| c).sum();
            let ability: f64 = video.topics.iter().map(|&(t, _)| skill[t]).sum();
            let appeal: f64 =
                video.topics.iter().map(|&(t, c)| interest[t] * c).sum::<f64>() / depth.max(1e-9);
            let gap = (ability - depth).abs() / (video.topics.len() as f64).sqrt();
            let score = propensity + 1.6 * appeal + 1.2 * (0.6 - gap) + if last_engaged { 0.8 } else { -0.4 };
            let engaged = rng.gen_bool(logistic(score).clamp(0.02, 0.98));
            if engaged {
                for &(t, c) in &video.topics {
                    skill[t] += 0.05 * c;
                }
            }
            last_engaged = engaged;

            let mut topics: Vec<(u64, f64)> =
                video.topics.iter().map(|&(t, c)| (TOPIC_ID_BASE + t as u64, c)).collect();
            topics.truncate(MAX_TOPICS);
            rows.push(RawInteractionRow {
                learner_id: learner_id.clone(),
                video_id: video.id.clone(),
                part,
                timestamp: time,
                topics,
                label: engaged as u8,
            });
            time += if rng.gen_bool(0.1) { 0.0 } else { rng.gen_range(30.0..20_000.0f64).round() };
        }
    }
    rows.sort_by(|a, b| a.timestamp.total_cmp(&b.timestamp));

    let titles = (0..n_topics)
        .map(|t| (TOPIC_ID_BASE + t as u64, TITLES[t].to_string()))
        .collect();
    SyntheticDataset { rows, titles }
}

impl SyntheticDataset {
    /// Rows in the headerless PEEK layout.
    pub fn to_peek_csv(&self) -> String {
        let mut out = String::new();
        for r in &self.rows {
            let _ = write!(out, "synthetic,{},{},{:?},{}", r.video_id, r.part, r.timestamp, r.learner_id);
            for i in 0..MAX_TOPICS {
                match r.topics.get(i) {
                    Some((id, c)) => {
                        let _ = write!(out, ",{id},{c:?}");
                    }
                    None => out.push_str(",-1,0"),
                }
            }
            let _ = writeln!(out, ",{}", r.label);
        }
        out
    }

    /// Titles in the `id,url,title,description` mapping layout.
    pub fn titles_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["id", "url", "title", "description"]).expect("in-memory write");
        for (id, title) in &self.titles {
            let url = format!("https://en.wikipedia.org/wiki/{}", title.replace(' ', "_"));
            w.write_record([id.to_string().as_str(), url.as_str(), title.as_str(), ""])
                .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory write")).expect("utf-8")
    }
}

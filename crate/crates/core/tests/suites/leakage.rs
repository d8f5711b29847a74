//! A learner's evaluation depends only on that learner's own past: shuffling
//! or relabelling every other learner leaves it unchanged, and changing its
//! future labels leaves earlier predictions unchanged.

use openlearner::datasets::synthetic::{generate, SyntheticConfig};
use openlearner::datasets::{parse_file, ColumnMapping, Stream, Streams};
use openlearner::harness::{evaluate, ExperimentConfig, GridPoint};
use openlearner::{ConfusionMatrix, EngagementClassifier, EngagementLabel, ModelKind};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const MODELS: [ModelKind; 5] = [
    ModelKind::Persistence,
    ModelKind::Interest,
    ModelKind::Novelty,
    ModelKind::Knowledge,
    ModelKind::Ink,
];

fn flip(label: EngagementLabel) -> EngagementLabel {
    EngagementLabel::from_engaged(!label.is_engaged())
}

pub fn random_learners(seed: u64) -> Result<Streams, String> {
    let data = generate(&SyntheticConfig {
        seed,
        learners: 10,
        min_events: 8,
        max_events: 30,
        ..Default::default()
    });
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let path = dir.path().join("learners.csv");
    std::fs::write(&path, data.to_peek_csv()).map_err(|e| e.to_string())?;
    let parsed = parse_file(&path, &ColumnMapping::default(), None).map_err(|e| e.to_string())?;
    Ok(parsed.streams)
}

fn probabilities(c: &dyn EngagementClassifier, id: &str, stream: &Stream) -> Result<Vec<f64>, String> {
    let mut learner = openlearner::LearnerModel::new(id);
    let mut out = Vec::new();
    for (event, label) in stream {
        out.push(c.predict_proba(&learner, event).map_err(|e| e.to_string())?);
        c.fit(&mut learner, event, *label).map_err(|e| e.to_string())?;
    }
    Ok(out)
}

/// Other learners' streams reassigned among their ids and randomly relabelled.
fn scramble_others(streams: &Streams, keep: &str, rng: &mut ChaCha8Rng) -> Streams {
    let ids: Vec<&String> = streams.keys().filter(|k| *k != keep).collect();
    let mut bodies: Vec<Stream> = ids.iter().map(|k| streams[*k].clone()).collect();
    bodies.shuffle(rng);
    let mut out: Streams = ids.into_iter().cloned().zip(bodies).collect();
    for stream in out.values_mut() {
        for (_, label) in stream.iter_mut() {
            if rng.gen_bool(0.5) {
                *label = flip(*label);
            }
        }
    }
    out.insert(keep.to_string(), streams[keep].clone());
    out
}

pub fn check() -> Result<String, String> {
    let streams = random_learners(2024)?;
    if streams.len() != 10 {
        return Err(format!("expected 10 learners, got {}", streams.len()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut comparisons = 0;
    for model in MODELS {
        let config = ExperimentConfig::new(model);
        let (base, runs) = evaluate(&config, &GridPoint::new(), &streams).map_err(|e| e.to_string())?;
        let classifier = model.build(config.params.clone()).map_err(|e| e.to_string())?;
        for (i, id) in streams.keys().enumerate() {
            let scrambled = scramble_others(&streams, id, &mut rng);
            let (report, other_runs) = evaluate(&config, &GridPoint::new(), &scrambled).map_err(|e| e.to_string())?;
            let want = base.per_learner.iter().find(|m| &m.learner_id == id);
            let got = report.per_learner.iter().find(|m| &m.learner_id == id);
            if want != got || runs[i].learner != other_runs[i].learner {
                return Err(format!("{model}: learner {id} changed when others were shuffled"));
            }

            // Harness scoring equals an explicit predict-then-fit replay.
            let own = &streams[id];
            let probs = probabilities(classifier.as_ref(), id, own)?;
            let mut cm = ConfusionMatrix::default();
            for (p, (_, label)) in probs.iter().zip(own) {
                cm.record(EngagementLabel::from_engaged(*p >= config.params.threshold), *label);
            }
            if cm != runs[i].confusion {
                return Err(format!("{model}: learner {id} scored differently from a manual replay"));
            }

            // Labels from t on cannot reach predictions up to t.
            let t = rng.gen_range(0..own.len());
            let mut altered = own.clone();
            for (_, label) in altered.iter_mut().skip(t) {
                *label = flip(*label);
            }
            let altered_probs = probabilities(classifier.as_ref(), id, &altered)?;
            if probs[..=t] != altered_probs[..=t] {
                return Err(format!("{model}: learner {id} prediction at {t} saw a future label"));
            }
            comparisons += 1;
        }
    }
    Ok(format!("{comparisons} learner/model permutations unchanged"))
}

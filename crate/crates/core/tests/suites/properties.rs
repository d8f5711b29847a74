//! Behavioural properties of the Bayesian classifiers on random inputs.

use openlearner::bayes::Gaussian;
use openlearner::learning::{InkClassifier, InterestClassifier, KnowledgeClassifier, NoveltyClassifier};
use openlearner::models::KcBelief;
use openlearner::{
    ClassifierParams, EngagementClassifier, EngagementLabel, EventModel, EventTopic, KcId, KnowledgeComponent,
    LearnerModel, ModelKind, StateKind,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const CASES: usize = 300;

fn random_event(rng: &mut ChaCha8Rng, ts: f64) -> EventModel {
    let n = rng.gen_range(1..=5);
    let mut ids: Vec<u64> = (0..8).collect();
    let topics = (0..n)
        .map(|_| {
            let id = ids.remove(rng.gen_range(0..ids.len()));
            let kc = KnowledgeComponent::new(id, format!("topic {id}")).unwrap();
            EventTopic::new(kc, rng.gen_range(0.2..=1.0), rng.gen_range(0.0..1.0)).unwrap()
        })
        .collect();
    EventModel::new("v", 1, ts, topics).unwrap()
}

fn random_learner(rng: &mut ChaCha8Rng) -> LearnerModel {
    let mut l = LearnerModel::new("p");
    for id in 0..8u64 {
        for kind in [StateKind::Knowledge, StateKind::Interest] {
            if rng.gen_bool(0.7) {
                let belief = Gaussian::new(rng.gen_range(-1.5..1.5), rng.gen_range(0.05..2.0)).unwrap();
                l.beliefs_mut(kind).insert(
                    KcId(id),
                    KcBelief {
                        title: format!("topic {id}"),
                        belief,
                    },
                );
            }
        }
    }
    l
}

fn random_params(rng: &mut ChaCha8Rng) -> ClassifierParams {
    ClassifierParams {
        init_variance: rng.gen_range(0.05..2.0),
        beta: rng.gen_range(0.05..1.5),
        draw_probability: rng.gen_range(0.01..0.9),
        ..ClassifierParams::default()
    }
}

fn set_mean(l: &mut LearnerModel, kind: StateKind, id: KcId, mean: f64, variance: f64) {
    l.beliefs_mut(kind).insert(
        id,
        KcBelief {
            title: format!("topic {id}"),
            belief: Gaussian::new(mean, variance).unwrap(),
        },
    );
}

fn err(e: openlearner::Error) -> String {
    e.to_string()
}

/// Raising one topic's mean never lowers knowledge or interest probability;
/// novelty peaks where summed skill meets summed depth.
fn monotonicity(rng: &mut ChaCha8Rng) -> Result<(), String> {
    for case in 0..CASES {
        let params = random_params(rng);
        let event = random_event(rng, 0.0);
        let base = random_learner(rng);
        let id = event.topics[0].kc.id;
        let (lo, hi) = {
            let a: f64 = rng.gen_range(-2.0..2.0);
            let b: f64 = rng.gen_range(-2.0..2.0);
            (a.min(b), a.max(b))
        };
        let var = rng.gen_range(0.05..1.0);
        for (c, kind) in [
            (Box::new(KnowledgeClassifier::new(params.clone()).map_err(err)?) as Box<dyn EngagementClassifier>, StateKind::Knowledge),
            (Box::new(InterestClassifier::new(params.clone()).map_err(err)?), StateKind::Interest),
        ] {
            let (mut a, mut b) = (base.clone(), base.clone());
            set_mean(&mut a, kind, id, lo, var);
            set_mean(&mut b, kind, id, hi, var);
            let (pa, pb) = (c.predict_proba(&a, &event).map_err(err)?, c.predict_proba(&b, &event).map_err(err)?);
            if pb < pa - 1e-12 {
                return Err(format!("case {case}: {} probability fell from {pa} to {pb} as mean rose", c.kind()));
            }
        }

        // Novelty with a single topic: probability falls with |mean - depth|.
        let single = EventModel::new("v", 1, 0.0, vec![event.topics[0].clone()]).unwrap();
        let depth = single.topics[0].depth;
        let c = NoveltyClassifier::new(params).map_err(err)?;
        let (near, far) = (rng.gen_range(0.0..1.0f64), rng.gen_range(0.0..1.0f64));
        let (near, far) = (near.min(far), near.max(far));
        let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let (mut a, mut b) = (base.clone(), base.clone());
        set_mean(&mut a, StateKind::Knowledge, id, depth + sign * near, var);
        set_mean(&mut b, StateKind::Knowledge, id, depth + sign * far, var);
        let (pa, pb) = (c.predict_proba(&a, &single).map_err(err)?, c.predict_proba(&b, &single).map_err(err)?);
        if pb > pa + 1e-12 {
            return Err(format!("case {case}: novelty rose from {pa} to {pb} moving away from the depth"));
        }
    }
    Ok(())
}

fn means(l: &LearnerModel, kind: StateKind, event: &EventModel, prior: f64) -> Vec<f64> {
    event
        .topics
        .iter()
        .map(|t| l.beliefs(kind).get(&t.kc.id).map_or(prior, |b| b.belief.mean()))
        .collect()
}

fn variances(l: &LearnerModel, kind: StateKind, event: &EventModel, prior: f64) -> Vec<f64> {
    event
        .topics
        .iter()
        .map(|t| l.beliefs(kind).get(&t.kc.id).map_or(prior, |b| b.belief.variance()))
        .collect()
}

/// Engagement raises knowledge and interest means, disengagement lowers
/// knowledge means; novelty pulls summed skill toward summed depth when
/// engaged.
fn fit_direction(rng: &mut ChaCha8Rng) -> Result<(), String> {
    for case in 0..CASES {
        let params = random_params(rng);
        let event = random_event(rng, 0.0);
        let learner = random_learner(rng);
        let prior = params.init_mean;

        let k = KnowledgeClassifier::new(params.clone()).map_err(err)?;
        for label in [EngagementLabel::Engaged, EngagementLabel::NotEngaged] {
            let mut l = learner.clone();
            k.fit(&mut l, &event, label).map_err(err)?;
            let before = means(&learner, StateKind::Knowledge, &event, prior);
            let after = means(&l, StateKind::Knowledge, &event, prior);
            let ok = before.iter().zip(&after).all(|(b, a)| (a - b) * label.sign() as f64 >= -1e-12);
            if !ok {
                return Err(format!("case {case}: knowledge moved against {label:?}: {before:?} -> {after:?}"));
            }
        }

        let i = InterestClassifier::new(params.clone()).map_err(err)?;
        let mut l = learner.clone();
        i.fit(&mut l, &event, EngagementLabel::Engaged).map_err(err)?;
        let before = means(&learner, StateKind::Interest, &event, prior);
        let after = means(&l, StateKind::Interest, &event, prior);
        if before.iter().zip(&after).any(|(b, a)| a < &(b - 1e-12)) {
            return Err(format!("case {case}: interest fell after engagement: {before:?} -> {after:?}"));
        }

        let n = NoveltyClassifier::new(params).map_err(err)?;
        let mut l = learner.clone();
        n.fit(&mut l, &event, EngagementLabel::Engaged).map_err(err)?;
        let depth: f64 = event.topics.iter().map(|t| t.depth).sum();
        let gap = |l: &LearnerModel| (means(l, StateKind::Knowledge, &event, prior).iter().sum::<f64>() - depth).abs();
        if gap(&l) > gap(&learner) + 1e-12 {
            return Err(format!("case {case}: novelty engagement widened the skill gap"));
        }
    }
    Ok(())
}

/// With no drift or decay, no update ever increases a variance.
fn variance_shrinkage(rng: &mut ChaCha8Rng) -> Result<(), String> {
    for case in 0..CASES {
        let params = random_params(rng).with("tau", 0.0).and_then(|p| p.with("decay_rate", 0.0)).map_err(err)?;
        let event = random_event(rng, 0.0);
        let learner = random_learner(rng);
        let label = EngagementLabel::from_engaged(rng.gen_bool(0.5));
        for kind in [ModelKind::Interest, ModelKind::Novelty, ModelKind::Knowledge, ModelKind::Ink] {
            let c = kind.build(params.clone()).map_err(err)?;
            let mut l = learner.clone();
            c.fit(&mut l, &event, label).map_err(err)?;
            for state in [StateKind::Knowledge, StateKind::Interest] {
                let before = variances(&learner, state, &event, params.init_variance);
                let after = variances(&l, state, &event, params.init_variance);
                if before.iter().zip(&after).any(|(b, a)| *a > b * (1.0 + 1e-12)) {
                    return Err(format!("case {case}: {kind} grew a {state:?} variance: {before:?} -> {after:?}"));
                }
            }
        }
    }
    Ok(())
}

/// Ensemble weights stay on the probability simplex.
fn simplex(rng: &mut ChaCha8Rng) -> Result<(), String> {
    for case in 0..CASES / 3 {
        let params = random_params(rng).with("ink_learning_rate", rng.gen_range(0.0..5.0)).map_err(err)?;
        let c = InkClassifier::new(params).map_err(err)?;
        let mut l = LearnerModel::new("s");
        for step in 0..25 {
            let event = random_event(rng, step as f64);
            c.fit(&mut l, &event, EngagementLabel::from_engaged(rng.gen_bool(0.6))).map_err(err)?;
            let w = InkClassifier::weights(&l);
            let sum: f64 = w.iter().sum();
            if w.iter().any(|x| !(*x >= 0.0)) || (sum - 1.0).abs() > 1e-12 {
                return Err(format!("case {case} step {step}: weights {w:?} left the simplex"));
            }
        }
    }
    Ok(())
}

fn rejections() -> Result<(), String> {
    let d = ClassifierParams::default();
    let bad = [
        ("init_variance", 0.0),
        ("init_variance", -1.0),
        ("beta", 0.0),
        ("beta", -0.5),
        ("tau", -0.1),
        ("draw_probability", 0.0),
        ("draw_probability", 1.0),
        ("draw_margin", -0.1),
        ("decay_rate", -1.0),
        ("threshold", 1.5),
        ("threshold", -0.1),
        ("ink_learning_rate", -1.0),
        ("no_such_parameter", 1.0),
    ];
    for (name, value) in bad {
        if d.with(name, value).is_ok() {
            return Err(format!("{name} = {value} was accepted"));
        }
    }
    if ClassifierParams::from_json(r#"{"beta": 0.5, "sigma": 1}"#).is_ok() {
        return Err("unknown JSON key was accepted".into());
    }
    for kind in ModelKind::ALL {
        let mut p = d.clone();
        p.beta = f64::NAN;
        if kind.build(p).is_ok() && !matches!(kind, ModelKind::Engage | ModelKind::Majority | ModelKind::Persistence) {
            return Err(format!("{kind} built with beta = NaN"));
        }
    }
    Ok(())
}

pub fn check() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    monotonicity(&mut rng)?;
    fit_direction(&mut rng)?;
    variance_shrinkage(&mut rng)?;
    simplex(&mut rng)?;
    rejections()?;
    Ok(format!("{CASES} random cases per property, 5 properties"))
}

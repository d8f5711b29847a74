//! Classification metrics against brute-force recomputation.

use std::time::Instant;

use openlearner::metrics::{compute, weighted_aggregate, ConfusionMatrix, LearnerMetrics};
use openlearner::EngagementLabel;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TOL: f64 = 1e-12;

/// Scores from an explicit list of (predicted, actual) pairs.
fn brute_scores(pairs: &[(bool, bool)]) -> [f64; 4] {
    let count = |f: &dyn Fn(&(bool, bool)) -> bool| pairs.iter().filter(|p| f(p)).count() as f64;
    let correct = count(&|(p, a)| p == a);
    let tp = count(&|(p, a)| *p && *a);
    let predicted = count(&|(p, _)| *p);
    let actual = count(&|(_, a)| *a);
    let fp = predicted - tp;
    let fn_ = actual - tp;
    let precision = if predicted > 0.0 { tp / predicted } else { 0.0 };
    let recall = if actual > 0.0 { tp / actual } else { 0.0 };
    let f1 = if tp > 0.0 { 2.0 * tp / (2.0 * tp + fp + fn_) } else { 0.0 };
    [correct / pairs.len() as f64, precision, recall, f1]
}

fn random_pairs(rng: &mut ChaCha8Rng) -> Vec<(bool, bool)> {
    let n = rng.gen_range(1..300);
    // Skewed rates so degenerate matrices (no positives, no predictions) occur.
    let p_pred = [0.0, 0.02, 0.5, 0.9, 1.0].choose(rng).copied().unwrap();
    let p_true = [0.0, 0.1, 0.5, 0.98, 1.0].choose(rng).copied().unwrap();
    (0..n).map(|_| (rng.gen_bool(p_pred), rng.gen_bool(p_true))).collect()
}

fn matrix(pairs: &[(bool, bool)]) -> ConfusionMatrix {
    let mut cm = ConfusionMatrix::default();
    for &(p, a) in pairs {
        cm.record(EngagementLabel::from_engaged(p), EngagementLabel::from_engaged(a));
    }
    cm
}

/// Compensated sum of every learner's metric repeated once per event.
fn brute_weighted(learners: &[(u64, [f64; 4])], k: usize) -> f64 {
    let (mut sum, mut c, mut n) = (0.0f64, 0.0f64, 0u64);
    for (events, m) in learners {
        for _ in 0..*events {
            let t = sum + m[k];
            c += if sum.abs() >= m[k].abs() { (sum - t) + m[k] } else { (m[k] - t) + sum };
            sum = t;
            n += 1;
        }
    }
    if n == 0 {
        0.0
    } else {
        (sum + c) / n as f64
    }
}

fn check_compute(worst: &mut f64) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..1000 {
        let pairs = random_pairs(&mut rng);
        let cm = matrix(&pairs);
        let s = compute(&cm).map_err(|e| e.to_string())?;
        let want = brute_scores(&pairs);
        for (got, want) in [s.accuracy, s.precision, s.recall, s.f1].into_iter().zip(want) {
            *worst = worst.max((got - want).abs());
            if (got - want).abs() > TOL {
                return Err(format!("compute({cm:?}) = {s:?}, oracle {want:?}"));
            }
        }
    }
    Ok(())
}

fn check_aggregate(worst: &mut f64) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    for set in 0..1000 {
        let learners: Vec<(u64, [f64; 4])> = (0..rng.gen_range(1..100))
            .map(|_| {
                let pairs = random_pairs(&mut rng);
                (pairs.len() as u64, brute_scores(&pairs))
            })
            .collect();
        let per_learner: Vec<LearnerMetrics> = learners
            .iter()
            .enumerate()
            .map(|(i, (n, m))| LearnerMetrics {
                learner_id: format!("l{i}"),
                event_count: *n,
                accuracy: m[0],
                precision: m[1],
                recall: m[2],
                f1: m[3],
            })
            .collect();
        let agg = weighted_aggregate(&per_learner);
        let got = [agg.accuracy, agg.precision, agg.recall, agg.f1];
        for (k, g) in got.iter().enumerate() {
            let want = brute_weighted(&learners, k);
            *worst = worst.max((g - want).abs());
            if (g - want).abs() > TOL {
                return Err(format!("set {set}: metric {k} = {g}, oracle {want}"));
            }
        }
        if agg.events != learners.iter().map(|l| l.0).sum::<u64>() || agg.learners != learners.len() as u64 {
            return Err(format!("set {set}: wrong totals {agg:?}"));
        }
    }
    Ok(())
}

pub fn check() -> Result<String, String> {
    let started = Instant::now();
    let (mut w1, mut w2) = (0.0, 0.0);
    check_compute(&mut w1)?;
    check_aggregate(&mut w2)?;
    let secs = started.elapsed().as_secs_f64();
    if secs > 5.0 {
        return Err(format!("took {secs:.2} s"));
    }
    Ok(format!("compute max err {w1:.1e}, aggregate max err {w2:.1e}, {secs:.2} s"))
}

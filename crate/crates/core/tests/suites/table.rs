//! Directional reproduction of the published PEEK results: sweep on the
//! train split, evaluate the best point on the test split.

use std::path::Path;

use openlearner::datasets::{
    dataset_dir, default_cache_dir, load_peek, peek_manifest, sha256_file, ColumnMapping, Streams,
};
use openlearner::harness::{evaluate, sweep, ExperimentConfig, ParamGrid};
use openlearner::{AggregateMetrics, ModelKind};

/// Published test-set accuracy and F1, in percent.
pub const PUBLISHED: [(ModelKind, f64, f64); 3] = [
    (ModelKind::Interest, 58.13, 63.00),
    (ModelKind::Novelty, 64.78, 65.53),
    (ModelKind::Ink, 78.32, 64.00),
];

pub const F1_BAND: f64 = 8.0;

pub fn grid(model: ModelKind) -> ParamGrid {
    let mut g = ParamGrid::new();
    g.insert("init_variance".into(), vec![0.1, 0.5, 1.0]);
    g.insert("beta".into(), vec![0.1, 0.5, 1.0]);
    if model == ModelKind::Interest || model == ModelKind::Ink {
        g.insert("interest_threshold".into(), vec![0.0, 0.25, 0.5]);
    }
    if model == ModelKind::Novelty || model == ModelKind::Ink {
        g.insert("draw_probability".into(), vec![0.5, 0.7, 0.9]);
    }
    g
}

/// Test-split metrics of each published model after sweeping on `train`.
pub fn run_on(train: &Streams, test: &Streams) -> Result<Vec<(ModelKind, AggregateMetrics)>, String> {
    PUBLISHED
        .iter()
        .map(|(model, _, _)| {
            let mut config = ExperimentConfig::new(*model);
            config.grid = grid(*model);
            let best = sweep(&config, train).map_err(|e| e.to_string())?;
            let (report, _) = evaluate(&config, &best.best_params, test).map_err(|e| e.to_string())?;
            Ok((*model, report.aggregate))
        })
        .collect()
}

/// Checks orderings (a) and (b); band deviations (c) are reported only.
pub fn judge(rows: &[(ModelKind, AggregateMetrics)]) -> Result<String, String> {
    let get = |m: ModelKind| rows.iter().find(|r| r.0 == m).map(|r| r.1).expect("model row");
    let (interest, novelty, ink) = (get(ModelKind::Interest), get(ModelKind::Novelty), get(ModelKind::Ink));
    let mut notes = Vec::new();
    for (model, acc, f1) in PUBLISHED {
        let got = get(model);
        let delta = 100.0 * got.f1 - f1;
        notes.push(format!(
            "{model} acc {:.2} (published {acc:.2}) f1 {:.2} (published {f1:.2}, {delta:+.2}{})",
            100.0 * got.accuracy,
            100.0 * got.f1,
            if delta.abs() > F1_BAND { ", outside band" } else { "" }
        ));
    }
    let summary = notes.join("; ");
    if !(novelty.f1 > interest.f1) {
        return Err(format!("novelty F1 does not exceed interest F1: {summary}"));
    }
    if !(ink.accuracy > novelty.accuracy && novelty.accuracy > interest.accuracy) {
        return Err(format!("accuracy ordering ink > novelty > interest fails: {summary}"));
    }
    Ok(summary)
}

/// Verified PEEK files in `cache`, or why they are unusable.
pub fn locate(cache: &Path) -> Result<(), String> {
    let manifest = peek_manifest();
    let dir = dataset_dir(cache, &manifest.name);
    for f in &manifest.urls {
        let path = dir.join(&f.file);
        if !path.exists() {
            return Err(format!(
                "blocked: {} not cached; run `openlearner fetch --dataset peek` with network access",
                path.display()
            ));
        }
        let digest = sha256_file(&path).map_err(|e| e.to_string())?;
        if digest != f.sha256 {
            return Err(format!("blocked: {} fails its digest check", path.display()));
        }
    }
    Ok(())
}

pub fn check() -> Result<String, String> {
    let cache = default_cache_dir();
    locate(&cache)?;
    let data = load_peek(&cache, &ColumnMapping::default()).map_err(|e| e.to_string())?;
    judge(&run_on(&data.train, &data.test)?)
}

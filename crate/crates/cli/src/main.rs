use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use openlearner::datasets::{
    default_cache_dir, load_peek, load_titles, parse, peek_manifest, sha256_file, DatasetManifest,
    Fetcher, SplitDataset, CACHE_ENV,
};
use openlearner::harness::{evaluate, sweep, ExperimentConfig, GridPoint, ParamGrid, SweepResult};
use openlearner::viz::{export_html, file_name, render_learner, VizKind, VizSpec};
use openlearner::{ErrorClass, LearnerHistory, LearnerModel, ModelKind, StateKind};

#[derive(Parser)]
#[command(name = "openlearner", version, about = "Online Bayesian learner-engagement models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Dataset {
    Peek,
}

#[derive(Subcommand)]
enum Command {
    /// Download and verify a dataset into the cache.
    Fetch {
        #[arg(long, value_enum, default_value = "peek")]
        dataset: Dataset,
        /// Cache directory [default: $OPENLEARNER_CACHE or ~/.cache/openlearner]
        #[arg(long, env = CACHE_ENV)]
        cache: Option<PathBuf>,
        /// Manifest JSON replacing the built-in file list.
        #[arg(long)]
        manifest: Option<PathBuf>,
    },
    /// Replay the test learners and write an evaluation report.
    Evaluate {
        /// majority, persistence, engage, knowledge, interest, novelty or ink
        #[arg(long)]
        model: ModelKind,
        /// Experiment configuration JSON.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value = "report.json")]
        out: PathBuf,
        /// Sweep output (or a flat parameter map) to evaluate; without it the
        /// config grid, if any, is swept on the train split first.
        #[arg(long)]
        params: Option<PathBuf>,
        /// Directory to receive final learner states and histories.
        #[arg(long)]
        save_learners: Option<PathBuf>,
        /// Cache directory [default: $OPENLEARNER_CACHE or ~/.cache/openlearner]
        #[arg(long, env = CACHE_ENV)]
        cache: Option<PathBuf>,
        /// Worker threads [default: number of processors]
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Grid search on the train split, maximising F1.
    Sweep {
        /// majority, persistence, engage, knowledge, interest, novelty or ink
        #[arg(long)]
        model: ModelKind,
        /// JSON object of parameter name to candidate values.
        #[arg(long)]
        grid: PathBuf,
        #[arg(long, default_value = "best.json")]
        out: PathBuf,
        /// Experiment configuration JSON.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Cache directory [default: $OPENLEARNER_CACHE or ~/.cache/openlearner]
        #[arg(long, env = CACHE_ENV)]
        cache: Option<PathBuf>,
        /// Worker threads [default: number of processors]
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Render a saved learner state as SVG or HTML.
    Visualize {
        /// Learner id as saved by `evaluate --save-learners`
        #[arg(long)]
        learner: String,
        /// knowledge or interest
        #[arg(long, default_value = "knowledge")]
        state: StateKind,
        /// bar, dot, line, pie, rose, bubble, treemap, radar or wordcloud
        #[arg(long, value_parser = parse_kind, default_value = "bubble")]
        kind: VizKind,
        /// Number of topics shown, highest mean first
        #[arg(long, default_value_t = 15)]
        top: usize,
        /// Output file (`.svg` or `.html`) or an existing directory.
        #[arg(long)]
        out: PathBuf,
        /// Directory written by `evaluate --save-learners`.
        #[arg(long, default_value = "learners")]
        learners: PathBuf,
        #[arg(long, default_value_t = 800)]
        width: u32,
        #[arg(long, default_value_t = 600)]
        height: u32,
        #[arg(long, default_value = "")]
        title: String,
        /// Write HTML when `--out` is a directory.
        #[arg(long)]
        html: bool,
    },
}

fn parse_kind(s: &str) -> Result<VizKind, String> {
    s.parse().map_err(|e: openlearner::Error| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            let class = err
                .chain()
                .find_map(|e| e.downcast_ref::<openlearner::Error>())
                .map(openlearner::Error::class)
                .unwrap_or(ErrorClass::Data);
            ExitCode::from(match class {
                ErrorClass::Usage => 2,
                ErrorClass::Data => 3,
                ErrorClass::Model => 4,
            })
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Fetch {
            dataset: Dataset::Peek,
            cache,
            manifest,
        } => fetch(cache, manifest),
        Command::Evaluate {
            model,
            config,
            out,
            params,
            save_learners,
            cache,
            jobs,
        } => {
            set_jobs(jobs)?;
            evaluate_cmd(model, config, &out, params, save_learners, cache)
        }
        Command::Sweep {
            model,
            grid,
            out,
            config,
            cache,
            jobs,
        } => {
            set_jobs(jobs)?;
            sweep_cmd(model, &grid, &out, config, cache)
        }
        Command::Visualize {
            learner,
            state,
            kind,
            top,
            out,
            learners,
            width,
            height,
            title,
            html,
        } => {
            let spec = VizSpec {
                kind,
                top_k: top,
                width,
                height,
                title,
            };
            visualize(&learner, state, &spec, &out, &learners, html)
        }
    }
}

fn set_jobs(jobs: Option<usize>) -> Result<()> {
    if let Some(n) = jobs {
        if n == 0 {
            return Err(openlearner::Error::invalid_parameter("jobs", "must be at least 1").into());
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn fetch(cache: Option<PathBuf>, manifest: Option<PathBuf>) -> Result<()> {
    let manifest = match manifest {
        Some(path) => DatasetManifest::load(&path)?,
        None => peek_manifest(),
    };
    let cache = cache.or_else(|| manifest.cache_dir.clone()).unwrap_or_else(default_cache_dir);
    let files = Fetcher::http().fetch(&manifest, &cache)?;
    for path in files {
        println!("{}  {}", sha256_file(&path)?, path.display());
    }
    Ok(())
}

/// Experiment config from `path` (relative dataset paths resolve against its
/// directory), with `model` taken from the command line.
fn load_config(model: ModelKind, path: Option<&Path>) -> Result<ExperimentConfig> {
    let Some(path) = path else {
        return Ok(ExperimentConfig::new(model));
    };
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut value: serde_json::Value =
        serde_json::from_str(&text).map_err(openlearner::Error::from).with_context(|| path.display().to_string())?;
    let obj = value
        .as_object_mut()
        .ok_or_else(|| openlearner::Error::invalid_parameter("config", "must be a JSON object"))?;
    obj.insert("model".into(), serde_json::to_value(model)?);
    let mut config = ExperimentConfig::from_json(&value.to_string())?;
    let base = path.parent().unwrap_or(Path::new(""));
    if let Some(d) = config.dataset.as_mut() {
        for p in d.train.iter_mut().chain(d.test.iter_mut()).chain(d.titles.iter_mut()) {
            *p = base.join(&*p);
        }
    }
    if let Some(c) = config.cache_dir.as_mut() {
        *c = base.join(&*c);
    }
    Ok(config)
}

fn load_data(config: &ExperimentConfig, cache: Option<PathBuf>) -> Result<SplitDataset> {
    let mapping = config.columns.clone().unwrap_or_default();
    let data = match &config.dataset {
        Some(files) => {
            let titles = files.titles.as_deref().map(load_titles).transpose()?;
            let train = parse(&files.train, &mapping, titles.as_ref())?;
            let test = parse(&files.test, &mapping, titles.as_ref())?;
            let mut rejects = train.rejects;
            rejects.extend(test.rejects);
            SplitDataset {
                train: train.streams,
                test: test.streams,
                rejects,
            }
        }
        None => {
            let cache = cache.or_else(|| config.cache_dir.clone()).unwrap_or_else(default_cache_dir);
            load_peek(&cache, &mapping)?
        }
    };
    let rejected: usize = data.rejects.iter().map(|(_, r)| r.len()).sum();
    if rejected > 0 {
        eprintln!("warning: {rejected} rows rejected");
    }
    Ok(data)
}

fn write(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    fs::write(path, text).map_err(|e| openlearner::Error::io(path, e).into())
}

/// Best point from a sweep result, or a flat `name -> value` map.
fn load_point(path: &Path) -> Result<GridPoint> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    if let Ok(result) = serde_json::from_str::<SweepResult>(&text) {
        return Ok(result.best_params);
    }
    serde_json::from_str::<GridPoint>(&text)
        .map_err(|e| anyhow!(openlearner::Error::invalid_parameter("params", e.to_string())))
        .with_context(|| path.display().to_string())
}

fn evaluate_cmd(
    model: ModelKind,
    config: Option<PathBuf>,
    out: &Path,
    params: Option<PathBuf>,
    save_learners: Option<PathBuf>,
    cache: Option<PathBuf>,
) -> Result<()> {
    let config = load_config(model, config.as_deref())?;
    let data = load_data(&config, cache)?;
    let point = match params {
        Some(path) => load_point(&path)?,
        None if config.grid.is_empty() => GridPoint::new(),
        None => sweep(&config, &data.train)?.best_params,
    };
    let (report, runs) = evaluate(&config, &point, &data.test)?;
    write(out, &report.to_json()?)?;

    if let Some(dir) = save_learners {
        fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
        for run in &runs {
            run.learner.save(&dir.join(format!("{}.json", run.learner_id)))?;
            if !run.history.is_empty() {
                run.history.save(&dir.join(format!("{}.history.json", run.learner_id)))?;
            }
        }
    }

    let a = &report.aggregate;
    println!("model      {}", report.model);
    println!("learners   {}", a.learners);
    println!("events     {}", a.events);
    println!("accuracy   {:.4}", a.accuracy);
    println!("precision  {:.4}", a.precision);
    println!("recall     {:.4}", a.recall);
    println!("f1         {:.4}", a.f1);
    Ok(())
}

fn sweep_cmd(model: ModelKind, grid: &Path, out: &Path, config: Option<PathBuf>, cache: Option<PathBuf>) -> Result<()> {
    let mut config = load_config(model, config.as_deref())?;
    let text = fs::read_to_string(grid).with_context(|| format!("reading {}", grid.display()))?;
    config.grid = serde_json::from_str::<ParamGrid>(&text)
        .map_err(|e| openlearner::Error::invalid_parameter("grid", e.to_string()))
        .with_context(|| grid.display().to_string())?;
    if config.grid.is_empty() {
        bail!(openlearner::Error::EmptyGrid);
    }
    let data = load_data(&config, cache)?;
    let result = sweep(&config, &data.train)?;
    write(out, &(serde_json::to_string_pretty(&result)? + "\n"))?;
    println!("best f1 {:.4} at {}", result.f1, serde_json::to_string(&result.best_params)?);
    Ok(())
}

fn visualize(learner_id: &str, state: StateKind, spec: &VizSpec, out: &Path, dir: &Path, html: bool) -> Result<()> {
    let learner = LearnerModel::load(&dir.join(format!("{learner_id}.json")))?;
    let history_path = dir.join(format!("{learner_id}.history.json"));
    let history = if history_path.exists() {
        let h = LearnerHistory::load(&history_path)?;
        // A history of the other belief map cannot drive this chart.
        (h.state == Some(state)).then_some(h)
    } else {
        None
    };
    let svg = render_learner(&learner, state, history.as_ref(), spec)?;

    let (path, as_html) = if out.is_dir() {
        (out.join(file_name(learner_id, spec.kind, html)), html)
    } else {
        (out.to_path_buf(), out.extension().is_some_and(|e| e == "html"))
    };
    let text = if as_html { export_html(&svg, spec) } else { svg };
    write(&path, &text)?;
    println!("{}", path.display());
    Ok(())
}

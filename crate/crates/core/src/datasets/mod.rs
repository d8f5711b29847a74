//! Learner-engagement datasets: download with digest verification, CSV
//! parsing into per-learner event streams, and learner-level splits.

mod fetch;
mod parse;
mod split;
pub mod synthetic;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

pub use fetch::{
    fetch, peek_manifest, sha256_file, sha256_hex, DatasetManifest, Fetcher, HttpTransport, ManifestFile,
    Transport, TransportError,
};
pub use parse::{
    load_titles, parse, parse_file, serialize_streams, write_rejects, ColumnMapping, KcTitles,
    ParsedFile, Parsed, RawInteractionRow, Reject, TopicColumns,
};
pub use split::{hash_bucket, split, Assignment, Fold, HASH_BUCKETS};

use crate::error::Result;
use crate::models::{EngagementLabel, EventModel};

/// One learner's time-ordered events.
pub type Stream = Vec<(EventModel, EngagementLabel)>;

/// Streams keyed by learner id.
pub type Streams = BTreeMap<String, Stream>;

pub const PEEK_NAME: &str = "peek-v1";
pub const PEEK_TRAIN: &str = "train.csv";
pub const PEEK_TEST: &str = "test.csv";
pub const PEEK_MAPPING: &str = "mapping.csv";

/// Train and test streams of a dataset with a published split.
#[derive(Clone, Debug, Default)]
pub struct SplitDataset {
    pub train: Streams,
    pub test: Streams,
    pub rejects: Vec<(PathBuf, Vec<Reject>)>,
}

impl SplitDataset {
    pub fn fold(&self, fold: Fold) -> &Streams {
        match fold {
            Fold::Train => &self.train,
            Fold::Test => &self.test,
        }
    }
}

/// Environment variable naming the dataset cache directory.
pub const CACHE_ENV: &str = "OPENLEARNER_CACHE";

/// `$OPENLEARNER_CACHE`, else `$XDG_CACHE_HOME/openlearner`, else
/// `$HOME/.cache/openlearner`, else `.openlearner-cache`.
pub fn default_cache_dir() -> PathBuf {
    let var = |name: &str| std::env::var_os(name).filter(|v| !v.is_empty()).map(PathBuf::from);
    if let Some(dir) = var(CACHE_ENV) {
        return dir;
    }
    if let Some(dir) = var("XDG_CACHE_HOME") {
        return dir.join("openlearner");
    }
    match var("HOME") {
        Some(home) => home.join(".cache").join("openlearner"),
        None => PathBuf::from(".openlearner-cache"),
    }
}

/// Directory holding one dataset inside a cache: `<cache_dir>/<name>`.
pub fn dataset_dir(cache_dir: &Path, name: &str) -> PathBuf {
    cache_dir.join(name)
}

/// Loads the PEEK train/test files (and titles when the mapping file is
/// present) from `<cache_dir>/peek-v1/`.
pub fn load_peek(cache_dir: &Path, mapping: &ColumnMapping) -> Result<SplitDataset> {
    let dir = dataset_dir(cache_dir, PEEK_NAME);
    let titles_path = dir.join(PEEK_MAPPING);
    let titles = if titles_path.exists() {
        Some(load_titles(&titles_path)?)
    } else {
        None
    };
    let train = parse_file(&dir.join(PEEK_TRAIN), mapping, titles.as_ref())?;
    let test = parse_file(&dir.join(PEEK_TEST), mapping, titles.as_ref())?;
    Ok(SplitDataset {
        rejects: vec![(train.path.clone(), train.rejects), (test.path.clone(), test.rejects)],
        train: train.streams,
        test: test.streams,
    })
}

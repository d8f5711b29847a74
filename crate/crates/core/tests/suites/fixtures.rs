//! Paths to the shared test fixtures.

use std::path::PathBuf;

use openlearner::datasets::{parse_file, ColumnMapping, Streams, PEEK_MAPPING, PEEK_TEST, PEEK_TRAIN};
use openlearner::datasets::load_titles;

pub fn dir() -> PathBuf {
    PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/../core/tests/fixtures"))
}

pub fn peek_sample() -> PathBuf {
    dir().join("peek-sample")
}

/// Train and test streams of the synthetic 50-learner sample.
pub fn peek_sample_streams() -> (Streams, Streams) {
    let d = peek_sample();
    let mapping = ColumnMapping::default();
    let titles = load_titles(&d.join(PEEK_MAPPING)).expect("mapping");
    let train = parse_file(&d.join(PEEK_TRAIN), &mapping, Some(&titles)).expect("train");
    let test = parse_file(&d.join(PEEK_TEST), &mapping, Some(&titles)).expect("test");
    (train.streams, test.streams)
}

#[allow(dead_code)]
pub fn update_golden() -> bool {
    std::env::var_os("UPDATE_GOLDEN").is_some()
}

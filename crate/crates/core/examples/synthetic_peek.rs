//! Writes a synthetic dataset in the PEEK file layout.
//!
//! Usage: synthetic_peek OUT_DIR [LEARNERS] [SEED]
//!
//! Learners whose hash bucket is 0 go to `test.csv`, the rest to
//! `train.csv`; topic titles go to `mapping.csv`.

use std::path::PathBuf;
use std::{env, fs};

use openlearner::datasets::synthetic::{generate, SyntheticConfig, SyntheticDataset};
use openlearner::datasets::{hash_bucket, PEEK_MAPPING, PEEK_TEST, PEEK_TRAIN};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = env::args().skip(1);
    let out = PathBuf::from(args.next().ok_or("usage: synthetic_peek OUT_DIR [LEARNERS] [SEED]")?);
    let mut config = SyntheticConfig::default();
    if let Some(n) = args.next() {
        config.learners = n.parse()?;
    }
    if let Some(s) = args.next() {
        config.seed = s.parse()?;
    }
    let data = generate(&config);
    let (test, train): (Vec<_>, Vec<_>) = data.rows.iter().cloned().partition(|r| hash_bucket(&r.learner_id) == 0);
    fs::create_dir_all(&out)?;
    for (name, rows) in [(PEEK_TRAIN, train), (PEEK_TEST, test)] {
        let part = SyntheticDataset {
            rows,
            titles: data.titles.clone(),
        };
        fs::write(out.join(name), part.to_peek_csv())?;
    }
    fs::write(out.join(PEEK_MAPPING), data.titles_csv())?;
    Ok(())
}

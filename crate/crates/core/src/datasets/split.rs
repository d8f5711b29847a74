use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::Streams;

pub const HASH_BUCKETS: u64 = 5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Fold {
    Train,
    Test,
}

/// Published learner-to-fold assignment.
pub type Assignment = BTreeMap<String, Fold>;

/// First eight bytes of SHA-256 of the learner id, big-endian, modulo 5.
pub fn hash_bucket(learner_id: &str) -> u64 {
    let digest = Sha256::digest(learner_id.as_bytes());
    let mut head = [0u8; 8];
    head.copy_from_slice(&digest[..8]);
    u64::from_be_bytes(head) % HASH_BUCKETS
}

fn fold_of(learner_id: &str, assignment: Option<&Assignment>) -> Fold {
    if let Some(fold) = assignment.and_then(|a| a.get(learner_id)) {
        return *fold;
    }
    if hash_bucket(learner_id) == 0 {
        Fold::Test
    } else {
        Fold::Train
    }
}

/// Learner-level split. Learners listed in `assignment` follow it; all
/// others go to the test fold when their hash bucket is 0.
pub fn split(streams: &Streams, fold: Fold, assignment: Option<&Assignment>) -> Streams {
    streams
        .iter()
        .filter(|(id, _)| fold_of(id, assignment) == fold)
        .map(|(id, s)| (id.clone(), s.clone()))
        .collect()
}

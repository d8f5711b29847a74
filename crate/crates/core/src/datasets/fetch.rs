use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::thread;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{dataset_dir, PEEK_MAPPING, PEEK_NAME, PEEK_TEST, PEEK_TRAIN};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestFile {
    pub file: String,
    pub url: String,
    pub sha256: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub name: String,
    pub urls: Vec<ManifestFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cache_dir: Option<PathBuf>,
}

impl DatasetManifest {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }
}

/// Published PEEK v1 files, pinned by commit and digest.
pub fn peek_manifest() -> DatasetManifest {
    const BASE: &str = "https://raw.githubusercontent.com/sahanbull/PEEK-Dataset";
    DatasetManifest {
        name: PEEK_NAME.to_string(),
        urls: vec![
            ManifestFile {
                file: PEEK_TRAIN.to_string(),
                url: format!("{BASE}/1740aa04aeb019494fd3593d4f708fd519fa101a/datasets/v1/train.csv"),
                sha256: "291afa33dacec5b1f9751788cf4d2ba38cb495936f20d2edcda5c88a6e2539c8".to_string(),
            },
            ManifestFile {
                file: PEEK_TEST.to_string(),
                url: format!("{BASE}/1740aa04aeb019494fd3593d4f708fd519fa101a/datasets/v1/test.csv"),
                sha256: "315d267fad18dcdf2300ede2fc0877c71cfc11c983a788ecf89bf69e3b4d2129".to_string(),
            },
            ManifestFile {
                file: PEEK_MAPPING.to_string(),
                url: format!(
                    "{BASE}/213eee0ef6837468d12971a0d865de328ce69159/datasets/v2/id_to_wiki_metadata_mapping.csv"
                ),
                sha256: "3240ac45661e8eefaaf120158f44a9aceba2e53117b07417ee5d3c055bb2d6c6".to_string(),
            },
        ],
        cache_dir: None,
    }
}

#[derive(Debug)]
pub struct TransportError(pub String);

/// Source of remote bytes.
pub trait Transport {
    fn get(&self, url: &str) -> std::result::Result<Vec<u8>, TransportError>;
}

/// `http(s)://` via a blocking client, `file://` from the local filesystem.
#[derive(Clone, Copy, Debug, Default)]
pub struct HttpTransport;

impl Transport for HttpTransport {
    fn get(&self, url: &str) -> std::result::Result<Vec<u8>, TransportError> {
        if let Some(path) = url.strip_prefix("file://") {
            return fs::read(path).map_err(|e| TransportError(format!("{path}: {e}")));
        }
        let response = ureq::get(url).call().map_err(|e| TransportError(e.to_string()))?;
        let mut bytes = Vec::new();
        response
            .into_body()
            .into_reader()
            .read_to_end(&mut bytes)
            .map_err(|e| TransportError(e.to_string()))?;
        Ok(bytes)
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(sha256_hex(&bytes))
}

/// Downloads manifest files into a cache, verifying every digest.
pub struct Fetcher<T: Transport> {
    transport: T,
    attempts: u32,
    initial_backoff: Duration,
}

impl Fetcher<HttpTransport> {
    pub fn http() -> Self {
        Fetcher::new(HttpTransport)
    }
}

impl<T: Transport> Fetcher<T> {
    /// Three attempts per file, backing off 1 s then 2 s.
    pub fn new(transport: T) -> Self {
        Fetcher {
            transport,
            attempts: 3,
            initial_backoff: Duration::from_secs(1),
        }
    }

    pub fn with_backoff(mut self, initial: Duration) -> Self {
        self.initial_backoff = initial;
        self
    }

    pub fn transport(&self) -> &T {
        &self.transport
    }

    fn download(&self, url: &str) -> Result<Vec<u8>> {
        let mut delay = self.initial_backoff;
        let mut last = String::new();
        for attempt in 1..=self.attempts {
            match self.transport.get(url) {
                Ok(bytes) => return Ok(bytes),
                Err(TransportError(reason)) => last = reason,
            }
            if attempt < self.attempts {
                thread::sleep(delay);
                delay *= 2;
            }
        }
        Err(Error::Network {
            url: url.to_string(),
            attempts: self.attempts,
            reason: last,
        })
    }

    /// Makes every manifest file present and verified under
    /// `<cache_dir>/<name>/`. Cached files with a good digest are not
    /// fetched again. New files are staged and only moved into place once
    /// every file has verified, so a failure never exposes a partial set.
    pub fn fetch(&self, manifest: &DatasetManifest, cache_dir: &Path) -> Result<Vec<PathBuf>> {
        let dir = dataset_dir(cache_dir, &manifest.name);
        fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;

        let mut staged = Vec::new();
        let mut result = Vec::new();
        let outcome = (|| -> Result<()> {
            for entry in &manifest.urls {
                let target = dir.join(&entry.file);
                result.push(target.clone());
                let expected = entry.sha256.to_ascii_lowercase();
                if target.exists() && sha256_file(&target)? == expected {
                    continue;
                }
                let bytes = self.download(&entry.url)?;
                let actual = sha256_hex(&bytes);
                if actual != expected {
                    return Err(Error::DigestMismatch {
                        file: entry.file.clone(),
                        expected,
                        actual,
                    });
                }
                let part = dir.join(format!("{}.part", entry.file));
                fs::write(&part, &bytes).map_err(|e| Error::io(&part, e))?;
                staged.push((part, target));
            }
            Ok(())
        })();

        if let Err(e) = outcome {
            for (part, _) in &staged {
                let _ = fs::remove_file(part);
            }
            return Err(e);
        }
        for (part, target) in staged {
            fs::rename(&part, &target).map_err(|e| Error::io(&target, e))?;
        }
        Ok(result)
    }
}

/// Fetches with the default HTTP transport.
pub fn fetch(manifest: &DatasetManifest, cache_dir: &Path) -> Result<Vec<PathBuf>> {
    Fetcher::http().fetch(manifest, cache_dir)
}

//! Persistent raw-score cache, so re-running a statistic never re-scores.
//!
//! Records are appended as JSON lines `{scorer, source, hypothesis, raw}` to
//! `$QE_BIAS_CACHE_DIR/scores.jsonl`.

use std::collections::HashMap;
use std::fs::{self, File, OpenOptions};
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{normalize_with_clamp, score_batch, ScaleDescriptor, ScoreEndpoint, ScoreRecord, ScoreRequest, ScoringError};

pub const CACHE_DIR_ENV: &str = "QE_BIAS_CACHE_DIR";
const CACHE_FILE: &str = "scores.jsonl";

#[derive(Debug, Clone, Serialize, Deserialize)]
struct CacheRecord {
    scorer: String,
    source: String,
    hypothesis: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    reference: Option<String>,
    raw: f64,
}

type Key = (String, String, String, Option<String>);

#[derive(Debug, Default)]
pub struct ScoreCache {
    entries: HashMap<Key, f64>,
    file: Option<File>,
    path: Option<PathBuf>,
    hits: usize,
    misses: usize,
}

impl ScoreCache {
    pub fn in_memory() -> Self {
        ScoreCache::default()
    }

    /// Opens (creating if needed) the cache file at `path` and loads its records.
    /// Unparseable lines, such as a torn final write, are skipped.
    pub fn open(path: &Path) -> io::Result<Self> {
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        let mut entries = HashMap::new();
        if path.exists() {
            for line in BufReader::new(File::open(path)?).lines() {
                if let Ok(rec) = serde_json::from_str::<CacheRecord>(&line?) {
                    entries.insert((rec.scorer, rec.source, rec.hypothesis, rec.reference), rec.raw);
                }
            }
        }
        let file = OpenOptions::new().create(true).append(true).open(path)?;
        Ok(ScoreCache { entries, file: Some(file), path: Some(path.to_owned()), hits: 0, misses: 0 })
    }

    /// Opens `$QE_BIAS_CACHE_DIR/scores.jsonl` when the variable is set, otherwise an
    /// in-memory cache.
    pub fn from_env() -> io::Result<Self> {
        match std::env::var_os(CACHE_DIR_ENV) {
            Some(dir) if !dir.is_empty() => ScoreCache::open(&Path::new(&dir).join(CACHE_FILE)),
            _ => Ok(ScoreCache::in_memory()),
        }
    }

    pub fn path(&self) -> Option<&Path> {
        self.path.as_deref()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn hits(&self) -> usize {
        self.hits
    }

    pub fn misses(&self) -> usize {
        self.misses
    }

    fn key(scorer: &str, req: &ScoreRequest) -> Key {
        (
            scorer.to_string(),
            req.source_text.clone(),
            req.hypothesis_text.clone(),
            req.reference_text.clone(),
        )
    }

    fn insert(&mut self, scorer: &str, req: &ScoreRequest, raw: f64) -> io::Result<()> {
        if let Some(file) = self.file.as_mut() {
            let rec = CacheRecord {
                scorer: scorer.to_string(),
                source: req.source_text.clone(),
                hypothesis: req.hypothesis_text.clone(),
                reference: req.reference_text.clone(),
                raw,
            };
            serde_json::to_writer(&mut *file, &rec)?;
            file.write_all(b"\n")?;
        }
        self.entries.insert(ScoreCache::key(scorer, req), raw);
        Ok(())
    }
}

/// Scores `requests` through the cache: only texts the cache has not seen for this
/// scorer reach the endpoint.
pub struct CachedScorer<'a> {
    pub endpoint: &'a mut dyn ScoreEndpoint,
    pub cache: &'a mut ScoreCache,
}

impl CachedScorer<'_> {
    pub fn score(
        &mut self,
        requests: &[ScoreRequest],
        scale: ScaleDescriptor,
    ) -> Result<Vec<ScoreRecord>, ScoringError> {
        let scorer = self.endpoint.info().name.clone();
        let mut cached: Vec<Option<f64>> = Vec::with_capacity(requests.len());
        let mut misses: Vec<ScoreRequest> = Vec::new();
        for req in requests {
            let hit = self.cache.entries.get(&ScoreCache::key(&scorer, req)).copied();
            if hit.is_none() {
                misses.push(req.clone());
            }
            cached.push(hit);
        }
        self.cache.hits += requests.len() - misses.len();
        self.cache.misses += misses.len();

        let fresh = score_batch(&mut *self.endpoint, &misses, scale)?;
        for (req, rec) in misses.iter().zip(&fresh) {
            self.cache.insert(&scorer, req, rec.raw)?;
        }
        if let Some(file) = self.cache.file.as_mut() {
            file.flush()?;
        }

        let mut fresh = fresh.into_iter();
        Ok(requests
            .iter()
            .zip(cached)
            .map(|(req, hit)| match hit {
                Some(raw) => {
                    let (normalized, clamped) = normalize_with_clamp(raw, scale);
                    ScoreRecord { id: req.id.clone(), raw, normalized, clamped }
                }
                None => fresh.next().expect("one fresh record per miss"),
            })
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scoring::{Exchange, MockScorer, ScorerInfo};

    struct Counting {
        inner: crate::scoring::mock::MockEndpoint,
        seen: usize,
    }

    impl ScoreEndpoint for Counting {
        fn info(&self) -> &ScorerInfo {
            self.inner.info()
        }
        fn exchange(&mut self, requests: &[ScoreRequest]) -> Result<Exchange, ScoringError> {
            self.seen += requests.len();
            self.inner.exchange(requests)
        }
    }

    #[test]
    fn second_run_is_served_from_disk() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cache").join("scores.jsonl");
        let reqs: Vec<ScoreRequest> =
            (0..4).map(|i| ScoreRequest::new(format!("r{i}"), "s", format!("h{i}"))).collect();

        let mut ep = Counting { inner: MockScorer::Hash.endpoint(), seen: 0 };
        let mut cache = ScoreCache::open(&path).unwrap();
        let first = CachedScorer { endpoint: &mut ep, cache: &mut cache }
            .score(&reqs, ScaleDescriptor::UNIT)
            .unwrap();
        assert_eq!(ep.seen, 4);
        drop(cache);

        let mut cache = ScoreCache::open(&path).unwrap();
        assert_eq!(cache.len(), 4);
        let second = CachedScorer { endpoint: &mut ep, cache: &mut cache }
            .score(&reqs, ScaleDescriptor::UNIT)
            .unwrap();
        assert_eq!(ep.seen, 4, "no request reached the scorer");
        assert_eq!(first, second);
        assert_eq!(cache.hits(), 4);
    }

    #[test]
    fn cache_is_per_scorer() {
        let mut cache = ScoreCache::in_memory();
        let reqs = vec![ScoreRequest::new("a", "s", "h")];
        let mut hash = MockScorer::Hash.endpoint();
        let mut constant = MockScorer::Constant(0.5).endpoint();
        CachedScorer { endpoint: &mut hash, cache: &mut cache }.score(&reqs, ScaleDescriptor::UNIT).unwrap();
        let c = CachedScorer { endpoint: &mut constant, cache: &mut cache }
            .score(&reqs, ScaleDescriptor::UNIT)
            .unwrap();
        assert_eq!(c[0].raw, 0.5);
        assert_eq!(cache.len(), 2);
    }
}

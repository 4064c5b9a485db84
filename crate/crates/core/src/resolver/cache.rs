use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::{Mutex, RwLock};
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use super::LookupOutcome;

/// One cached answer, stored as a JSON line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CacheEntry {
    pub key: String,
    pub outcome: LookupOutcome,
    /// Seconds since the Unix epoch.
    pub fetched_at: u64,
    pub ttl: u64,
}

impl CacheEntry {
    pub fn is_fresh(&self, now: u64) -> bool {
        now < self.fetched_at.saturating_add(self.ttl)
    }
}

/// Query-keyed answer cache, optionally persisted to an append-only
/// JSON-lines file. Later lines override earlier ones. Readers share a
/// lock; writers are serialized.
#[derive(Debug)]
pub struct Cache {
    entries: RwLock<HashMap<String, CacheEntry>>,
    file: Option<Mutex<File>>,
    path: Option<PathBuf>,
    ttl: Duration,
}

fn now_secs() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs())
}

impl Cache {
    pub fn in_memory(ttl: Duration) -> Self {
        Self {
            entries: RwLock::new(HashMap::new()),
            file: None,
            path: None,
            ttl,
        }
    }

    /// Load the cache file (creating it if needed). Unreadable lines are
    /// skipped.
    pub fn open(path: &Path, ttl: Duration) -> std::io::Result<Self> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir)?;
        }
        let mut entries = HashMap::new();
        if path.exists() {
            for line in BufReader::new(File::open(path)?).lines() {
                let line = line?;
                match serde_json::from_str::<CacheEntry>(&line) {
                    Ok(entry) if !entry.outcome.is_unavailable() => {
                        entries.insert(entry.key.clone(), entry);
                    }
                    Ok(_) => {}
                    Err(e) => tracing::warn!(path = %path.display(), error = %e, "skipping bad cache line"),
                }
            }
        }
        let file = OpenOptions::new().create(true).append(true).open(path)?;
        Ok(Self {
            entries: RwLock::new(entries),
            file: Some(Mutex::new(file)),
            path: Some(path.to_owned()),
            ttl,
        })
    }

    pub fn path(&self) -> Option<&Path> {
        self.path.as_deref()
    }

    pub fn len(&self) -> usize {
        self.entries.read().map_or(0, |e| e.len())
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, key: &str) -> Option<LookupOutcome> {
        self.get_at(key, now_secs())
    }

    /// Lookup as of `now` (seconds since the epoch); stale entries miss.
    pub fn get_at(&self, key: &str, now: u64) -> Option<LookupOutcome> {
        let entries = self.entries.read().ok()?;
        entries.get(key).filter(|e| e.is_fresh(now)).map(|e| e.outcome.clone())
    }

    /// Store an answer. Outages are never cached.
    pub fn put(&self, key: &str, outcome: &LookupOutcome) {
        self.put_at(key, outcome, now_secs());
    }

    pub fn put_at(&self, key: &str, outcome: &LookupOutcome, now: u64) {
        if outcome.is_unavailable() {
            return;
        }
        let entry = CacheEntry {
            key: key.to_owned(),
            outcome: outcome.clone(),
            fetched_at: now,
            ttl: self.ttl.as_secs(),
        };
        if let Some(file) = &self.file {
            let line = serde_json::to_string(&entry).expect("cache entries serialize");
            let mut file = file.lock().unwrap_or_else(|e| e.into_inner());
            if let Err(e) = writeln!(file, "{line}") {
                tracing::warn!(error = %e, "cache write failed");
            }
        }
        if let Ok(mut entries) = self.entries.write() {
            entries.insert(entry.key.clone(), entry);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::UnavailableCause;

    const DAY: u64 = 86_400;

    #[test]
    fn outages_are_not_cached() {
        let cache = Cache::in_memory(Duration::from_secs(30 * DAY));
        cache.put("doi:10.1/x", &LookupOutcome::unavailable(UnavailableCause::Timeout));
        assert!(cache.get("doi:10.1/x").is_none());
        cache.put("doi:10.1/x", &LookupOutcome::NotFound);
        assert_eq!(cache.get("doi:10.1/x"), Some(LookupOutcome::NotFound));
    }

    #[test]
    fn entries_expire() {
        let cache = Cache::in_memory(Duration::from_secs(30 * DAY));
        cache.put_at("k", &LookupOutcome::NotFound, 1_000);
        assert!(cache.get_at("k", 1_000 + 29 * DAY).is_some());
        assert!(cache.get_at("k", 1_000 + 30 * DAY).is_none());
    }

    #[test]
    fn persists_across_reopen() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sub/cache.jsonl");
        {
            let cache = Cache::open(&path, Duration::from_secs(DAY)).unwrap();
            cache.put("a", &LookupOutcome::NotFound);
            cache.put("b", &LookupOutcome::Candidates { records: vec![] });
            cache.put("a", &LookupOutcome::Candidates { records: vec![] });
        }
        std::fs::OpenOptions::new()
            .append(true)
            .open(&path)
            .unwrap()
            .write_all(b"not json\n")
            .unwrap();
        let cache = Cache::open(&path, Duration::from_secs(DAY)).unwrap();
        assert_eq!(cache.len(), 2);
        assert_eq!(cache.get("a"), Some(LookupOutcome::Candidates { records: vec![] }));
    }
}

//! Persistent geocode cache.
//!
//! On disk the cache is an append-only log, one JSON object per line:
//!
//! ```json
//! {"key":"search:paris","places":[{"country_code":"fr","city":"paris",...}]}
//! ```
//!
//! Each entry is written with a single `write_all` followed by a flush, so a
//! crash can at worst leave a torn final line, which loading skips. Later
//! lines win over earlier ones with the same key. [`GeocodeCache::compact`]
//! rewrites the log with one line per key, sorted by key.

use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, RwLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::place::ResolvedPlace;

type Entries = HashMap<String, Arc<[ResolvedPlace]>>;

#[derive(Serialize, Deserialize)]
struct Entry<'a> {
    #[serde(borrow)]
    key: std::borrow::Cow<'a, str>,
    places: Vec<ResolvedPlace>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct CacheStats {
    pub entries: usize,
    /// Lines in the on-disk log, including superseded and torn ones.
    pub log_lines: usize,
    pub skipped_lines: usize,
}

#[derive(Debug, Default)]
pub struct GeocodeCache {
    map: RwLock<HashMap<String, Arc<[ResolvedPlace]>>>,
    log: Option<Mutex<BufWriter<File>>>,
    path: Option<PathBuf>,
    stats: CacheStats,
}

impl GeocodeCache {
    pub fn in_memory() -> Self {
        Self::default()
    }

    /// Opens (creating if needed) the log at `path` and loads it.
    pub fn open(path: &Path) -> Result<Self> {
        let (map, mut stats) = if path.exists() {
            Self::load(path)?
        } else {
            (HashMap::new(), CacheStats::default())
        };
        stats.entries = map.len();
        let mut file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(|e| Error::write(path, e))?;
        // Terminate a torn final line so the next entry starts on its own line.
        if ends_mid_line(path).map_err(|e| Error::read(path, e))? {
            file.write_all(b"\n").map_err(|e| Error::write(path, e))?;
        }
        Ok(GeocodeCache {
            map: RwLock::new(map),
            log: Some(Mutex::new(BufWriter::new(file))),
            path: Some(path.to_owned()),
            stats,
        })
    }

    fn load(path: &Path) -> Result<(Entries, CacheStats)> {
        let file = File::open(path).map_err(|e| Error::read(path, e))?;
        let mut map = HashMap::new();
        let mut stats = CacheStats::default();
        let mut reader = BufReader::new(file);
        let mut line = Vec::new();
        loop {
            line.clear();
            if reader
                .read_until(b'\n', &mut line)
                .map_err(|e| Error::read(path, e))?
                == 0
            {
                break;
            }
            stats.log_lines += 1;
            match serde_json::from_slice::<Entry>(&line) {
                Ok(entry) => {
                    map.insert(entry.key.into_owned(), entry.places.into());
                }
                Err(_) => stats.skipped_lines += 1,
            }
        }
        Ok((map, stats))
    }

    pub fn path(&self) -> Option<&Path> {
        self.path.as_deref()
    }

    /// Stats as of opening, with the current entry count.
    pub fn stats(&self) -> CacheStats {
        CacheStats {
            entries: self.len(),
            ..self.stats
        }
    }

    pub fn len(&self) -> usize {
        self.map.read().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, key: &str) -> Option<Arc<[ResolvedPlace]>> {
        self.map.read().unwrap().get(key).cloned()
    }

    /// Records a response. The log line is flushed before the entry becomes
    /// visible to readers.
    pub fn insert(&self, key: &str, places: Arc<[ResolvedPlace]>) -> Result<()> {
        if let Some(log) = &self.log {
            let mut line = serde_json::to_vec(&Entry {
                key: key.into(),
                places: places.to_vec(),
            })?;
            line.push(b'\n');
            let mut w = log.lock().unwrap();
            let path = self.path.as_deref().unwrap_or(Path::new("<cache>"));
            w.write_all(&line)
                .and_then(|_| w.flush())
                .map_err(|e| Error::write(path, e))?;
        }
        self.map.write().unwrap().insert(key.to_owned(), places);
        Ok(())
    }

    /// Keys in sorted order.
    pub fn keys(&self) -> Vec<String> {
        let mut keys: Vec<String> = self.map.read().unwrap().keys().cloned().collect();
        keys.sort_unstable();
        keys
    }

    /// Rewrites the log at `path` keeping only the live entry for each key.
    /// Returns stats of the compacted log.
    pub fn compact(path: &Path) -> Result<CacheStats> {
        let (map, _) = Self::load(path)?;
        let tmp = path.with_extension("compact.tmp");
        {
            let file = File::create(&tmp).map_err(|e| Error::write(&tmp, e))?;
            let mut w = BufWriter::new(file);
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort_unstable();
            for key in keys {
                serde_json::to_writer(
                    &mut w,
                    &Entry {
                        key: key.as_str().into(),
                        places: map[key].to_vec(),
                    },
                )?;
                w.write_all(b"\n").map_err(|e| Error::write(&tmp, e))?;
            }
            let file = w.into_inner().map_err(|e| Error::write(&tmp, e.into_error()))?;
            file.sync_all().map_err(|e| Error::write(&tmp, e))?;
        }
        std::fs::rename(&tmp, path).map_err(|e| Error::write(path, e))?;
        Ok(CacheStats {
            entries: map.len(),
            log_lines: map.len(),
            skipped_lines: 0,
        })
    }
}

fn ends_mid_line(path: &Path) -> std::io::Result<bool> {
    use std::io::{Read, Seek, SeekFrom};
    let mut f = File::open(path)?;
    if f.metadata()?.len() == 0 {
        return Ok(false);
    }
    f.seek(SeekFrom::End(-1))?;
    let mut last = [0u8; 1];
    f.read_exact(&mut last)?;
    Ok(last[0] != b'\n')
}

#[cfg(test)]
mod tests {
    use super::*;

    fn paris() -> Arc<[ResolvedPlace]> {
        vec![ResolvedPlace {
            country_code: Some("fr".into()),
            city: Some("paris".into()),
            importance: Some(0.9),
            ..Default::default()
        }]
        .into()
    }

    #[test]
    fn persists_across_reopen() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cache.jsonl");
        {
            let c = GeocodeCache::open(&path).unwrap();
            c.insert("search:paris", paris()).unwrap();
            c.insert("search:zzqy", Vec::new().into()).unwrap();
        }
        let c = GeocodeCache::open(&path).unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(c.get("search:paris").unwrap(), paris());
        assert!(c.get("search:zzqy").unwrap().is_empty());
        assert!(c.get("search:nowhere").is_none());
    }

    #[test]
    fn torn_tail_is_skipped() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cache.jsonl");
        {
            let c = GeocodeCache::open(&path).unwrap();
            c.insert("search:paris", paris()).unwrap();
        }
        let mut f = OpenOptions::new().append(true).open(&path).unwrap();
        f.write_all(br#"{"key":"search:lon"#).unwrap();
        drop(f);
        {
            let c = GeocodeCache::open(&path).unwrap();
            assert_eq!(c.len(), 1);
            assert_eq!(c.stats().skipped_lines, 1);
            c.insert("search:london", Vec::new().into()).unwrap();
        }
        let c = GeocodeCache::open(&path).unwrap();
        assert_eq!(c.len(), 2);
    }

    #[test]
    fn compact_keeps_latest() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cache.jsonl");
        {
            let c = GeocodeCache::open(&path).unwrap();
            c.insert("search:paris", Vec::new().into()).unwrap();
            c.insert("search:paris", paris()).unwrap();
            c.insert("search:a", Vec::new().into()).unwrap();
        }
        let stats = GeocodeCache::compact(&path).unwrap();
        assert_eq!(stats.entries, 2);
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 2);
        assert!(text.lines().next().unwrap().contains("search:a"));
        let c = GeocodeCache::open(&path).unwrap();
        assert_eq!(c.get("search:paris").unwrap(), paris());
    }
}

//! Location-name index used to prune toponym candidates.
//!
//! The index is an immutable hash set of normalized names. It is built from a
//! world-cities CSV (header row required) and can be saved to / loaded from a
//! binary snapshot for fast startup.
//!
//! # Snapshot layout (version 1)
//!
//! All integers little-endian.
//!
//! ```text
//! magic        4 bytes  "TGIX"
//! version      u32      1
//! rows         u64      CSV rows read when the index was built
//! raw_names    u64      names read before deduplication
//! entry_count  u64
//! entries      entry_count × { len: u32, utf8 bytes }, sorted bytewise
//! ```

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use unicode_normalization::UnicodeNormalization;

use crate::error::{Error, Result};

const SNAPSHOT_MAGIC: &[u8; 4] = b"TGIX";
const SNAPSHOT_VERSION: u32 = 1;

/// Header names (case-insensitive) whose values are indexed. Covers the
/// Kaggle world-cities dump (`City`, `AccentCity`) and GeoNames-style exports.
const NAME_COLUMNS: &[&str] = &[
    "city",
    "accentcity",
    "city_ascii",
    "name",
    "asciiname",
    "ascii_name",
];

/// Lowercases, applies NFC, trims, and collapses internal whitespace runs to
/// one space. Diacritics are kept.
pub fn normalize(phrase: &str) -> String {
    let mut out = String::with_capacity(phrase.len());
    if phrase.is_ascii() {
        for word in phrase.split_whitespace() {
            if !out.is_empty() {
                out.push(' ');
            }
            out.extend(word.chars().map(|c| c.to_ascii_lowercase()));
        }
        return out;
    }
    let lowered: String = phrase.nfc().flat_map(char::to_lowercase).nfc().collect();
    for word in lowered.split_whitespace() {
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(word);
    }
    out
}

/// Counts reported when an index is built from CSV.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, serde::Serialize)]
pub struct BuildCounts {
    /// Data rows read from the source CSV (0 for indexes built from a list).
    pub rows: u64,
    /// Non-empty names read, before deduplication across rows.
    pub raw_names: u64,
    pub distinct_names: u64,
}

#[derive(Debug, Clone, Default)]
pub struct GazetteerIndex {
    entries: HashSet<String>,
    rows: u64,
    raw_names: u64,
}

impl GazetteerIndex {
    pub fn from_names<I, S>(names: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut index = GazetteerIndex::default();
        for name in names {
            index.insert(name.as_ref());
        }
        index
    }

    fn insert(&mut self, name: &str) {
        let n = normalize(name);
        if !n.is_empty() {
            self.raw_names += 1;
            self.entries.insert(n);
        }
    }

    /// Builds from a CSV with a header row. Every recognized name column is
    /// indexed. Files that are not valid UTF-8 (the Kaggle dump is Latin-1)
    /// are decoded byte-per-char.
    pub fn build_from_csv(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::read(path, e))?;
        Self::build_from_reader(file).map_err(|e| match e {
            Error::Csv { source, .. } => Error::Csv {
                path: path.to_owned(),
                source,
            },
            other => other,
        })
    }

    pub fn build_from_reader<R: Read>(reader: R) -> Result<Self> {
        let csv_err = |source| Error::Csv {
            path: "<reader>".into(),
            source,
        };
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .flexible(true)
            .from_reader(reader);
        let headers = rdr.byte_headers().map_err(csv_err)?.clone();
        let columns: Vec<usize> = headers
            .iter()
            .enumerate()
            .filter(|(_, h)| {
                let h = decode(h).trim().to_ascii_lowercase();
                NAME_COLUMNS.contains(&h.as_str())
            })
            .map(|(i, _)| i)
            .collect();
        if columns.is_empty() {
            return Err(Error::Config(format!(
                "gazetteer CSV has no name column (expected one of {NAME_COLUMNS:?})"
            )));
        }

        let mut index = GazetteerIndex::default();
        let mut record = csv::ByteRecord::new();
        while rdr.read_byte_record(&mut record).map_err(csv_err)? {
            index.rows += 1;
            let mut seen_in_row: Vec<String> = Vec::with_capacity(columns.len());
            for &col in &columns {
                let Some(cell) = record.get(col) else { continue };
                let n = normalize(&decode(cell));
                // `City` and `AccentCity` usually agree; count a row's name once.
                if n.is_empty() || seen_in_row.contains(&n) {
                    continue;
                }
                index.raw_names += 1;
                index.entries.insert(n.clone());
                seen_in_row.push(n);
            }
        }
        Ok(index)
    }

    /// Loads a snapshot, or builds from CSV when the file is not a snapshot.
    pub fn load(path: &Path) -> Result<Self> {
        let mut magic = [0u8; 4];
        let is_snapshot = File::open(path)
            .map_err(|e| Error::read(path, e))?
            .read_exact(&mut magic)
            .is_ok()
            && &magic == SNAPSHOT_MAGIC;
        if is_snapshot {
            Self::read_snapshot(path)
        } else {
            Self::build_from_csv(path)
        }
    }

    pub fn contains(&self, phrase: &str) -> bool {
        self.entries.contains(&normalize(phrase))
    }

    /// Lookup for a phrase that is already normalized.
    pub fn contains_normalized(&self, phrase: &str) -> bool {
        self.entries.contains(phrase)
    }

    pub fn entry_count(&self) -> usize {
        self.entries.len()
    }

    pub fn counts(&self) -> BuildCounts {
        BuildCounts {
            rows: self.rows,
            raw_names: self.raw_names,
            distinct_names: self.entries.len() as u64,
        }
    }

    pub fn entries(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(String::as_str)
    }

    fn sorted(&self) -> Vec<&str> {
        let mut v: Vec<&str> = self.entries().collect();
        v.sort_unstable();
        v
    }

    pub fn write_snapshot(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::write(path, e))?;
        let mut w = BufWriter::new(file);
        let io = (|| -> std::io::Result<()> {
            w.write_all(SNAPSHOT_MAGIC)?;
            w.write_all(&SNAPSHOT_VERSION.to_le_bytes())?;
            w.write_all(&self.rows.to_le_bytes())?;
            w.write_all(&self.raw_names.to_le_bytes())?;
            w.write_all(&(self.entries.len() as u64).to_le_bytes())?;
            for entry in self.sorted() {
                w.write_all(&(entry.len() as u32).to_le_bytes())?;
                w.write_all(entry.as_bytes())?;
            }
            w.flush()
        })();
        io.map_err(|e| Error::write(path, e))
    }

    pub fn read_snapshot(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::read(path, e))?;
        let mut r = BufReader::new(file);
        let bad = |what: &str| Error::Snapshot(format!("{}: {what}", path.display()));

        let mut magic = [0u8; 4];
        r.read_exact(&mut magic).map_err(|_| bad("truncated header"))?;
        if &magic != SNAPSHOT_MAGIC {
            return Err(bad("bad magic"));
        }
        let version = read_u32(&mut r).map_err(|_| bad("truncated header"))?;
        if version != SNAPSHOT_VERSION {
            return Err(bad(&format!("unsupported version {version}")));
        }
        let rows = read_u64(&mut r).map_err(|_| bad("truncated header"))?;
        let raw_names = read_u64(&mut r).map_err(|_| bad("truncated header"))?;
        let count = read_u64(&mut r).map_err(|_| bad("truncated header"))?;
        let mut entries = HashSet::with_capacity(count.min(1 << 24) as usize);
        for _ in 0..count {
            let len = read_u32(&mut r).map_err(|_| bad("truncated entry"))? as usize;
            let mut buf = vec![0u8; len];
            r.read_exact(&mut buf).map_err(|_| bad("truncated entry"))?;
            let s = String::from_utf8(buf).map_err(|_| bad("entry is not utf-8"))?;
            entries.insert(s);
        }
        Ok(GazetteerIndex {
            entries,
            rows,
            raw_names,
        })
    }
}

fn read_u32(r: &mut impl Read) -> std::io::Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64(r: &mut impl Read) -> std::io::Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn decode(bytes: &[u8]) -> std::borrow::Cow<'_, str> {
    match std::str::from_utf8(bytes) {
        Ok(s) => s.into(),
        // Latin-1: every byte maps to the code point of the same value.
        Err(_) => bytes.iter().map(|&b| b as char).collect::<String>().into(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalize_examples() {
        assert_eq!(normalize("  New   York "), "new york");
        assert_eq!(normalize("PARIS"), "paris");
        assert_eq!(normalize("São Paulo"), "são paulo");
        // Decomposed input composes: "a" + U+0303.
        assert_eq!(normalize("Sa\u{0303}o Paulo"), "são paulo");
        assert_eq!(normalize("\tLos\nAngeles"), "los angeles");
        assert_eq!(normalize(""), "");
    }

    #[test]
    fn build_dedups_normalized_names() {
        let csv = "Country,City,AccentCity\nus,new york,New York\nfr,paris,Paris\nus,paris,PARIS\ngb,london,London\nbr,sao paulo,São Paulo\n";
        let index = GazetteerIndex::build_from_reader(csv.as_bytes()).unwrap();
        // new york, paris, london, sao paulo, são paulo
        assert_eq!(index.entry_count(), 5);
        assert!(index.contains("New York"));
        assert!(index.contains("São Paulo"));
        assert!(index.contains("sao paulo"));
        assert!(!index.contains("qwxzt"));
    }

    #[test]
    fn header_only_is_empty() {
        let index = GazetteerIndex::build_from_reader("Country,City\n".as_bytes()).unwrap();
        assert_eq!(index.entry_count(), 0);
    }

    #[test]
    fn no_name_column_is_config_error() {
        let err = GazetteerIndex::build_from_reader("a,b\n1,2\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }

    #[test]
    fn latin1_is_decoded() {
        let mut csv = b"City\n".to_vec();
        csv.extend_from_slice(&[b'Z', 0xfc, b'r', b'i', b'c', b'h', b'\n']);
        let index = GazetteerIndex::build_from_reader(&csv[..]).unwrap();
        assert!(index.contains("zürich"));
    }

    #[test]
    fn snapshot_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("idx.bin");
        let index = GazetteerIndex::from_names(["Paris", "new york", "São Paulo"]);
        index.write_snapshot(&path).unwrap();
        let back = GazetteerIndex::load(&path).unwrap();
        assert_eq!(back.entry_count(), 3);
        assert_eq!(back.counts(), index.counts());
        assert!(back.contains("NEW YORK"));
    }

    #[test]
    fn corrupt_snapshot_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("idx.bin");
        let mut bytes = SNAPSHOT_MAGIC.to_vec();
        bytes.extend_from_slice(&1u32.to_le_bytes());
        bytes.extend_from_slice(&0u64.to_le_bytes());
        bytes.extend_from_slice(&0u64.to_le_bytes());
        bytes.extend_from_slice(&5u64.to_le_bytes());
        std::fs::write(&path, bytes).unwrap();
        assert!(matches!(
            GazetteerIndex::load(&path),
            Err(Error::Snapshot(_))
        ));
    }
}

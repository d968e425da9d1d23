//! Newline-delimited tweet JSON ingestion.
//!
//! Each line is parsed independently into a [`RawTweet`]. Lines that are not
//! valid JSON, are not UTF-8, or lack an id or body are counted in
//! [`IngestStats::skipped_malformed`] and skipped; the stream never aborts on
//! bad data.

use std::collections::HashSet;
use std::fs::File;
use std::io::{self, BufRead, BufReader, Read};
use std::path::Path;

use chrono::{DateTime, NaiveDateTime, Utc};
use flate2::read::MultiGzDecoder;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::place::Coordinates;

/// The geolocation-relevant subset of one tweet record.
#[derive(Debug, Clone, PartialEq)]
pub struct RawTweet {
    pub tweet_id: u64,
    pub user_id: u64,
    pub created_at: DateTime<Utc>,
    /// Extended text when the record carries it, otherwise the classic field.
    pub text: String,
    pub user_location: Option<String>,
    pub place_full_name: Option<String>,
    /// Lowercase ISO 3166-1 alpha-2.
    pub place_country_code: Option<String>,
    /// Precise device GPS only; place bounding boxes never populate this.
    pub coordinates: Option<Coordinates>,
    pub language: Option<String>,
    pub user_verified: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("line is not valid JSON: {0}")]
    Json(String),
    #[error("missing or invalid field `{0}`")]
    Field(&'static str),
    #[error("tweet text is empty")]
    EmptyText,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum WireId {
    Num(u64),
    Str(String),
}

impl WireId {
    fn get(&self) -> Option<u64> {
        match self {
            WireId::Num(n) => Some(*n),
            WireId::Str(s) => s.trim().parse().ok(),
        }
    }
}

#[derive(Deserialize)]
struct WireExtended {
    full_text: Option<String>,
}

#[derive(Deserialize)]
struct WireUser {
    id: Option<WireId>,
    id_str: Option<String>,
    location: Option<String>,
    #[serde(default)]
    verified: Option<bool>,
}

#[derive(Deserialize)]
struct WirePlace {
    full_name: Option<String>,
    country_code: Option<String>,
}

#[derive(Deserialize)]
struct WireTweet {
    id: Option<WireId>,
    id_str: Option<String>,
    created_at: Option<String>,
    text: Option<String>,
    full_text: Option<String>,
    extended_tweet: Option<WireExtended>,
    user: Option<WireUser>,
    place: Option<WirePlace>,
    coordinates: Option<Value>,
    geo: Option<Value>,
    lang: Option<String>,
}

fn non_empty(s: Option<String>) -> Option<String> {
    s.filter(|v| !v.trim().is_empty())
}

fn parse_timestamp(raw: &str) -> Option<DateTime<Utc>> {
    // Classic platform layout first ("Wed Feb 05 12:00:00 +0000 2020"), then RFC 3339.
    if let Ok(ts) = DateTime::parse_from_str(raw, "%a %b %d %H:%M:%S %z %Y") {
        return Some(ts.with_timezone(&Utc));
    }
    if let Ok(ts) = DateTime::parse_from_rfc3339(raw) {
        return Some(ts.with_timezone(&Utc));
    }
    NaiveDateTime::parse_from_str(raw, "%Y-%m-%d %H:%M:%S")
        .ok()
        .map(|n| n.and_utc())
}

/// `[a, b]` from a GeoJSON-ish `{"coordinates": [a, b]}` object.
fn point_pair(v: &Value) -> Option<(f64, f64)> {
    let arr = v.get("coordinates")?.as_array()?;
    match arr.as_slice() {
        [a, b] => Some((a.as_f64()?, b.as_f64()?)),
        _ => None,
    }
}

fn gps(wire: &WireTweet) -> Option<Coordinates> {
    // `coordinates` is GeoJSON (lon, lat); the deprecated `geo` is (lat, lon).
    if let Some((lon, lat)) = wire.coordinates.as_ref().and_then(point_pair) {
        return Coordinates::new(lat, lon);
    }
    let (lat, lon) = wire.geo.as_ref().and_then(point_pair)?;
    Coordinates::new(lat, lon)
}

/// Parses one line of tweet JSON.
pub fn parse_tweet(line: &str) -> Result<RawTweet, ParseError> {
    let wire: WireTweet =
        serde_json::from_str(line).map_err(|e| ParseError::Json(e.to_string()))?;

    let tweet_id = wire
        .id_str
        .as_deref()
        .and_then(|s| s.trim().parse().ok())
        .or_else(|| wire.id.as_ref().and_then(WireId::get))
        .filter(|&id| id > 0)
        .ok_or(ParseError::Field("id"))?;
    let user = wire.user.as_ref().ok_or(ParseError::Field("user"))?;
    let user_id = user
        .id_str
        .as_deref()
        .and_then(|s| s.trim().parse().ok())
        .or_else(|| user.id.as_ref().and_then(WireId::get))
        .filter(|&id| id > 0)
        .ok_or(ParseError::Field("user.id"))?;
    let created_at = wire
        .created_at
        .as_deref()
        .and_then(parse_timestamp)
        .ok_or(ParseError::Field("created_at"))?;

    let coordinates = gps(&wire);
    let WireTweet {
        text,
        full_text,
        extended_tweet,
        user,
        place,
        lang,
        ..
    } = wire;

    let text = extended_tweet
        .and_then(|e| e.full_text)
        .or(full_text)
        .or(text)
        .ok_or(ParseError::Field("text"))?;
    if text.trim().is_empty() {
        return Err(ParseError::EmptyText);
    }

    let user = user.expect("checked above");
    let (place_full_name, place_country_code) = match place {
        Some(p) => (
            non_empty(p.full_name),
            non_empty(p.country_code).map(|c| c.trim().to_ascii_lowercase()),
        ),
        None => (None, None),
    };

    Ok(RawTweet {
        tweet_id,
        user_id,
        created_at,
        text,
        user_location: non_empty(user.location),
        place_full_name,
        place_country_code,
        coordinates,
        language: non_empty(lang),
        user_verified: user.verified.unwrap_or(false),
    })
}

impl RawTweet {
    /// Minimal platform-shaped JSON that [`parse_tweet`] reads back into an
    /// identical record.
    pub fn to_json(&self) -> Value {
        let mut v = json!({
            "id_str": self.tweet_id.to_string(),
            "created_at": self.created_at.format("%a %b %d %H:%M:%S %z %Y").to_string(),
            "full_text": self.text,
            "user": {
                "id_str": self.user_id.to_string(),
                "location": self.user_location,
                "verified": self.user_verified,
            },
            "lang": self.language,
        });
        if self.place_full_name.is_some() || self.place_country_code.is_some() {
            v["place"] = json!({
                "full_name": self.place_full_name,
                "country_code": self.place_country_code.as_ref().map(|c| c.to_ascii_uppercase()),
            });
        }
        if let Some(c) = self.coordinates {
            v["coordinates"] = json!({ "type": "Point", "coordinates": [c.lon, c.lat] });
        }
        v
    }
}

/// Counters for one pass over a corpus.
///
/// `lines_read == parsed_ok + skipped_malformed` and `filtered_out <= parsed_ok`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestStats {
    pub lines_read: u64,
    pub parsed_ok: u64,
    pub skipped_malformed: u64,
    pub filtered_out: u64,
}

impl IngestStats {
    pub fn merge(&mut self, other: &IngestStats) {
        self.lines_read += other.lines_read;
        self.parsed_ok += other.parsed_ok;
        self.skipped_malformed += other.skipped_malformed;
        self.filtered_out += other.filtered_out;
    }
}

/// A set of lowercase hashtags/keywords, stored without a leading `#`.
#[derive(Debug, Clone, Default)]
pub struct KeywordSet {
    words: HashSet<String>,
}

impl KeywordSet {
    pub fn new<I, S>(words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let words = words
            .into_iter()
            .map(|w| w.as_ref().trim().trim_start_matches('#').to_lowercase())
            .filter(|w| !w.is_empty())
            .collect();
        KeywordSet { words }
    }

    /// One entry per line; blank lines and `#`-only lines are ignored.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::read(path, e))?;
        Ok(KeywordSet::new(text.lines()))
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn contains(&self, word: &str) -> bool {
        self.words.contains(word)
    }
}

/// True when any whitespace token of the text, lowercased and with
/// surrounding punctuation (including `#`) trimmed, is a keyword.
pub fn matches_keywords(tweet: &RawTweet, keywords: &KeywordSet) -> bool {
    tweet.text.split_whitespace().any(|raw| {
        let token = raw.trim_matches(|c: char| !c.is_alphanumeric());
        !token.is_empty() && keywords.contains(&token.to_lowercase())
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Compression {
    None,
    Gzip,
    /// Gzip when the input starts with the gzip magic bytes.
    #[default]
    Auto,
}

/// Opens a corpus file, or standard input for `-`.
pub fn open_source(path: &Path, compression: Compression) -> Result<Box<dyn BufRead + Send>> {
    let raw: Box<dyn Read + Send> = if path.as_os_str() == "-" {
        Box::new(io::stdin())
    } else {
        Box::new(File::open(path).map_err(|e| Error::read(path, e))?)
    };
    let mut buffered = BufReader::with_capacity(1 << 16, raw);
    let gzip = match compression {
        Compression::None => false,
        Compression::Gzip => true,
        Compression::Auto => buffered
            .fill_buf()
            .map_err(|e| Error::read(path, e))?
            .starts_with(&[0x1f, 0x8b]),
    };
    Ok(if gzip {
        Box::new(BufReader::with_capacity(
            1 << 16,
            MultiGzDecoder::new(buffered),
        ))
    } else {
        Box::new(buffered)
    })
}

/// Streams [`RawTweet`]s from newline-delimited JSON in input order.
pub struct CorpusReader<R> {
    reader: R,
    buf: Vec<u8>,
    filter: Option<KeywordSet>,
    stats: IngestStats,
}

impl<R: BufRead> CorpusReader<R> {
    pub fn new(reader: R) -> Self {
        CorpusReader {
            reader,
            buf: Vec::with_capacity(4096),
            filter: None,
            stats: IngestStats::default(),
        }
    }

    /// Drops tweets that match none of `keywords`.
    pub fn with_keywords(mut self, keywords: KeywordSet) -> Self {
        self.filter = Some(keywords);
        self
    }

    pub fn stats(&self) -> IngestStats {
        self.stats
    }

    /// Next tweet, or `Ok(None)` at end of input. Only I/O failures of the
    /// underlying reader are errors.
    pub fn next_tweet(&mut self) -> io::Result<Option<RawTweet>> {
        loop {
            self.buf.clear();
            if self.reader.read_until(b'\n', &mut self.buf)? == 0 {
                return Ok(None);
            }
            self.stats.lines_read += 1;
            let parsed = std::str::from_utf8(&self.buf)
                .ok()
                .and_then(|line| parse_tweet(line.trim_end_matches(['\n', '\r'])).ok());
            let Some(tweet) = parsed else {
                self.stats.skipped_malformed += 1;
                continue;
            };
            self.stats.parsed_ok += 1;
            if let Some(filter) = &self.filter {
                if !matches_keywords(&tweet, filter) {
                    self.stats.filtered_out += 1;
                    continue;
                }
            }
            return Ok(Some(tweet));
        }
    }
}

impl<R: BufRead> Iterator for CorpusReader<R> {
    type Item = io::Result<RawTweet>;

    fn next(&mut self) -> Option<Self::Item> {
        self.next_tweet().transpose()
    }
}

/// Opens `path` and returns a reader over its tweets.
pub fn stream_corpus(
    path: &Path,
    compression: Compression,
) -> Result<CorpusReader<Box<dyn BufRead + Send>>> {
    Ok(CorpusReader::new(open_source(path, compression)?))
}

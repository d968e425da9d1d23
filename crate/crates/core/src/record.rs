//! The shareable per-tweet output record.
//!
//! Records are written as newline-delimited JSON, schema version
//! [`SCHEMA_VERSION`]. Field order is fixed; absent slots and empty lists are
//! omitted. Ids are decimal strings so 64-bit values survive JSON consumers
//! that parse numbers as doubles.
//!
//! ```json
//! {"tweet_id":"1223","user_id":"42","created_at":"2020-02-01T10:00:00Z",
//!  "geo":{"country_code":"fr","country":"france","city":"paris","lat":48.8566,"lon":2.3522},
//!  "user_location":{"country_code":"gb","city":"london"},
//!  "mentioned_toponyms":[{"phrase":"paris","country_code":"fr"}]}
//! ```
//!
//! When several slots are present, consumers should trust them in the order
//! of [`Source::PRIORITY`]: device GPS first, then the place tag, then the
//! profile location, then locations mentioned in the text.

use std::io::{self, BufRead, Write};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::place::ResolvedPlace;

pub const SCHEMA_VERSION: u32 = 1;

/// The four evidence sources of a record.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    Geo,
    Place,
    UserLocation,
    TweetLocations,
}

impl Source {
    /// Most trusted first.
    pub const PRIORITY: [Source; 4] = [
        Source::Geo,
        Source::Place,
        Source::UserLocation,
        Source::TweetLocations,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Source::Geo => "geo",
            Source::Place => "place",
            Source::UserLocation => "user_location",
            Source::TweetLocations => "tweet_locations",
        }
    }

    pub fn parse(s: &str) -> Option<Source> {
        Source::PRIORITY.into_iter().find(|src| src.as_str() == s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MentionedToponym {
    pub phrase: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub country_code: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeoRecord {
    #[serde(with = "id_string")]
    pub tweet_id: u64,
    #[serde(with = "id_string")]
    pub user_id: u64,
    #[serde(with = "utc_seconds")]
    pub created_at: DateTime<Utc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub geo: Option<ResolvedPlace>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub place: Option<ResolvedPlace>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub user_location: Option<ResolvedPlace>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tweet_locations: Option<ResolvedPlace>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub mentioned_toponyms: Vec<MentionedToponym>,
    /// Only filled when voting is disabled.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub user_location_candidates: Vec<ResolvedPlace>,
    /// Only filled when voting is disabled.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub tweet_location_candidates: Vec<ResolvedPlace>,
}

impl GeoRecord {
    pub fn empty(tweet_id: u64, user_id: u64, created_at: DateTime<Utc>) -> Self {
        GeoRecord {
            tweet_id,
            user_id,
            created_at,
            geo: None,
            place: None,
            user_location: None,
            tweet_locations: None,
            mentioned_toponyms: Vec::new(),
            user_location_candidates: Vec::new(),
            tweet_location_candidates: Vec::new(),
        }
    }

    pub fn slot(&self, source: Source) -> Option<&ResolvedPlace> {
        match source {
            Source::Geo => self.geo.as_ref(),
            Source::Place => self.place.as_ref(),
            Source::UserLocation => self.user_location.as_ref(),
            Source::TweetLocations => self.tweet_locations.as_ref(),
        }
    }

    /// First present slot in `order`.
    pub fn best_slot(&self, order: &[Source]) -> Option<(Source, &ResolvedPlace)> {
        order
            .iter()
            .find_map(|&s| self.slot(s).map(|p| (s, p)))
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("record serialization is infallible")
    }
}

/// Writes one record per line. Returns the number of records written.
pub fn write_records<'a, W, I>(records: I, mut sink: W) -> io::Result<u64>
where
    W: Write,
    I: IntoIterator<Item = &'a GeoRecord>,
{
    let mut n = 0;
    for record in records {
        serde_json::to_writer(&mut sink, record)?;
        sink.write_all(b"\n")?;
        n += 1;
    }
    sink.flush()?;
    Ok(n)
}

/// Reads records back; blank lines are skipped.
pub fn read_records<R: BufRead>(reader: R) -> impl Iterator<Item = io::Result<GeoRecord>> {
    reader.lines().filter_map(|line| match line {
        Ok(l) if l.trim().is_empty() => None,
        Ok(l) => Some(serde_json::from_str(&l).map_err(io::Error::from)),
        Err(e) => Some(Err(e)),
    })
}

mod id_string {
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(id: &u64, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(id)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<u64, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Id<'a> {
            Num(u64),
            Str(&'a str),
        }
        match Id::deserialize(d)? {
            Id::Num(n) => Ok(n),
            Id::Str(s) => s.parse().map_err(de::Error::custom),
        }
    }
}

mod utc_seconds {
    use chrono::{DateTime, Utc};
    use serde::{de, Deserialize, Deserializer, Serializer};

    const FORMAT: &str = "%Y-%m-%dT%H:%M:%SZ";

    pub fn serialize<S: Serializer>(t: &DateTime<Utc>, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(&t.format(FORMAT))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<DateTime<Utc>, D::Error> {
        let raw = <std::borrow::Cow<'de, str>>::deserialize(d)?;
        DateTime::parse_from_rfc3339(&raw)
            .map(|t| t.with_timezone(&Utc))
            .map_err(de::Error::custom)
    }
}

//! Fusion of the four per-tweet location sources into a [`GeoRecord`].
//!
//! * GPS coordinates are reverse geocoded.
//! * The place tag's full name is forward geocoded, falling back to the
//!   tag's country code when the search finds nothing.
//! * Profile location and tweet text go through toponym extraction; each
//!   distinct surviving phrase is searched once and the results are reduced
//!   to one place by a country majority vote ([`majority_vote`]).
//!
//! Slots are computed independently and a failure in one never affects the
//! others.

use std::collections::{BTreeMap, HashSet};
use std::io::{BufRead, Write};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geocode::{ClientCounters, GeocodeClient, GeocodeError};
use crate::ingest::{CorpusReader, IngestStats, RawTweet};
use crate::place::ResolvedPlace;
use crate::record::{GeoRecord, MentionedToponym, SCHEMA_VERSION};
use crate::toponym::ToponymExtractor;

/// One distinct extracted phrase and its search results, best first.
#[derive(Debug, Clone, PartialEq)]
pub struct VoteCandidate {
    pub phrase: String,
    /// Token position of the phrase's first occurrence.
    pub position: usize,
    pub results: Arc<[ResolvedPlace]>,
}

fn importance(p: &ResolvedPlace) -> f64 {
    p.importance.unwrap_or(f64::NEG_INFINITY)
}

/// True when `a` beats `b`: higher importance, then earlier position.
fn outranks(a: &VoteCandidate, b: &VoteCandidate) -> bool {
    let (ia, ib) = (importance(&a.results[0]), importance(&b.results[0]));
    ia > ib || (ia == ib && a.position < b.position)
}

/// Reduces resolved phrases to one place by the country of each phrase's top
/// result.
///
/// The country with the most phrases wins. Ties between countries go to the
/// country whose best candidate has the higher importance, then the earlier
/// position. Within the winning country the top result with the highest
/// importance (then earliest position) is returned. Phrases without results
/// do not vote; if no top result has a country code the best candidate
/// overall is returned.
pub fn majority_vote(candidates: &[VoteCandidate]) -> Option<ResolvedPlace> {
    let voters: Vec<&VoteCandidate> = candidates.iter().filter(|c| !c.results.is_empty()).collect();

    // country -> (votes, best candidate)
    let mut tally: BTreeMap<&str, (usize, &VoteCandidate)> = BTreeMap::new();
    for &c in &voters {
        let Some(cc) = c.results[0].country_code.as_deref() else { continue };
        tally
            .entry(cc)
            .and_modify(|(votes, best)| {
                *votes += 1;
                if outranks(c, best) {
                    *best = c;
                }
            })
            .or_insert((1, c));
    }

    let winner = tally
        .values()
        .copied()
        .reduce(|acc, cur| {
            if cur.0 > acc.0 || (cur.0 == acc.0 && outranks(cur.1, acc.1)) {
                cur
            } else {
                acc
            }
        })
        .map(|(_, best)| best)
        .or_else(|| {
            voters
                .iter()
                .copied()
                .reduce(|acc, cur| if outranks(cur, acc) { cur } else { acc })
        })?;
    Some(winner.results[0].clone())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum VoteMode {
    /// Fill the text slots with the majority-vote winner.
    #[default]
    Majority,
    /// Leave the text slots empty and list every resolved candidate instead.
    AllCandidates,
}

/// Outcome of resolving one free-text field.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TextResolution {
    pub place: Option<ResolvedPlace>,
    pub candidates: Vec<VoteCandidate>,
    pub mentions: Vec<MentionedToponym>,
}

#[derive(Debug, Default)]
struct SourceCounters {
    present: AtomicU64,
    resolved: AtomicU64,
    not_found: AtomicU64,
    failures: AtomicU64,
}

impl SourceCounters {
    fn snapshot(&self) -> SourceCounts {
        SourceCounts {
            present: self.present.load(Ordering::Relaxed),
            resolved: self.resolved.load(Ordering::Relaxed),
            not_found: self.not_found.load(Ordering::Relaxed),
            failures: self.failures.load(Ordering::Relaxed),
        }
    }
}

/// Per-source counts. `present` counts tweets carrying the source at all.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct SourceCounts {
    pub present: u64,
    pub resolved: u64,
    pub not_found: u64,
    /// Geocoder failures (requests that never produced an answer).
    pub failures: u64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct ResolveCounts {
    pub tweets: u64,
    pub geo: SourceCounts,
    pub place: SourceCounts,
    pub user_location: SourceCounts,
    pub tweet_locations: SourceCounts,
}

pub struct Resolver {
    client: Arc<GeocodeClient>,
    extractor: ToponymExtractor,
    vote: VoteMode,
    tweets: AtomicU64,
    geo: SourceCounters,
    place: SourceCounters,
    user_location: SourceCounters,
    tweet_locations: SourceCounters,
}

impl Resolver {
    pub fn new(client: Arc<GeocodeClient>, extractor: ToponymExtractor) -> Self {
        Resolver {
            client,
            extractor,
            vote: VoteMode::default(),
            tweets: AtomicU64::new(0),
            geo: SourceCounters::default(),
            place: SourceCounters::default(),
            user_location: SourceCounters::default(),
            tweet_locations: SourceCounters::default(),
        }
    }

    pub fn with_vote_mode(mut self, vote: VoteMode) -> Self {
        self.vote = vote;
        self
    }

    pub fn client(&self) -> &GeocodeClient {
        &self.client
    }

    pub fn counts(&self) -> ResolveCounts {
        ResolveCounts {
            tweets: self.tweets.load(Ordering::Relaxed),
            geo: self.geo.snapshot(),
            place: self.place.snapshot(),
            user_location: self.user_location.snapshot(),
            tweet_locations: self.tweet_locations.snapshot(),
        }
    }

    /// Reverse geocodes the tweet's GPS point. The tweet's own coordinates
    /// are kept in the result.
    pub fn resolve_gps(&self, tweet: &RawTweet) -> Option<ResolvedPlace> {
        let coords = tweet.coordinates?;
        self.geo.present.fetch_add(1, Ordering::Relaxed);
        match self.client.reverse(coords.lat, coords.lon) {
            Ok(Some(place)) => {
                self.geo.resolved.fetch_add(1, Ordering::Relaxed);
                let mut place = place.administrative();
                place.set_coordinates(Some(coords));
                Some(place)
            }
            Ok(None) => {
                self.geo.not_found.fetch_add(1, Ordering::Relaxed);
                None
            }
            Err(_) => {
                self.geo.failures.fetch_add(1, Ordering::Relaxed);
                None
            }
        }
    }

    /// Top search result for the place tag's full name.
    pub fn resolve_place_field(&self, tweet: &RawTweet) -> Option<ResolvedPlace> {
        let name = tweet.place_full_name.as_deref()?;
        self.place.present.fetch_add(1, Ordering::Relaxed);
        match self.client.search(name) {
            Ok(results) => {
                let place = match results.first() {
                    Some(top) => Some(top.administrative()),
                    None => tweet
                        .place_country_code
                        .as_deref()
                        .map(ResolvedPlace::country_only),
                };
                let counter = if place.is_some() {
                    &self.place.resolved
                } else {
                    &self.place.not_found
                };
                counter.fetch_add(1, Ordering::Relaxed);
                place
            }
            Err(_) => {
                self.place.failures.fetch_add(1, Ordering::Relaxed);
                None
            }
        }
    }

    /// Extracts toponyms from `text`, searches each distinct phrase once, and
    /// votes.
    pub fn resolve_text_source(&self, text: &str) -> TextResolution {
        let (resolution, _) = self.resolve_text(text);
        resolution
    }

    /// Also returns how many searches failed.
    fn resolve_text(&self, text: &str) -> (TextResolution, u64) {
        let mut seen = HashSet::new();
        let mut candidates = Vec::new();
        let mut failures = 0;
        for toponym in self.extractor.extract(text) {
            if !seen.insert(toponym.phrase.clone()) {
                continue;
            }
            match self.client.search(&toponym.phrase) {
                Ok(results) if !results.is_empty() => candidates.push(VoteCandidate {
                    phrase: toponym.phrase,
                    position: toponym.position,
                    results,
                }),
                Ok(_) => {}
                Err(GeocodeError::InvalidRequest(_)) => {}
                Err(GeocodeError::Failed { .. }) => failures += 1,
            }
        }
        let mentions = candidates
            .iter()
            .map(|c| MentionedToponym {
                phrase: c.phrase.clone(),
                country_code: c.results[0].country_code.clone(),
            })
            .collect();
        let place = majority_vote(&candidates).map(|p| p.administrative());
        (
            TextResolution {
                place,
                candidates,
                mentions,
            },
            failures,
        )
    }

    fn text_slot(
        &self,
        text: Option<&str>,
        counters: &SourceCounters,
    ) -> (Option<ResolvedPlace>, Vec<ResolvedPlace>, Vec<MentionedToponym>) {
        let Some(text) = text else {
            return Default::default();
        };
        counters.present.fetch_add(1, Ordering::Relaxed);
        let (resolution, failures) = self.resolve_text(text);
        counters.failures.fetch_add(failures, Ordering::Relaxed);
        let counter = if resolution.place.is_some() {
            &counters.resolved
        } else {
            &counters.not_found
        };
        counter.fetch_add(1, Ordering::Relaxed);
        match self.vote {
            VoteMode::Majority => (resolution.place, Vec::new(), resolution.mentions),
            VoteMode::AllCandidates => (
                None,
                resolution
                    .candidates
                    .iter()
                    .map(|c| c.results[0].administrative())
                    .collect(),
                resolution.mentions,
            ),
        }
    }

    /// Resolves all four sources. Never fails; empty slots are omitted.
    pub fn resolve_tweet(&self, tweet: &RawTweet) -> GeoRecord {
        self.tweets.fetch_add(1, Ordering::Relaxed);
        let mut record = GeoRecord::empty(tweet.tweet_id, tweet.user_id, tweet.created_at);
        record.geo = self.resolve_gps(tweet);
        record.place = self.resolve_place_field(tweet);
        let (user_location, user_candidates, _) =
            self.text_slot(tweet.user_location.as_deref(), &self.user_location);
        record.user_location = user_location;
        record.user_location_candidates = user_candidates;
        let (tweet_locations, tweet_candidates, mentions) =
            self.text_slot(Some(tweet.text.as_str()), &self.tweet_locations);
        record.tweet_locations = tweet_locations;
        record.tweet_location_candidates = tweet_candidates;
        record.mentioned_toponyms = mentions;
        record
    }
}

/// Written next to the record file after a run.
#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub schema_version: u32,
    pub records_written: u64,
    pub ingest: IngestStats,
    pub resolve: ResolveCounts,
    pub geocoder: ClientCounters,
}

/// Tweets handed to the worker pool at a time.
const CHUNK: usize = 4096;

/// Streams tweets from `reader`, resolves them on `workers` threads, and
/// writes records to `sink` in input order.
pub fn run_pipeline<R: BufRead, W: Write>(
    reader: &mut CorpusReader<R>,
    resolver: &Resolver,
    workers: usize,
    mut sink: W,
) -> Result<RunSummary> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Config(format!("worker pool: {e}")))?;
    let mut written = 0u64;
    let mut chunk = Vec::with_capacity(CHUNK);
    let mut line = Vec::with_capacity(512);
    loop {
        chunk.clear();
        while chunk.len() < CHUNK {
            match reader.next_tweet()? {
                Some(t) => chunk.push(t),
                None => break,
            }
        }
        if chunk.is_empty() {
            break;
        }
        let records: Vec<GeoRecord> =
            pool.install(|| chunk.par_iter().map(|t| resolver.resolve_tweet(t)).collect());
        for record in &records {
            line.clear();
            serde_json::to_writer(&mut line, record)?;
            line.push(b'\n');
            sink.write_all(&line)?;
        }
        written += records.len() as u64;
    }
    sink.flush()?;
    Ok(RunSummary {
        schema_version: SCHEMA_VERSION,
        records_written: written,
        ingest: reader.stats(),
        resolve: resolver.counts(),
        geocoder: resolver.client().counters(),
    })
}

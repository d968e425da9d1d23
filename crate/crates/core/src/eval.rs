//! Accuracy of text-derived locations against GPS ground truth.
//!
//! The evaluation set is a seeded uniform sample of records that have all of
//! a GPS slot, a profile-location slot and a tweet-text slot. The GPS slot
//! (reverse geocoded through the same address mapping) is the truth; each
//! text-derived slot is compared with it at four granularity levels by strict
//! equality of normalized names (country compares codes). A slot missing on
//! either side is a miss.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::place::{Level, ResolvedPlace};
use crate::record::GeoRecord;

pub const CSV_HEADER: &str = "source,level,matches,samples,accuracy";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EvalSource {
    UserLocation,
    TweetContent,
}

impl EvalSource {
    pub const ALL: [EvalSource; 2] = [EvalSource::UserLocation, EvalSource::TweetContent];

    pub fn as_str(self) -> &'static str {
        match self {
            EvalSource::UserLocation => "user_location",
            EvalSource::TweetContent => "tweet_content",
        }
    }

    fn label(self) -> &'static str {
        match self {
            EvalSource::UserLocation => "User location",
            EvalSource::TweetContent => "Tweet content",
        }
    }

    pub fn derived(self, record: &GeoRecord) -> Option<&ResolvedPlace> {
        match self {
            EvalSource::UserLocation => record.user_location.as_ref(),
            EvalSource::TweetContent => record.tweet_locations.as_ref(),
        }
    }
}

/// Whether a record can be part of the evaluation set.
pub fn qualifies(record: &GeoRecord) -> bool {
    record.geo.is_some() && record.user_location.is_some() && record.tweet_locations.is_some()
}

pub fn match_at_level(derived: &ResolvedPlace, truth: &ResolvedPlace, level: Level) -> bool {
    match (derived.slot(level), truth.slot(level)) {
        (Some(d), Some(t)) => d == t,
        _ => false,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalSample {
    /// Sampled records, in input order.
    pub records: Vec<GeoRecord>,
    /// Qualifying records seen in the input.
    pub qualifying: u64,
}

/// Seeded uniform sample (reservoir) of `n` qualifying records. When fewer
/// than `n` qualify, all of them are returned and a warning is logged.
pub fn sample_eval_set<I>(records: I, n: usize, seed: u64) -> Result<EvalSample>
where
    I: IntoIterator<Item = GeoRecord>,
{
    if n == 0 {
        return Err(Error::Config("evaluation sample size must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut reservoir: Vec<(u64, GeoRecord)> = Vec::with_capacity(n.min(1 << 16));
    let mut seen = 0u64;
    for record in records.into_iter().filter(qualifies) {
        if reservoir.len() < n {
            reservoir.push((seen, record));
        } else {
            let j = rng.random_range(0..=seen);
            if (j as usize) < n {
                reservoir[j as usize] = (seen, record);
            }
        }
        seen += 1;
    }
    if (seen as usize) < n {
        tracing::warn!(requested = n, available = seen, "fewer qualifying tweets than requested");
    }
    reservoir.sort_by_key(|(i, _)| *i);
    Ok(EvalSample {
        records: reservoir.into_iter().map(|(_, r)| r).collect(),
        qualifying: seen,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalCell {
    pub source: EvalSource,
    pub level: Level,
    pub matches: u64,
    pub samples: u64,
    pub accuracy: f64,
}

/// One cell per source × level, sources in [`EvalSource::ALL`] order and
/// levels coarsest first.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub cells: Vec<EvalCell>,
}

impl EvalReport {
    /// Scores already-sampled records. Records that do not qualify are
    /// ignored.
    pub fn score(records: &[GeoRecord]) -> Result<Self> {
        let scored: Vec<&GeoRecord> = records.iter().filter(|r| qualifies(r)).collect();
        if scored.is_empty() {
            return Err(Error::EmptyEvalSet);
        }
        let samples = scored.len() as u64;
        let mut cells = Vec::with_capacity(8);
        for source in EvalSource::ALL {
            for level in Level::ALL {
                let matches = scored
                    .iter()
                    .filter(|r| {
                        let truth = r.geo.as_ref().expect("qualifying");
                        let derived = source.derived(r).expect("qualifying");
                        match_at_level(derived, truth, level)
                    })
                    .count() as u64;
                cells.push(EvalCell {
                    source,
                    level,
                    matches,
                    samples,
                    accuracy: matches as f64 / samples as f64,
                });
            }
        }
        Ok(EvalReport { cells })
    }

    pub fn cell(&self, source: EvalSource, level: Level) -> Option<&EvalCell> {
        self.cells
            .iter()
            .find(|c| c.source == source && c.level == level)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for c in &self.cells {
            let _ = writeln!(
                out,
                "{},{},{},{},{:.4}",
                c.source.as_str(),
                c.level,
                c.matches,
                c.samples,
                c.accuracy
            );
        }
        out
    }

    /// Sources as rows, levels as columns.
    pub fn to_table(&self) -> String {
        let mut out = format!(
            "{:<15}{:>9}{:>9}{:>9}{:>9}\n",
            "Tweet field", "Country", "State", "County", "City"
        );
        for source in EvalSource::ALL {
            let _ = write!(out, "{:<15}", source.label());
            for level in Level::ALL {
                let acc = self.cell(source, level).map_or(f64::NAN, |c| c.accuracy);
                let _ = write!(out, "{acc:>9.2}");
            }
            out.push('\n');
        }
        if let Some(c) = self.cells.first() {
            let _ = writeln!(out, "(n = {})", c.samples);
        }
        out
    }
}

/// Samples and scores in one step.
pub fn evaluate<I>(records: I, n: usize, seed: u64) -> Result<EvalReport>
where
    I: IntoIterator<Item = GeoRecord>,
{
    let sample = sample_eval_set(records, n, seed)?;
    EvalReport::score(&sample.records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::{TimeZone, Utc};

    fn place(cc: &str, state: &str, city: &str) -> ResolvedPlace {
        ResolvedPlace {
            country_code: Some(cc.into()),
            state: (!state.is_empty()).then(|| state.into()),
            city: (!city.is_empty()).then(|| city.into()),
            ..Default::default()
        }
    }

    fn record(id: u64, truth: ResolvedPlace, user: ResolvedPlace, text: ResolvedPlace) -> GeoRecord {
        let mut r = GeoRecord::empty(id, 1, Utc.with_ymd_and_hms(2020, 3, 1, 0, 0, 0).unwrap());
        r.geo = Some(truth);
        r.user_location = Some(user);
        r.tweet_locations = Some(text);
        r
    }

    #[test]
    fn level_matching() {
        let fr = place("fr", "", "");
        assert!(match_at_level(&fr, &fr, Level::Country));
        let ny = place("us", "new york", "new york");
        let nyc = place("us", "new york", "new york city");
        assert!(!match_at_level(&ny, &nyc, Level::City));
        assert!(match_at_level(&ny, &nyc, Level::State));
        let tx = place("us", "texas", "");
        assert!(!match_at_level(&place("us", "", ""), &tx, Level::State));
        assert!(!match_at_level(&fr, &fr, Level::County));
    }

    #[test]
    fn perfect_agreement_scores_one() {
        let p = place("gb", "england", "london");
        let recs: Vec<_> = (1..=3).map(|i| record(i, p.clone(), p.clone(), p.clone())).collect();
        let report = evaluate(recs, 10, 1).unwrap();
        for c in &report.cells {
            if c.level == Level::County {
                // No county slot on either side.
                assert_eq!(c.accuracy, 0.0);
            } else {
                assert_eq!(c.accuracy, 1.0);
            }
            assert_eq!(c.samples, 3);
        }
    }

    #[test]
    fn half_country_matches() {
        let t = place("us", "texas", "austin");
        let recs = vec![
            record(1, t.clone(), place("us", "", ""), t.clone()),
            record(2, t.clone(), place("fr", "", ""), t.clone()),
            record(3, t.clone(), place("us", "", ""), t.clone()),
            record(4, t.clone(), place("gb", "", ""), t.clone()),
        ];
        let report = EvalReport::score(&recs).unwrap();
        let cell = report.cell(EvalSource::UserLocation, Level::Country).unwrap();
        assert_eq!((cell.matches, cell.samples, cell.accuracy), (2, 4, 0.5));
    }

    #[test]
    fn sampling_is_seeded() {
        let p = place("gb", "", "london");
        let recs: Vec<_> = (1..=50).map(|i| record(i, p.clone(), p.clone(), p.clone())).collect();
        let a = sample_eval_set(recs.clone(), 10, 7).unwrap();
        let b = sample_eval_set(recs.clone(), 10, 7).unwrap();
        let c = sample_eval_set(recs.clone(), 10, 8).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.records.len(), 10);
        assert_ne!(a, c);
        let ids: Vec<u64> = a.records.iter().map(|r| r.tweet_id).collect();
        assert!(ids.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn short_corpus_returns_everything() {
        let p = place("gb", "", "london");
        let recs: Vec<_> = (1..=3).map(|i| record(i, p.clone(), p.clone(), p.clone())).collect();
        let s = sample_eval_set(recs, 5, 0).unwrap();
        assert_eq!(s.records.len(), 3);
        assert_eq!(s.qualifying, 3);
    }

    #[test]
    fn errors() {
        assert!(matches!(sample_eval_set(Vec::new(), 0, 0), Err(Error::Config(_))));
        assert!(matches!(evaluate(Vec::new(), 5, 0), Err(Error::EmptyEvalSet)));
    }

    #[test]
    fn csv_layout() {
        let p = place("gb", "england", "london");
        let report = EvalReport::score(&[record(1, p.clone(), p.clone(), p)]).unwrap();
        let csv = report.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some(CSV_HEADER));
        assert_eq!(lines.next(), Some("user_location,country,1,1,1.0000"));
        assert_eq!(csv.lines().count(), 9);
        assert!(report.to_table().contains("User location"));
    }
}

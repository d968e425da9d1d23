//! Dataset description reports.
//!
//! [`CorpusSummary`] is built in one pass over (tweet, record) pairs and is
//! mergeable: summaries of disjoint shards merged together equal the summary
//! of the whole. Memory grows with the number of distinct users, dates and
//! keys, not with the number of tweets.
//!
//! Country and city volumes are attributed from each record's first present
//! slot in the configured source order (default [`Source::PRIORITY`]). Dates
//! are UTC calendar days. Tweets without a language tag are counted under
//! `und`.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ingest::RawTweet;
use crate::place::ResolvedPlace;
use crate::record::{GeoRecord, Source};

pub const UNDETERMINED_LANGUAGE: &str = "und";
pub const DEFAULT_COUNTRY_THRESHOLDS: [u64; 4] = [10_000_000, 1_000_000, 500_000, 100_000];
pub const DEFAULT_CITY_THRESHOLDS: [u64; 4] = [1_000_000, 500_000, 100_000, 50_000];

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
struct UserFlags {
    geo: bool,
    place: bool,
    location: bool,
    verified: bool,
}

impl UserFlags {
    fn merge(&mut self, o: UserFlags) {
        self.geo |= o.geo;
        self.place |= o.place;
        self.location |= o.location;
        self.verified |= o.verified;
    }
}

/// Tweets carrying each kind of location evidence, counted on the resolved
/// record slots.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct SourceTotals {
    pub geo: u64,
    pub place: u64,
    pub user_location: u64,
    pub tweet_locations: u64,
}

impl SourceTotals {
    fn merge(&mut self, o: &SourceTotals) {
        self.geo += o.geo;
        self.place += o.place;
        self.user_location += o.user_location;
        self.tweet_locations += o.tweet_locations;
    }

    pub fn get(&self, source: Source) -> u64 {
        match source {
            Source::Geo => self.geo,
            Source::Place => self.place,
            Source::UserLocation => self.user_location,
            Source::TweetLocations => self.tweet_locations,
        }
    }
}

/// User counters, each with its verified-user analogue.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct UserStats {
    pub unique_users: u64,
    pub users_with_geo: u64,
    pub users_with_place: u64,
    pub users_with_location_value: u64,
    pub verified_users: u64,
    pub verified_with_geo: u64,
    pub verified_with_place: u64,
    pub verified_with_location_value: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SeriesKey {
    Country,
    City,
    Language,
}

impl SeriesKey {
    pub fn as_str(self) -> &'static str {
        match self {
            SeriesKey::Country => "country",
            SeriesKey::City => "city",
            SeriesKey::Language => "language",
        }
    }

    pub fn parse(s: &str) -> Option<SeriesKey> {
        match s {
            "country" => Some(SeriesKey::Country),
            "city" => Some(SeriesKey::City),
            "language" => Some(SeriesKey::Language),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusSummary {
    attribution: Vec<Source>,
    pub total_tweets: u64,
    pub daily_counts: BTreeMap<NaiveDate, u64>,
    pub language_counts: BTreeMap<String, u64>,
    /// Keyed by country code (country name when no code is known).
    pub country_counts: BTreeMap<String, u64>,
    /// Keyed by `"<city>, <country code>"`.
    pub city_counts: BTreeMap<String, u64>,
    pub sources: SourceTotals,
    daily_country: BTreeMap<(NaiveDate, String), u64>,
    daily_city: BTreeMap<(NaiveDate, String), u64>,
    daily_language: BTreeMap<(NaiveDate, String), u64>,
    users: HashMap<u64, UserFlags>,
}

impl Default for CorpusSummary {
    fn default() -> Self {
        Self::new(Source::PRIORITY.to_vec())
    }
}

fn bump<K: Ord>(map: &mut BTreeMap<K, u64>, key: K, by: u64) {
    *map.entry(key).or_insert(0) += by;
}

fn merge_counts<K: Ord + Clone>(into: &mut BTreeMap<K, u64>, from: &BTreeMap<K, u64>) {
    for (k, v) in from {
        bump(into, k.clone(), *v);
    }
}

pub fn country_key(place: &ResolvedPlace) -> Option<String> {
    place.country_code.clone().or_else(|| place.country.clone())
}

pub fn city_key(place: &ResolvedPlace) -> Option<String> {
    let city = place.city.as_deref()?;
    Some(match place.country_code.as_deref().or(place.country.as_deref()) {
        Some(cc) => format!("{city}, {cc}"),
        None => city.to_owned(),
    })
}

impl CorpusSummary {
    /// `attribution` is the source order for country/city volumes.
    pub fn new(attribution: Vec<Source>) -> Self {
        CorpusSummary {
            attribution,
            total_tweets: 0,
            daily_counts: BTreeMap::new(),
            language_counts: BTreeMap::new(),
            country_counts: BTreeMap::new(),
            city_counts: BTreeMap::new(),
            sources: SourceTotals::default(),
            daily_country: BTreeMap::new(),
            daily_city: BTreeMap::new(),
            daily_language: BTreeMap::new(),
            users: HashMap::new(),
        }
    }

    pub fn attribution(&self) -> &[Source] {
        &self.attribution
    }

    /// Adds one tweet. `record` is its resolved record, if any.
    pub fn add(&mut self, tweet: &RawTweet, record: Option<&GeoRecord>) {
        let day = tweet.created_at.date_naive();
        self.total_tweets += 1;
        bump(&mut self.daily_counts, day, 1);

        let lang = tweet
            .language
            .as_deref()
            .filter(|l| !l.is_empty())
            .unwrap_or(UNDETERMINED_LANGUAGE)
            .to_owned();
        bump(&mut self.daily_language, (day, lang.clone()), 1);
        bump(&mut self.language_counts, lang, 1);

        let mut flags = UserFlags {
            geo: tweet.coordinates.is_some(),
            place: tweet.place_full_name.is_some() || tweet.place_country_code.is_some(),
            location: false,
            verified: tweet.user_verified,
        };

        if let Some(rec) = record {
            flags.location = rec.user_location.is_some();
            self.sources.geo += rec.geo.is_some() as u64;
            self.sources.place += rec.place.is_some() as u64;
            self.sources.user_location += rec.user_location.is_some() as u64;
            self.sources.tweet_locations += rec.tweet_locations.is_some() as u64;

            if let Some((_, place)) = rec.best_slot(&self.attribution) {
                if let Some(k) = country_key(place) {
                    bump(&mut self.daily_country, (day, k.clone()), 1);
                    bump(&mut self.country_counts, k, 1);
                }
                if let Some(k) = city_key(place) {
                    bump(&mut self.daily_city, (day, k.clone()), 1);
                    bump(&mut self.city_counts, k, 1);
                }
            }
        }

        self.users.entry(tweet.user_id).or_default().merge(flags);
    }

    /// Folds a summary of a disjoint shard into this one.
    pub fn merge(&mut self, other: &CorpusSummary) {
        self.total_tweets += other.total_tweets;
        merge_counts(&mut self.daily_counts, &other.daily_counts);
        merge_counts(&mut self.language_counts, &other.language_counts);
        merge_counts(&mut self.country_counts, &other.country_counts);
        merge_counts(&mut self.city_counts, &other.city_counts);
        merge_counts(&mut self.daily_country, &other.daily_country);
        merge_counts(&mut self.daily_city, &other.daily_city);
        merge_counts(&mut self.daily_language, &other.daily_language);
        self.sources.merge(&other.sources);
        for (id, f) in &other.users {
            self.users.entry(*id).or_default().merge(*f);
        }
    }

    pub fn user_stats(&self) -> UserStats {
        let mut s = UserStats::default();
        for f in self.users.values() {
            s.unique_users += 1;
            s.users_with_geo += f.geo as u64;
            s.users_with_place += f.place as u64;
            s.users_with_location_value += f.location as u64;
            if f.verified {
                s.verified_users += 1;
                s.verified_with_geo += f.geo as u64;
                s.verified_with_place += f.place as u64;
                s.verified_with_location_value += f.location as u64;
            }
        }
        s
    }

    fn totals(&self, key: SeriesKey) -> &BTreeMap<String, u64> {
        match key {
            SeriesKey::Country => &self.country_counts,
            SeriesKey::City => &self.city_counts,
            SeriesKey::Language => &self.language_counts,
        }
    }

    fn daily(&self, key: SeriesKey) -> &BTreeMap<(NaiveDate, String), u64> {
        match key {
            SeriesKey::Country => &self.daily_country,
            SeriesKey::City => &self.daily_city,
            SeriesKey::Language => &self.daily_language,
        }
    }
}

pub fn summarize<'a, I>(pairs: I, attribution: Vec<Source>) -> CorpusSummary
where
    I: IntoIterator<Item = (&'a RawTweet, Option<&'a GeoRecord>)>,
{
    let mut s = CorpusSummary::new(attribution);
    for (tweet, record) in pairs {
        s.add(tweet, record);
    }
    s
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct BucketRow {
    pub threshold: u64,
    pub entities: u64,
}

impl BucketRow {
    pub fn label(&self) -> String {
        format!(">{}", human_count(self.threshold))
    }
}

/// `10_000_000` → `10M`, `500_000` → `500K`; other values verbatim.
pub fn human_count(n: u64) -> String {
    if n >= 1_000_000 && n.is_multiple_of(1_000_000) {
        format!("{}M", n / 1_000_000)
    } else if n >= 1_000 && n.is_multiple_of(1_000) {
        format!("{}K", n / 1_000)
    } else {
        n.to_string()
    }
}

/// For each threshold, the number of entities whose count is strictly
/// greater. Rows are cumulative: an entity appears in every row whose
/// threshold it exceeds.
pub fn bucket_table(counts: &BTreeMap<String, u64>, thresholds: &[u64]) -> Result<Vec<BucketRow>> {
    if thresholds.windows(2).any(|w| w[0] <= w[1]) {
        return Err(Error::Config(format!(
            "bucket thresholds must be strictly descending, got {thresholds:?}"
        )));
    }
    Ok(thresholds
        .iter()
        .map(|&t| BucketRow {
            threshold: t,
            entities: counts.values().filter(|&&c| c > t).count() as u64,
        })
        .collect())
}

/// The `n` keys with the largest totals, largest first; ties by key.
pub fn top_keys(counts: &BTreeMap<String, u64>, n: usize) -> Vec<String> {
    let mut keys: Vec<(&String, u64)> = counts.iter().map(|(k, v)| (k, *v)).collect();
    keys.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    keys.into_iter().take(n).map(|(k, _)| k.clone()).collect()
}

/// Date × key daily counts for the top `n` keys, as CSV. Every corpus date
/// gets a row; missing cells are zero.
pub fn top_n_series(summary: &CorpusSummary, key: SeriesKey, n: usize) -> Result<String> {
    if n == 0 {
        return Err(Error::Config("top-n series needs n > 0".into()));
    }
    let keys = top_keys(summary.totals(key), n);
    let daily = summary.daily(key);
    let mut out = String::from("date");
    for k in &keys {
        out.push(',');
        out.push_str(&csv_field(k));
    }
    out.push('\n');
    for day in summary.daily_counts.keys() {
        let _ = write!(out, "{day}");
        for k in &keys {
            let v = daily.get(&(*day, k.clone())).copied().unwrap_or(0);
            let _ = write!(out, ",{v}");
        }
        out.push('\n');
    }
    Ok(out)
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_owned()
    }
}

fn ranked_csv(header: &str, counts: &BTreeMap<String, u64>) -> String {
    let mut out = format!("{header}\n");
    for k in top_keys(counts, counts.len()) {
        let _ = writeln!(out, "{},{}", csv_field(&k), counts[&k]);
    }
    out
}

fn bucket_csv(entity: &str, rows: &[BucketRow]) -> String {
    let mut out = format!("bucket,{entity}\n");
    for r in rows {
        let _ = writeln!(out, "{},{}", r.label(), r.entities);
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReportOptions {
    pub country_thresholds: Vec<u64>,
    pub city_thresholds: Vec<u64>,
    pub top_n: usize,
}

impl Default for ReportOptions {
    fn default() -> Self {
        ReportOptions {
            country_thresholds: DEFAULT_COUNTRY_THRESHOLDS.to_vec(),
            city_thresholds: DEFAULT_CITY_THRESHOLDS.to_vec(),
            top_n: 15,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Manifest {
    pub total_tweets: u64,
    pub attribution: Vec<Source>,
    pub files: Vec<String>,
}

/// Renders every report as `(file name, CSV contents)`.
pub fn render_reports(summary: &CorpusSummary, opts: &ReportOptions) -> Result<Vec<(String, String)>> {
    let mut files = Vec::new();

    let mut daily = String::from("date,tweets\n");
    for (d, c) in &summary.daily_counts {
        let _ = writeln!(daily, "{d},{c}");
    }
    files.push(("daily_volume.csv".to_owned(), daily));
    files.push(("languages.csv".to_owned(), ranked_csv("language,tweets", &summary.language_counts)));
    files.push(("countries.csv".to_owned(), ranked_csv("country,tweets", &summary.country_counts)));
    files.push(("cities.csv".to_owned(), ranked_csv("city,tweets", &summary.city_counts)));

    let s = &summary.sources;
    files.push((
        "sources.csv".to_owned(),
        format!(
            "source,tweets\ngeo,{}\nplace,{}\nuser_location,{}\ntweet_locations,{}\n",
            s.geo, s.place, s.user_location, s.tweet_locations
        ),
    ));
    files.push((
        "country_buckets.csv".to_owned(),
        bucket_csv("countries", &bucket_table(&summary.country_counts, &opts.country_thresholds)?),
    ));
    files.push((
        "city_buckets.csv".to_owned(),
        bucket_csv("cities", &bucket_table(&summary.city_counts, &opts.city_thresholds)?),
    ));

    let u = summary.user_stats();
    files.push((
        "users.csv".to_owned(),
        format!(
            "metric,all_users,verified_users\n\
             users,{},{}\n\
             with_geo,{},{}\n\
             with_place,{},{}\n\
             with_location_value,{},{}\n",
            u.unique_users,
            u.verified_users,
            u.users_with_geo,
            u.verified_with_geo,
            u.users_with_place,
            u.verified_with_place,
            u.users_with_location_value,
            u.verified_with_location_value,
        ),
    ));

    for key in [SeriesKey::Country, SeriesKey::City, SeriesKey::Language] {
        files.push((
            format!("top_{}_daily.csv", key.as_str()),
            top_n_series(summary, key, opts.top_n)?,
        ));
    }
    Ok(files)
}

/// Writes all reports and `manifest.json` into `dir`.
pub fn write_reports(summary: &CorpusSummary, opts: &ReportOptions, dir: &Path) -> Result<Manifest> {
    let files = render_reports(summary, opts)?;
    fs::create_dir_all(dir).map_err(|e| Error::write(dir, e))?;
    let mut names = Vec::with_capacity(files.len());
    for (name, body) in files {
        let path: PathBuf = dir.join(&name);
        fs::write(&path, body).map_err(|e| Error::write(&path, e))?;
        names.push(name);
    }
    let manifest = Manifest {
        total_tweets: summary.total_tweets,
        attribution: summary.attribution.clone(),
        files: names,
    };
    let path = dir.join("manifest.json");
    let mut body = serde_json::to_string_pretty(&manifest)?;
    body.push('\n');
    fs::write(&path, body).map_err(|e| Error::write(&path, e))?;
    Ok(manifest)
}

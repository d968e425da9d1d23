mod common;

use std::collections::BTreeSet;
use std::io::Cursor;
use std::sync::Arc;

use chrono::{TimeZone, Utc};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tweetgeo::ingest::{CorpusReader, RawTweet};
use tweetgeo::place::{Coordinates, ResolvedPlace};
use tweetgeo::record::{read_records, write_records, GeoRecord, MentionedToponym};
use tweetgeo::resolve::{majority_vote, run_pipeline, VoteCandidate, VoteMode};
use tweetgeo::toponym::{StopWords, ToponymExtractor};

fn tweet() -> RawTweet {
    RawTweet {
        tweet_id: 1,
        user_id: 2,
        created_at: Utc.with_ymd_and_hms(2020, 3, 1, 12, 0, 0).unwrap(),
        text: String::new(),
        user_location: None,
        place_full_name: None,
        place_country_code: None,
        coordinates: None,
        language: None,
        user_verified: false,
    }
}

#[test]
fn gps_examples() {
    let r = common::fixture_resolver();
    let mut t = tweet();
    assert_eq!(r.resolve_gps(&t), None);

    t.coordinates = Coordinates::new(48.8566, 2.3522);
    let p = r.resolve_gps(&t).unwrap();
    assert_eq!(p.country_code.as_deref(), Some("fr"));
    assert_eq!(p.city.as_deref(), Some("paris"));
    assert_eq!((p.lat, p.lon), (Some(48.8566), Some(2.3522)));

    t.coordinates = Coordinates::new(0.0, 0.0);
    assert_eq!(r.resolve_gps(&t), None);
    let geo = r.counts().geo;
    assert_eq!((geo.present, geo.resolved, geo.not_found), (2, 1, 1));
}

#[test]
fn place_field_examples() {
    let r = common::fixture_resolver();
    let mut t = tweet();
    assert_eq!(r.resolve_place_field(&t), None);

    t.place_full_name = Some("Manhattan, NY".into());
    let p = r.resolve_place_field(&t).unwrap();
    assert_eq!(p.country_code.as_deref(), Some("us"));
    assert_eq!(p.state.as_deref(), Some("new york"));
    assert_eq!(p.lat, None);

    t.place_full_name = Some("Neverland, Nowhere".into());
    t.place_country_code = Some("gb".into());
    assert_eq!(r.resolve_place_field(&t), Some(ResolvedPlace::country_only("gb")));
}

#[test]
fn text_source_examples() {
    let r = common::fixture_resolver();
    let london = r.resolve_text_source("London, UK").place.unwrap();
    assert_eq!(london.country_code.as_deref(), Some("gb"));
    assert_eq!(london.city.as_deref(), Some("london"));
    assert_eq!(london.importance, None);
    assert_eq!(r.resolve_text_source("").place, None);

    // "Mars" is whatever the gazetteer and the recorded service say it is.
    let mars = r.resolve_text_source("Mars").place;
    let top = r.client().search("mars").unwrap().first().map(ResolvedPlace::administrative);
    assert_eq!(mars, top);
}

#[test]
fn single_source_tweets() {
    let r = common::fixture_resolver();
    let mut t = tweet();
    t.text = "stay safe".into();
    t.coordinates = Coordinates::new(40.7128, -74.0060);
    let rec = r.resolve_tweet(&t);
    assert!(rec.geo.is_some());
    assert!(rec.place.is_none() && rec.user_location.is_none() && rec.tweet_locations.is_none());

    let mut t = tweet();
    t.text = "stay safe".into();
    t.user_location = Some("Madrid".into());
    let rec = r.resolve_tweet(&t);
    assert_eq!(rec.user_location.unwrap().country_code.as_deref(), Some("es"));
    assert!(rec.tweet_locations.is_none());

    let rec = r.resolve_tweet(&tweet());
    assert_eq!(rec, GeoRecord::empty(1, 2, tweet().created_at));
}

#[test]
fn all_candidates_mode_lists_instead_of_voting() {
    let extractor = ToponymExtractor::new(common::fixture_index(), Arc::new(StopWords::english()));
    let r = tweetgeo::resolve::Resolver::new(common::fixture_client(), extractor)
        .with_vote_mode(VoteMode::AllCandidates);
    let mut t = tweet();
    t.text = "Paris and Tokyo and Lagos".into();
    let rec = r.resolve_tweet(&t);
    assert!(rec.tweet_locations.is_none());
    let ccs: Vec<_> = rec
        .tweet_location_candidates
        .iter()
        .map(|p| p.country_code.clone().unwrap())
        .collect();
    assert_eq!(ccs, ["fr", "jp", "ng"]);
    assert_eq!(rec.mentioned_toponyms.len(), 3);
}

fn fixture_corpus() -> String {
    std::fs::read_to_string(common::fixtures().join("corpus.jsonl")).unwrap()
}

fn run(workers: usize) -> Vec<u8> {
    let resolver = common::fixture_resolver();
    let mut reader = CorpusReader::new(Cursor::new(fixture_corpus()));
    let mut out = Vec::new();
    run_pipeline(&mut reader, &resolver, workers, &mut out).unwrap();
    out
}

#[test]
fn pipeline_is_deterministic_and_matches_golden() {
    let golden = std::fs::read(common::fixtures().join("golden_records.jsonl")).unwrap();
    let one = run(1);
    assert_eq!(one, run(1));
    assert_eq!(one, run(4));
    assert!(one == golden, "pipeline output differs from golden_records.jsonl");
}

fn brute_force_country(cands: &[VoteCandidate]) -> Option<String> {
    let imp = |c: &VoteCandidate| c.results[0].importance.unwrap_or(f64::NEG_INFINITY);
    let countries: BTreeSet<&str> = cands
        .iter()
        .filter_map(|c| c.results[0].country_code.as_deref())
        .collect();
    let mut best: Option<(usize, f64, usize, &str)> = None;
    for cc in countries {
        let members: Vec<&VoteCandidate> = cands
            .iter()
            .filter(|c| c.results[0].country_code.as_deref() == Some(cc))
            .collect();
        let mut top = members[0];
        for m in &members {
            if imp(m) > imp(top) || (imp(m) == imp(top) && m.position < top.position) {
                top = m;
            }
        }
        let key = (members.len(), imp(top), top.position, cc);
        let better = match best {
            None => true,
            Some((n, i, p, _)) => key.0 > n || (key.0 == n && (key.1 > i || (key.1 == i && key.2 < p))),
        };
        if better {
            best = Some(key);
        }
    }
    best.map(|(_, _, _, cc)| cc.to_owned())
}

fn arb_candidates() -> impl Strategy<Value = Vec<VoteCandidate>> {
    let cand = (
        prop::sample::select(vec!["us", "fr", "gb", "in", "ng"]),
        prop::option::weighted(0.8, prop::sample::select(vec![0.1, 0.5, 0.7, 0.9])),
        0usize..6,
    );
    prop::collection::vec(cand, 1..=8).prop_map(|v| {
        v.into_iter()
            .enumerate()
            .map(|(i, (cc, importance, position))| VoteCandidate {
                phrase: format!("p{i}"),
                position,
                results: vec![ResolvedPlace {
                    country_code: Some(cc.to_owned()),
                    city: Some(format!("c{i}")),
                    importance,
                    ..Default::default()
                }]
                .into(),
            })
            .collect()
    })
}

proptest! {
    #[test]
    fn vote_matches_brute_force(cands in arb_candidates()) {
        let winner = majority_vote(&cands).unwrap();
        let cc = winner.country_code.clone().unwrap();
        let count = |c: &str| cands.iter().filter(|v| v.results[0].country_code.as_deref() == Some(c)).count();
        let max = cands.iter().map(|v| count(v.results[0].country_code.as_deref().unwrap())).max().unwrap();
        prop_assert_eq!(count(&cc), max);
        prop_assert_eq!(Some(cc), brute_force_country(&cands));
        prop_assert!(cands.iter().any(|c| c.results[0] == winner));
    }

    #[test]
    fn removing_a_source_changes_only_its_slot(line in 0usize..200, source in 0usize..4) {
        let resolver = common::fixture_resolver();
        let corpus = fixture_corpus();
        let original = tweetgeo::ingest::parse_tweet(corpus.lines().nth(line).unwrap()).unwrap();
        let mut cut = original.clone();
        match source {
            0 => cut.coordinates = None,
            1 => { cut.place_full_name = None; cut.place_country_code = None; }
            2 => cut.user_location = None,
            _ => cut.text = String::new(),
        }
        let a = resolver.resolve_tweet(&original);
        let b = resolver.resolve_tweet(&cut);
        if source != 0 { prop_assert_eq!(&a.geo, &b.geo); } else { prop_assert!(b.geo.is_none()); }
        if source != 1 { prop_assert_eq!(&a.place, &b.place); } else { prop_assert!(b.place.is_none()); }
        if source != 2 { prop_assert_eq!(&a.user_location, &b.user_location); } else { prop_assert!(b.user_location.is_none()); }
        if source != 3 {
            prop_assert_eq!(&a.tweet_locations, &b.tweet_locations);
            prop_assert_eq!(&a.mentioned_toponyms, &b.mentioned_toponyms);
        } else {
            prop_assert!(b.tweet_locations.is_none() && b.mentioned_toponyms.is_empty());
        }
    }
}

fn random_place(rng: &mut ChaCha8Rng, coords: bool) -> Option<ResolvedPlace> {
    if rng.random_bool(0.3) {
        return None;
    }
    let word = |rng: &mut ChaCha8Rng| -> Option<String> {
        rng.random_bool(0.7).then(|| {
            let n = rng.random_range(1..12);
            (0..n).map(|_| rng.random_range('a'..='z')).collect::<String>() + "é 東"
        })
    };
    let mut p = ResolvedPlace {
        country_code: rng.random_bool(0.9).then(|| "us".to_owned()),
        country: word(rng),
        state: word(rng),
        county: word(rng),
        city: word(rng),
        ..Default::default()
    };
    if coords {
        p.lat = Some(rng.random_range(-90.0..=90.0));
        p.lon = Some(rng.random_range(-180.0..=180.0));
    }
    Some(p)
}

#[test]
fn ten_thousand_records_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let records: Vec<GeoRecord> = (0..10_000)
        .map(|i| GeoRecord {
            tweet_id: rng.random_range(1..=u64::MAX),
            user_id: rng.random(),
            created_at: Utc.timestamp_opt(rng.random_range(1_200_000_000..1_900_000_000), 0).unwrap(),
            geo: random_place(&mut rng, true),
            place: random_place(&mut rng, false),
            user_location: random_place(&mut rng, false),
            tweet_locations: random_place(&mut rng, false),
            mentioned_toponyms: (0..i % 3)
                .map(|k| MentionedToponym {
                    phrase: format!("p{k}"),
                    country_code: (k % 2 == 0).then(|| "fr".to_owned()),
                })
                .collect(),
            user_location_candidates: Vec::new(),
            tweet_location_candidates: Vec::new(),
        })
        .collect();
    let mut buf = Vec::new();
    assert_eq!(write_records(&records, &mut buf).unwrap(), 10_000);
    let back: Vec<GeoRecord> = read_records(Cursor::new(&buf)).map(Result::unwrap).collect();
    assert_eq!(back, records);

    let mut empty = Vec::new();
    write_records(&[], &mut empty).unwrap();
    assert!(empty.is_empty());
    assert_eq!(read_records(Cursor::new(&empty)).count(), 0);
}

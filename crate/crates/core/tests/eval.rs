mod common;

use std::io::BufReader;

use chrono::{TimeZone, Utc};
use proptest::prelude::*;
use tweetgeo::eval::{evaluate, qualifies, sample_eval_set, EvalReport, EvalSource};
use tweetgeo::place::{Level, ResolvedPlace};
use tweetgeo::record::{read_records, GeoRecord};

fn naive(records: &[GeoRecord]) -> Vec<(EvalSource, Level, u64, u64)> {
    let set: Vec<&GeoRecord> = records
        .iter()
        .filter(|r| r.geo.is_some() && r.user_location.is_some() && r.tweet_locations.is_some())
        .collect();
    let mut out = Vec::new();
    for source in [EvalSource::UserLocation, EvalSource::TweetContent] {
        for level in [Level::Country, Level::State, Level::County, Level::City] {
            let mut matches = 0;
            for r in &set {
                let truth = r.geo.as_ref().unwrap();
                let derived = match source {
                    EvalSource::UserLocation => r.user_location.as_ref().unwrap(),
                    EvalSource::TweetContent => r.tweet_locations.as_ref().unwrap(),
                };
                let (d, t) = match level {
                    Level::Country => (&derived.country_code, &truth.country_code),
                    Level::State => (&derived.state, &truth.state),
                    Level::County => (&derived.county, &truth.county),
                    Level::City => (&derived.city, &truth.city),
                };
                if d.is_some() && d == t {
                    matches += 1;
                }
            }
            out.push((source, level, matches, set.len() as u64));
        }
    }
    out
}

fn cells(report: &EvalReport) -> Vec<(EvalSource, Level, u64, u64)> {
    report
        .cells
        .iter()
        .map(|c| (c.source, c.level, c.matches, c.samples))
        .collect()
}

fn arb_place() -> impl Strategy<Value = Option<ResolvedPlace>> {
    let name = |opts: &'static [&'static str]| prop::option::weighted(0.8, prop::sample::select(opts));
    prop::option::weighted(
        0.8,
        (
            name(&["us", "fr"]),
            name(&["texas", "ile-de-france"]),
            name(&["travis", "paris"]),
            name(&["austin", "paris"]),
        )
            .prop_map(|(cc, st, co, ci)| ResolvedPlace {
                country_code: cc.map(str::to_owned),
                state: st.map(str::to_owned),
                county: co.map(str::to_owned),
                city: ci.map(str::to_owned),
                ..Default::default()
            }),
    )
}

fn arb_records() -> impl Strategy<Value = Vec<GeoRecord>> {
    prop::collection::vec((arb_place(), arb_place(), arb_place()), 0..=50).prop_map(|v| {
        v.into_iter()
            .enumerate()
            .map(|(i, (geo, user, text))| {
                let mut r = GeoRecord::empty(i as u64 + 1, 9, Utc.with_ymd_and_hms(2020, 3, 1, 0, 0, 0).unwrap());
                r.geo = geo;
                r.user_location = user;
                r.tweet_locations = text;
                r
            })
            .collect()
    })
}

proptest! {
    #[test]
    fn score_equals_naive_recount(records in arb_records()) {
        let want = naive(&records);
        match EvalReport::score(&records) {
            Ok(report) => {
                prop_assert_eq!(cells(&report), want);
                for c in &report.cells {
                    prop_assert!(c.matches <= c.samples);
                    prop_assert!((0.0..=1.0).contains(&c.accuracy));
                }
            }
            Err(_) => prop_assert_eq!(want[0].3, 0),
        }
    }

    #[test]
    fn sample_is_an_ordered_subset(records in arb_records(), n in 1usize..60, seed in any::<u64>()) {
        let s = sample_eval_set(records.clone(), n, seed).unwrap();
        let qualifying: Vec<&GeoRecord> = records.iter().filter(|r| qualifies(r)).collect();
        prop_assert_eq!(s.qualifying as usize, qualifying.len());
        prop_assert_eq!(s.records.len(), n.min(qualifying.len()));
        let mut it = qualifying.iter();
        for r in &s.records {
            prop_assert!(it.any(|q| *q == r), "sample out of input order");
        }
        prop_assert_eq!(&s, &sample_eval_set(records, n, seed).unwrap());
    }
}

#[test]
fn golden_records_recount() {
    let file = std::fs::File::open(common::fixtures().join("golden_records.jsonl")).unwrap();
    let records: Vec<GeoRecord> = read_records(BufReader::new(file)).map(Result::unwrap).collect();
    let report = evaluate(records.clone(), 5_000, 0).unwrap();
    assert_eq!(cells(&report), naive(&records));
    assert!(report.cells[0].samples > 30);

    for source in [EvalSource::UserLocation, EvalSource::TweetContent] {
        let acc: Vec<u64> = report
            .cells
            .iter()
            .filter(|c| c.source == source)
            .map(|c| c.matches)
            .collect();
        assert!(acc.windows(2).all(|w| w[0] >= w[1]), "{source:?}: {acc:?}");
    }
}

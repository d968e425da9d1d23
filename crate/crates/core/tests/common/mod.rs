#![allow(dead_code)]

use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::Arc;

use tweetgeo::gazetteer::GazetteerIndex;
use tweetgeo::geocode::{
    FixtureTransport, GeocodeCache, GeocodeClient, RetryPolicy, Transport,
};
use tweetgeo::ratelimit::RateLimit;
use tweetgeo::resolve::Resolver;
use tweetgeo::toponym::{StopWords, ToponymExtractor};
use tweetgeo_testkit::{StubResponse, StubServer};

pub fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

pub fn fixture_index() -> Arc<GazetteerIndex> {
    Arc::new(GazetteerIndex::build_from_csv(&fixtures().join("gazetteer.csv")).unwrap())
}

pub fn fixture_bodies() -> HashMap<String, String> {
    let text = std::fs::read_to_string(fixtures().join("nominatim.jsonl")).unwrap();
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            let v: serde_json::Value = serde_json::from_str(l).unwrap();
            (
                v["key"].as_str().unwrap().to_owned(),
                v["body"].as_str().unwrap().to_owned(),
            )
        })
        .collect()
}

pub fn client_over(transport: Arc<dyn Transport>, cache: Arc<GeocodeCache>) -> Arc<GeocodeClient> {
    Arc::new(
        GeocodeClient::builder(transport)
            .endpoint("fixtures", RateLimit::per_second(1_000_000))
            .cache(cache)
            .retry(RetryPolicy::none())
            .build(),
    )
}

pub fn fixture_client() -> Arc<GeocodeClient> {
    client_over(
        Arc::new(FixtureTransport::new(fixture_bodies())),
        Arc::new(GeocodeCache::in_memory()),
    )
}

pub fn fixture_resolver() -> Resolver {
    let extractor = ToponymExtractor::new(fixture_index(), Arc::new(StopWords::english()));
    Resolver::new(fixture_client(), extractor)
}

/// Answers `/search` and `/reverse` from the recorded bodies; unknown
/// requests get a 404.
pub fn nominatim_stub(threads: usize) -> StubServer {
    let bodies = fixture_bodies();
    StubServer::start(threads, move |req| {
        let key = match req.path() {
            "/search" => format!("search:{}", req.query("q").unwrap_or_default()),
            "/reverse" => format!(
                "reverse:{},{}",
                req.query("lat").unwrap_or_default(),
                req.query("lon").unwrap_or_default()
            ),
            _ => String::new(),
        };
        match bodies.get(&key) {
            Some(body) => StubResponse::json(body.clone()),
            None => StubResponse::status(404, "{}"),
        }
    })
}

use std::collections::HashSet;
use std::sync::atomic::{AtomicU64, AtomicUsize, Ordering};
use std::sync::{Arc, RwLock};
use std::time::Duration;

use serde::Serialize;

use super::address::{parse_reverse_body, parse_search_body};
use super::cache::GeocodeCache;
use super::transport::{HttpResponse, Transport};
use super::GeocodeRequest;
use crate::gazetteer::normalize;
use crate::place::{Coordinates, ResolvedPlace};
use crate::ratelimit::{Clock, InFlight, RateLimit, RateLimiter, SystemClock, DEFAULT_WINDOW_GUARD};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GeocodeError {
    /// The request violates a precondition and was never sent.
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    /// Retries exhausted or a non-retryable response; the key is remembered
    /// as failed for the lifetime of the client.
    #[error("geocoding {key} failed: {reason}")]
    Failed { key: String, reason: String },
}

/// Retries after a transport error, HTTP 5xx, or HTTP 429.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RetryPolicy {
    /// Wait before retry `i`; its length is the number of retries.
    pub backoff: Vec<Duration>,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy {
            backoff: [1, 4, 16].map(Duration::from_secs).to_vec(),
        }
    }
}

impl RetryPolicy {
    pub fn none() -> Self {
        RetryPolicy {
            backoff: Vec::new(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct EndpointConfig {
    pub url: String,
    pub limit: RateLimit,
}

impl EndpointConfig {
    pub fn new(url: impl Into<String>, limit: RateLimit) -> Self {
        EndpointConfig {
            url: url.into(),
            limit,
        }
    }
}

struct Endpoint {
    url: String,
    limiter: RateLimiter,
}

#[derive(Debug, Default)]
struct Counters {
    requests: AtomicU64,
    cache_hits: AtomicU64,
    retries: AtomicU64,
    failures: AtomicU64,
}

/// Snapshot of client activity.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct ClientCounters {
    /// Requests handed to the transport, retries included.
    pub requests: u64,
    pub cache_hits: u64,
    pub retries: u64,
    /// Keys that failed permanently.
    pub failures: u64,
}

/// Rate-limited, cached geocoding client. Safe to share across threads.
pub struct GeocodeClient {
    endpoints: Vec<Endpoint>,
    next_endpoint: AtomicUsize,
    transport: Arc<dyn Transport>,
    cache: Arc<GeocodeCache>,
    failed: RwLock<HashSet<String>>,
    in_flight: InFlight,
    retry: RetryPolicy,
    clock: Arc<dyn Clock>,
    counters: Counters,
}

pub struct GeocodeClientBuilder {
    endpoints: Vec<EndpointConfig>,
    transport: Arc<dyn Transport>,
    cache: Option<Arc<GeocodeCache>>,
    retry: RetryPolicy,
    max_in_flight: usize,
    window_guard: Duration,
    clock: Option<Arc<dyn Clock>>,
}

impl GeocodeClientBuilder {
    pub fn endpoint(mut self, url: impl Into<String>, limit: RateLimit) -> Self {
        self.endpoints.push(EndpointConfig::new(url, limit));
        self
    }

    pub fn endpoints(mut self, endpoints: impl IntoIterator<Item = EndpointConfig>) -> Self {
        self.endpoints.extend(endpoints);
        self
    }

    pub fn cache(mut self, cache: Arc<GeocodeCache>) -> Self {
        self.cache = Some(cache);
        self
    }

    pub fn retry(mut self, retry: RetryPolicy) -> Self {
        self.retry = retry;
        self
    }

    pub fn max_in_flight(mut self, n: usize) -> Self {
        self.max_in_flight = n;
        self
    }

    pub fn window_guard(mut self, guard: Duration) -> Self {
        self.window_guard = guard;
        self
    }

    pub fn clock(mut self, clock: Arc<dyn Clock>) -> Self {
        self.clock = Some(clock);
        self
    }

    /// Panics when no endpoint is configured or a ceiling is zero.
    pub fn build(self) -> GeocodeClient {
        assert!(!self.endpoints.is_empty(), "at least one endpoint is required");
        let clock = self
            .clock
            .unwrap_or_else(|| Arc::new(SystemClock::new()) as Arc<dyn Clock>);
        let endpoints = self
            .endpoints
            .into_iter()
            .map(|e| Endpoint {
                limiter: RateLimiter::new(e.limit, self.window_guard, clock.clone()),
                url: e.url,
            })
            .collect();
        GeocodeClient {
            endpoints,
            next_endpoint: AtomicUsize::new(0),
            transport: self.transport,
            cache: self
                .cache
                .unwrap_or_else(|| Arc::new(GeocodeCache::in_memory())),
            failed: RwLock::new(HashSet::new()),
            in_flight: InFlight::new(self.max_in_flight),
            retry: self.retry,
            clock,
            counters: Counters::default(),
        }
    }
}

enum Attempt {
    Done(Arc<[ResolvedPlace]>),
    Retry(Duration, String),
    Fatal(String),
}

impl GeocodeClient {
    pub fn builder(transport: Arc<dyn Transport>) -> GeocodeClientBuilder {
        GeocodeClientBuilder {
            endpoints: Vec::new(),
            transport,
            cache: None,
            retry: RetryPolicy::default(),
            max_in_flight: 16,
            window_guard: DEFAULT_WINDOW_GUARD,
            clock: None,
        }
    }

    pub fn cache(&self) -> &GeocodeCache {
        &self.cache
    }

    pub fn counters(&self) -> ClientCounters {
        ClientCounters {
            requests: self.counters.requests.load(Ordering::Relaxed),
            cache_hits: self.counters.cache_hits.load(Ordering::Relaxed),
            retries: self.counters.retries.load(Ordering::Relaxed),
            failures: self.counters.failures.load(Ordering::Relaxed),
        }
    }

    /// Forward geocoding. Results are in service order, best first; an empty
    /// list means the query is not a resolvable place.
    pub fn search(&self, query: &str) -> Result<Arc<[ResolvedPlace]>, GeocodeError> {
        let query = normalize(query);
        if query.is_empty() {
            return Err(GeocodeError::InvalidRequest("empty search query".into()));
        }
        self.execute(&GeocodeRequest::Search(query))
    }

    /// Reverse geocoding. `Ok(None)` when nothing contains the point.
    pub fn reverse(&self, lat: f64, lon: f64) -> Result<Option<ResolvedPlace>, GeocodeError> {
        let coords = Coordinates::new(lat, lon).ok_or_else(|| {
            GeocodeError::InvalidRequest(format!("coordinates out of range: ({lat}, {lon})"))
        })?;
        let places = self.execute(&GeocodeRequest::Reverse(coords))?;
        Ok(places.first().cloned())
    }

    fn execute(&self, request: &GeocodeRequest) -> Result<Arc<[ResolvedPlace]>, GeocodeError> {
        let key = request.key();
        if let Some(hit) = self.cache.get(&key) {
            self.counters.cache_hits.fetch_add(1, Ordering::Relaxed);
            return Ok(hit);
        }
        if self.failed.read().unwrap().contains(&key) {
            return Err(GeocodeError::Failed {
                key,
                reason: "failed earlier in this run".into(),
            });
        }

        let mut retries = self.retry.backoff.iter();
        let reason = loop {
            match self.attempt(request) {
                Attempt::Done(places) => {
                    if let Err(e) = self.cache.insert(&key, places.clone()) {
                        tracing::error!(key = %key, error = %e, "cache write failed");
                    }
                    return Ok(places);
                }
                Attempt::Fatal(reason) => break reason,
                Attempt::Retry(hint, reason) => match retries.next() {
                    Some(&backoff) => {
                        self.counters.retries.fetch_add(1, Ordering::Relaxed);
                        let wait = hint.max(backoff);
                        tracing::debug!(key = %key, %reason, wait_ms = wait.as_millis() as u64, "retrying");
                        self.clock.sleep(wait);
                    }
                    None => break reason,
                },
            }
        };

        tracing::warn!(key = %key, %reason, "geocoding failed");
        self.counters.failures.fetch_add(1, Ordering::Relaxed);
        self.failed.write().unwrap().insert(key.clone());
        Err(GeocodeError::Failed { key, reason })
    }

    fn attempt(&self, request: &GeocodeRequest) -> Attempt {
        let response = {
            let _permit = self.in_flight.acquire();
            let i = self.next_endpoint.fetch_add(1, Ordering::Relaxed) % self.endpoints.len();
            let endpoint = &self.endpoints[i];
            endpoint.limiter.acquire();
            self.counters.requests.fetch_add(1, Ordering::Relaxed);
            self.transport.fetch(&endpoint.url, request)
        };
        match response {
            Err(e) => Attempt::Retry(Duration::ZERO, e.to_string()),
            Ok(HttpResponse {
                status: 200..=299,
                body,
                ..
            }) => {
                let parsed = match request {
                    GeocodeRequest::Search(_) => parse_search_body(&body),
                    GeocodeRequest::Reverse(_) => {
                        parse_reverse_body(&body).map(|p| p.into_iter().collect())
                    }
                };
                match parsed {
                    Ok(places) => Attempt::Done(places.into()),
                    Err(e) => Attempt::Fatal(e.to_string()),
                }
            }
            Ok(HttpResponse {
                status: 429,
                retry_after,
                ..
            }) => Attempt::Retry(retry_after.unwrap_or_default(), "HTTP 429".into()),
            Ok(HttpResponse { status, .. }) if status >= 500 => {
                Attempt::Retry(Duration::ZERO, format!("HTTP {status}"))
            }
            Ok(HttpResponse { status, .. }) => Attempt::Fatal(format!("HTTP {status}")),
        }
    }
}

#[cfg(test)]
mod tests {
    use std::collections::{HashMap, VecDeque};
    use std::sync::Mutex;

    use super::*;
    use crate::geocode::{FixtureTransport, TransportError};
    use crate::ratelimit::ManualClock;

    /// Replays a scripted sequence of responses.
    struct Scripted {
        responses: Mutex<VecDeque<Result<HttpResponse, TransportError>>>,
        seen: Mutex<Vec<(String, String)>>,
    }

    impl Scripted {
        fn new(r: Vec<Result<HttpResponse, TransportError>>) -> Arc<Self> {
            Arc::new(Scripted {
                responses: Mutex::new(r.into()),
                seen: Mutex::new(Vec::new()),
            })
        }
    }

    impl Transport for Scripted {
        fn fetch(&self, endpoint: &str, r: &GeocodeRequest) -> Result<HttpResponse, TransportError> {
            self.seen.lock().unwrap().push((endpoint.to_owned(), r.key()));
            self.responses
                .lock()
                .unwrap()
                .pop_front()
                .expect("unexpected extra request")
        }
    }

    fn status(code: u16) -> Result<HttpResponse, TransportError> {
        Ok(HttpResponse {
            status: code,
            retry_after: None,
            body: String::new(),
        })
    }

    const PARIS: &str = r#"[{"lat":"48.85","lon":"2.35","importance":0.9,"address":{"city":"Paris","country_code":"fr"}}]"#;

    fn client(t: Arc<dyn Transport>, clock: Arc<ManualClock>) -> GeocodeClient {
        GeocodeClient::builder(t)
            .endpoint("http://a", RateLimit::per_second(1000))
            .clock(clock)
            .build()
    }

    #[test]
    fn second_identical_query_is_cached() {
        let t = Arc::new(FixtureTransport::new(HashMap::from([(
            "search:paris".to_owned(),
            PARIS.to_owned(),
        )])));
        let c = client(t.clone(), Arc::new(ManualClock::new()));
        let a = c.search("Paris").unwrap();
        let b = c.search("paris").unwrap();
        assert_eq!(a, b);
        assert_eq!(a[0].country_code.as_deref(), Some("fr"));
        assert_eq!(t.calls(), 1);
        assert_eq!(c.counters().cache_hits, 1);
    }

    #[test]
    fn backoff_schedule_then_permanent_failure() {
        let t = Scripted::new(vec![
            Err(TransportError("refused".into())),
            status(503),
            status(500),
            status(502),
        ]);
        let clock = Arc::new(ManualClock::new());
        let c = client(t.clone(), clock.clone());
        let err = c.search("paris").unwrap_err();
        assert!(matches!(err, GeocodeError::Failed { .. }));
        assert_eq!(clock.sleeps(), [1, 4, 16].map(Duration::from_secs));
        assert_eq!(c.counters().requests, 4);
        assert_eq!(c.counters().failures, 1);
        // Remembered: no further requests for the same key.
        assert!(c.search("paris").is_err());
        assert_eq!(t.seen.lock().unwrap().len(), 4);
    }

    #[test]
    fn recovers_after_transient_error() {
        let t = Scripted::new(vec![status(503), Ok(HttpResponse::ok(PARIS))]);
        let clock = Arc::new(ManualClock::new());
        let c = client(t, clock.clone());
        assert_eq!(c.search("paris").unwrap().len(), 1);
        assert_eq!(clock.sleeps(), vec![Duration::from_secs(1)]);
    }

    #[test]
    fn rate_limited_response_honors_retry_after() {
        let t = Scripted::new(vec![
            Ok(HttpResponse {
                status: 429,
                retry_after: Some(Duration::from_secs(30)),
                body: String::new(),
            }),
            Ok(HttpResponse::ok("[]")),
        ]);
        let clock = Arc::new(ManualClock::new());
        let c = client(t, clock.clone());
        assert!(c.search("zzqy1234").unwrap().is_empty());
        assert_eq!(clock.sleeps(), vec![Duration::from_secs(30)]);
    }

    #[test]
    fn malformed_body_is_permanent() {
        let t = Scripted::new(vec![Ok(HttpResponse::ok("<html>oops</html>"))]);
        let c = client(t, Arc::new(ManualClock::new()));
        assert!(matches!(c.search("paris"), Err(GeocodeError::Failed { .. })));
        assert_eq!(c.counters().retries, 0);
    }

    #[test]
    fn client_errors_are_not_retried() {
        let t = Scripted::new(vec![status(404)]);
        let c = client(t, Arc::new(ManualClock::new()));
        assert!(c.search("x").is_err());
        assert_eq!(c.counters().requests, 1);
    }

    #[test]
    fn preconditions_checked_before_sending() {
        let t = Scripted::new(vec![]);
        let c = client(t.clone(), Arc::new(ManualClock::new()));
        assert!(matches!(c.reverse(95.0, 0.0), Err(GeocodeError::InvalidRequest(_))));
        assert!(matches!(c.search("   "), Err(GeocodeError::InvalidRequest(_))));
        assert!(t.seen.lock().unwrap().is_empty());
    }

    #[test]
    fn endpoints_round_robin() {
        let t = Scripted::new(vec![
            Ok(HttpResponse::ok("[]")),
            Ok(HttpResponse::ok("[]")),
            Ok(HttpResponse::ok("[]")),
        ]);
        let c = GeocodeClient::builder(t.clone())
            .endpoint("http://a", RateLimit::per_second(10))
            .endpoint("http://b", RateLimit::per_second(10))
            .clock(Arc::new(ManualClock::new()))
            .build();
        for q in ["x", "y", "z"] {
            c.search(q).unwrap();
        }
        let eps: Vec<String> = t.seen.lock().unwrap().iter().map(|s| s.0.clone()).collect();
        assert_eq!(eps, ["http://a", "http://b", "http://a"]);
    }

    #[test]
    fn reverse_not_found_is_cached() {
        let t = Scripted::new(vec![Ok(HttpResponse::ok(r#"{"error":"Unable to geocode"}"#))]);
        let c = client(t.clone(), Arc::new(ManualClock::new()));
        assert_eq!(c.reverse(0.0, 0.0).unwrap(), None);
        assert_eq!(c.reverse(0.00001, 0.0).unwrap(), None);
        assert_eq!(t.seen.lock().unwrap().len(), 1);
    }
}

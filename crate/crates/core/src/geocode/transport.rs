use std::collections::HashMap;
use std::io::BufRead;
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};
use std::time::Duration;

use serde::Deserialize;

use super::GeocodeRequest;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HttpResponse {
    pub status: u16,
    /// Parsed `Retry-After` (delta-seconds form only).
    pub retry_after: Option<Duration>,
    pub body: String,
}

impl HttpResponse {
    pub fn ok(body: impl Into<String>) -> Self {
        HttpResponse {
            status: 200,
            retry_after: None,
            body: body.into(),
        }
    }
}

/// Connection-level failure (DNS, refused, timeout, broken body).
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("transport error: {0}")]
pub struct TransportError(pub String);

/// Performs one geocoding request against one endpoint.
pub trait Transport: Send + Sync {
    fn fetch(&self, endpoint: &str, request: &GeocodeRequest)
        -> Result<HttpResponse, TransportError>;
}

#[derive(Debug, Clone)]
pub struct HttpTransportOptions {
    pub user_agent: String,
    pub accept_language: String,
    /// `limit` parameter for `/search`.
    pub search_limit: u32,
    pub timeout: Duration,
}

impl Default for HttpTransportOptions {
    fn default() -> Self {
        HttpTransportOptions {
            user_agent: concat!("tweetgeo/", env!("CARGO_PKG_VERSION")).to_owned(),
            accept_language: "en".to_owned(),
            search_limit: 10,
            timeout: Duration::from_secs(30),
        }
    }
}

/// Blocking HTTP transport speaking the Nominatim `/search` and `/reverse` API.
pub struct HttpTransport {
    agent: ureq::Agent,
    options: HttpTransportOptions,
}

impl HttpTransport {
    pub fn new(options: HttpTransportOptions) -> Self {
        let agent = ureq::Agent::config_builder()
            .http_status_as_error(false)
            .timeout_global(Some(options.timeout))
            .user_agent(options.user_agent.as_str())
            .build()
            .into();
        HttpTransport { agent, options }
    }
}

impl Transport for HttpTransport {
    fn fetch(
        &self,
        endpoint: &str,
        request: &GeocodeRequest,
    ) -> Result<HttpResponse, TransportError> {
        let base = endpoint.trim_end_matches('/');
        let builder = match request {
            GeocodeRequest::Search(q) => self
                .agent
                .get(format!("{base}/search"))
                .query("q", q)
                .query("limit", self.options.search_limit.to_string()),
            GeocodeRequest::Reverse(c) => self
                .agent
                .get(format!("{base}/reverse"))
                .query("lat", format!("{:.4}", super::round_coordinate(c.lat)))
                .query("lon", format!("{:.4}", super::round_coordinate(c.lon))),
        };
        let mut resp = builder
            .query("format", "jsonv2")
            .query("addressdetails", "1")
            .query("accept-language", &self.options.accept_language)
            .call()
            .map_err(|e| TransportError(e.to_string()))?;
        let status = resp.status().as_u16();
        let retry_after = resp
            .headers()
            .get("retry-after")
            .and_then(|v| v.to_str().ok())
            .and_then(|v| v.trim().parse::<u64>().ok())
            .map(Duration::from_secs);
        let body = resp
            .body_mut()
            .read_to_string()
            .map_err(|e| TransportError(e.to_string()))?;
        Ok(HttpResponse {
            status,
            retry_after,
            body,
        })
    }
}

/// What [`FixtureTransport`] answers for a request it has no recording for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MissingFixture {
    /// HTTP 404, which the client treats as a permanent failure.
    #[default]
    NotFound,
    /// An empty result (`[]` for search, an error object for reverse).
    Empty,
}

#[derive(Deserialize)]
struct FixtureLine {
    key: String,
    body: String,
}

/// Serves recorded responses keyed by [`GeocodeRequest::key`].
///
/// Fixture files hold one JSON object per line:
/// `{"key": "search:paris", "body": "<verbatim response body>"}`.
#[derive(Debug, Default)]
pub struct FixtureTransport {
    bodies: HashMap<String, String>,
    missing: MissingFixture,
    calls: AtomicU64,
}

impl FixtureTransport {
    pub fn new(bodies: HashMap<String, String>) -> Self {
        FixtureTransport {
            bodies,
            ..Default::default()
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::read(path, e))?;
        let mut bodies = HashMap::new();
        for (n, line) in std::io::BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|e| Error::read(path, e))?;
            if line.trim().is_empty() {
                continue;
            }
            let entry: FixtureLine = serde_json::from_str(&line).map_err(|e| {
                Error::Config(format!("{}:{}: bad fixture line: {e}", path.display(), n + 1))
            })?;
            bodies.insert(entry.key, entry.body);
        }
        Ok(FixtureTransport::new(bodies))
    }

    pub fn with_missing(mut self, missing: MissingFixture) -> Self {
        self.missing = missing;
        self
    }

    /// Requests served so far, including misses.
    pub fn calls(&self) -> u64 {
        self.calls.load(Ordering::Relaxed)
    }

    pub fn len(&self) -> usize {
        self.bodies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bodies.is_empty()
    }
}

impl Transport for FixtureTransport {
    fn fetch(
        &self,
        _endpoint: &str,
        request: &GeocodeRequest,
    ) -> Result<HttpResponse, TransportError> {
        self.calls.fetch_add(1, Ordering::Relaxed);
        if let Some(body) = self.bodies.get(&request.key()) {
            return Ok(HttpResponse::ok(body.clone()));
        }
        Ok(match (self.missing, request) {
            (MissingFixture::NotFound, _) => HttpResponse {
                status: 404,
                retry_after: None,
                body: String::new(),
            },
            (MissingFixture::Empty, GeocodeRequest::Search(_)) => HttpResponse::ok("[]"),
            (MissingFixture::Empty, GeocodeRequest::Reverse(_)) => {
                HttpResponse::ok(r#"{"error":"Unable to geocode"}"#)
            }
        })
    }
}

//! Rehydration of shared tweet-id lists.
//!
//! Ids are looked up in batches of up to [`MAX_BATCH`] through the v1.1
//! `statuses/lookup` endpoint. Each returned tweet object is written verbatim
//! as one output line, ordered as in the input; ids the endpoint does not
//! return (deleted, protected, suspended) go to a sidecar list, one per line.
//!
//! Progress is checkpointed after every batch: both outputs are synced, then
//! a small JSON file recording the batch count and the byte length of each
//! output is replaced atomically. A resumed run truncates the outputs back to
//! those lengths, so a crash between writing a batch and checkpointing it
//! never duplicates lines.
//!
//! The bearer token is read from the `TWITTER_BEARER_TOKEN` environment
//! variable ([`BEARER_TOKEN_ENV`]).

use std::collections::{HashMap, HashSet};
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use serde_json::value::RawValue;

use crate::error::{Error, Result};
use crate::geocode::RetryPolicy;
use crate::ratelimit::{Clock, RateLimit, RateLimiter, SystemClock, DEFAULT_WINDOW_GUARD};

pub const MAX_BATCH: usize = 100;
pub const BEARER_TOKEN_ENV: &str = "TWITTER_BEARER_TOKEN";
pub const DEFAULT_LOOKUP_URL: &str = "https://api.twitter.com/1.1/statuses/lookup.json";
const CHECKPOINT_VERSION: u32 = 1;

/// Ids read from an id file, first occurrence order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct IdList {
    pub ids: Vec<u64>,
    pub malformed_lines: u64,
    pub duplicate_ids: u64,
}

pub fn parse_ids<R: BufRead>(reader: R) -> std::io::Result<IdList> {
    let mut list = IdList::default();
    let mut seen = HashSet::new();
    for line in reader.lines() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        match t.parse::<u64>() {
            Ok(id) if t.bytes().all(|b| b.is_ascii_digit()) => {
                if seen.insert(id) {
                    list.ids.push(id);
                } else {
                    list.duplicate_ids += 1;
                }
            }
            _ => {
                tracing::warn!(line = t, "skipping malformed id line");
                list.malformed_lines += 1;
            }
        }
    }
    Ok(list)
}

pub fn read_id_file(path: &Path) -> Result<IdList> {
    let file = File::open(path).map_err(|e| Error::read(path, e))?;
    parse_ids(BufReader::new(file)).map_err(|e| Error::read(path, e))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LookupResponse {
    pub status: u16,
    /// How long the server asked us to wait, from `retry-after` or
    /// `x-rate-limit-reset`.
    pub retry_after: Option<Duration>,
    pub body: String,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{0}")]
pub struct LookupError(pub String);

pub trait LookupTransport: Send + Sync {
    fn lookup(&self, ids: &[u64]) -> std::result::Result<LookupResponse, LookupError>;
}

pub struct HttpLookupTransport {
    agent: ureq::Agent,
    url: String,
    token: String,
}

impl HttpLookupTransport {
    pub fn new(url: impl Into<String>, token: impl Into<String>, timeout: Duration) -> Self {
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .http_status_as_error(false)
            .timeout_global(Some(timeout))
            .user_agent(concat!("tweetgeo-hydrate/", env!("CARGO_PKG_VERSION")))
            .build()
            .into();
        HttpLookupTransport {
            agent,
            url: url.into(),
            token: token.into(),
        }
    }

    /// Reads the token from [`BEARER_TOKEN_ENV`].
    pub fn from_env(url: impl Into<String>, timeout: Duration) -> Result<Self> {
        let token = std::env::var(BEARER_TOKEN_ENV)
            .ok()
            .filter(|t| !t.trim().is_empty())
            .ok_or_else(|| Error::Auth(format!("{BEARER_TOKEN_ENV} is not set")))?;
        Ok(Self::new(url, token.trim(), timeout))
    }
}

fn header_secs(resp: &ureq::http::Response<ureq::Body>, name: &str) -> Option<u64> {
    resp.headers()
        .get(name)?
        .to_str()
        .ok()?
        .trim()
        .parse()
        .ok()
}

impl LookupTransport for HttpLookupTransport {
    fn lookup(&self, ids: &[u64]) -> std::result::Result<LookupResponse, LookupError> {
        let joined = ids
            .iter()
            .map(u64::to_string)
            .collect::<Vec<_>>()
            .join(",");
        let mut resp = self
            .agent
            .get(&self.url)
            .header("Authorization", &format!("Bearer {}", self.token))
            .query("id", &joined)
            .query("tweet_mode", "extended")
            .query("include_entities", "true")
            .call()
            .map_err(|e| LookupError(e.to_string()))?;
        let status = resp.status().as_u16();
        let retry_after = header_secs(&resp, "retry-after")
            .map(Duration::from_secs)
            .or_else(|| {
                let reset = header_secs(&resp, "x-rate-limit-reset")?;
                let now = SystemTime::now().duration_since(UNIX_EPOCH).ok()?.as_secs();
                Some(Duration::from_secs(reset.saturating_sub(now) + 1))
            });
        let body = resp
            .body_mut()
            .read_to_string()
            .map_err(|e| LookupError(e.to_string()))?;
        Ok(LookupResponse {
            status,
            retry_after,
            body,
        })
    }
}

#[derive(Clone)]
pub struct HydrateOptions {
    pub batch_size: usize,
    pub limit: RateLimit,
    /// Concurrent batches in flight.
    pub in_flight: usize,
    /// Backoff for transport errors and 5xx responses.
    pub retry: RetryPolicy,
    /// Wait after a 429 that carries no rate-limit header.
    pub rate_limit_wait: Duration,
    /// Upper bound on consecutive 429 responses for one batch.
    pub max_rate_limited: u32,
    pub clock: Arc<dyn Clock>,
}

impl Default for HydrateOptions {
    fn default() -> Self {
        HydrateOptions {
            batch_size: MAX_BATCH,
            // App-auth ceiling of the lookup endpoint.
            limit: RateLimit {
                max_requests: 300,
                window: Duration::from_secs(15 * 60),
            },
            in_flight: 1,
            retry: RetryPolicy::default(),
            rate_limit_wait: Duration::from_secs(60),
            max_rate_limited: 30,
            clock: Arc::new(SystemClock::new()),
        }
    }
}

/// Output locations. The checkpoint defaults to `<output>.checkpoint` and
/// the missing-id list to `missing_ids.txt` next to the output.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HydrateOutputs {
    pub output: PathBuf,
    pub missing: PathBuf,
    pub checkpoint: PathBuf,
}

impl HydrateOutputs {
    pub fn beside(output: &Path) -> Self {
        let dir = output.parent().unwrap_or(Path::new(""));
        let mut checkpoint = output.as_os_str().to_owned();
        checkpoint.push(".checkpoint");
        HydrateOutputs {
            output: output.to_owned(),
            missing: dir.join("missing_ids.txt"),
            checkpoint: checkpoint.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub version: u32,
    pub batch_size: usize,
    pub total_ids: u64,
    pub batches_done: u64,
    pub output_bytes: u64,
    pub missing_bytes: u64,
}

impl Checkpoint {
    pub fn load(path: &Path) -> Result<Option<Checkpoint>> {
        match fs::read(path) {
            Ok(bytes) => {
                let cp: Checkpoint = serde_json::from_slice(&bytes)
                    .map_err(|e| Error::Hydrate(format!("bad checkpoint {}: {e}", path.display())))?;
                if cp.version != CHECKPOINT_VERSION {
                    return Err(Error::Hydrate(format!(
                        "checkpoint {} has version {}, expected {CHECKPOINT_VERSION}",
                        path.display(),
                        cp.version
                    )));
                }
                Ok(Some(cp))
            }
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(Error::read(path, e)),
        }
    }

    fn store(&self, path: &Path) -> Result<()> {
        let mut tmp = path.as_os_str().to_owned();
        tmp.push(".tmp");
        let tmp = PathBuf::from(tmp);
        {
            let mut f = File::create(&tmp).map_err(|e| Error::write(&tmp, e))?;
            f.write_all(&serde_json::to_vec(self)?)
                .and_then(|_| f.sync_all())
                .map_err(|e| Error::write(&tmp, e))?;
        }
        fs::rename(&tmp, path).map_err(|e| Error::write(path, e))?;
        sync_parent(path);
        Ok(())
    }
}

fn sync_parent(path: &Path) {
    #[cfg(unix)]
    if let Some(dir) = path.parent() {
        let dir = if dir.as_os_str().is_empty() { Path::new(".") } else { dir };
        if let Ok(d) = File::open(dir) {
            let _ = d.sync_all();
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct HydrationStats {
    pub input_ids: u64,
    pub malformed_lines: u64,
    pub duplicate_ids: u64,
    pub batches_total: u64,
    /// Batches already done by an earlier run.
    pub batches_skipped: u64,
    pub requests: u64,
    pub retries: u64,
    pub rate_limited: u64,
    /// Counts below cover this run only.
    pub hydrated: u64,
    pub missing: u64,
}

/// Tweets returned for one batch, in input id order, plus the ids not
/// returned.
#[derive(Debug, Default)]
struct BatchResult {
    lines: Vec<u8>,
    missing: Vec<u8>,
    hydrated: u64,
    missing_count: u64,
    requests: u64,
    retries: u64,
    rate_limited: u64,
}

#[derive(Deserialize)]
struct IdOnly {
    #[serde(default)]
    id_str: Option<String>,
    #[serde(default)]
    id: Option<u64>,
}

fn tweet_id(raw: &RawValue) -> Option<u64> {
    let v: IdOnly = serde_json::from_str(raw.get()).ok()?;
    v.id_str.and_then(|s| s.parse().ok()).or(v.id)
}

/// Splits a lookup body into per-id lines. Tweets for ids outside the batch
/// are ignored; a repeated id keeps its first object.
fn split_body(ids: &[u64], body: &str) -> Result<(Vec<u8>, Vec<u8>, u64, u64)> {
    let objects: Vec<&RawValue> = serde_json::from_str(body)
        .map_err(|e| Error::Hydrate(format!("lookup response is not a JSON array: {e}")))?;
    let mut by_id: HashMap<u64, &RawValue> = HashMap::with_capacity(objects.len());
    for obj in objects {
        if let Some(id) = tweet_id(obj) {
            by_id.entry(id).or_insert(obj);
        }
    }
    let (mut lines, mut missing) = (Vec::new(), Vec::new());
    let (mut hydrated, mut not_found) = (0, 0);
    for id in ids {
        match by_id.get(id) {
            Some(obj) => {
                // Newlines can only be insignificant whitespace in JSON.
                lines.extend(obj.get().bytes().filter(|&b| b != b'\n' && b != b'\r'));
                lines.push(b'\n');
                hydrated += 1;
            }
            None => {
                missing.extend_from_slice(id.to_string().as_bytes());
                missing.push(b'\n');
                not_found += 1;
            }
        }
    }
    Ok((lines, missing, hydrated, not_found))
}

fn fetch_batch(
    ids: &[u64],
    transport: &dyn LookupTransport,
    limiter: &RateLimiter,
    opts: &HydrateOptions,
) -> Result<BatchResult> {
    let mut out = BatchResult::default();
    let mut failures = 0usize;
    let mut throttled = 0u32;
    loop {
        limiter.acquire();
        out.requests += 1;
        let wait = match transport.lookup(ids) {
            Ok(resp) if (200..300).contains(&resp.status) => {
                let (lines, missing, h, m) = split_body(ids, &resp.body)?;
                out.lines = lines;
                out.missing = missing;
                out.hydrated = h;
                out.missing_count = m;
                return Ok(out);
            }
            Ok(resp) if resp.status == 401 || resp.status == 403 => {
                return Err(Error::Auth(format!(
                    "lookup endpoint answered {}: {}",
                    resp.status,
                    resp.body.chars().take(200).collect::<String>()
                )));
            }
            Ok(resp) if resp.status == 429 => {
                out.rate_limited += 1;
                throttled += 1;
                if throttled > opts.max_rate_limited {
                    return Err(Error::Hydrate("still rate limited after repeated waits".into()));
                }
                let wait = resp.retry_after.unwrap_or(opts.rate_limit_wait);
                tracing::warn!(wait_ms = wait.as_millis() as u64, "rate limited by lookup endpoint");
                opts.clock.sleep(wait);
                continue;
            }
            Ok(resp) if resp.status >= 500 => format!("server error {}", resp.status),
            Ok(resp) => {
                return Err(Error::Hydrate(format!(
                    "lookup endpoint answered {}: {}",
                    resp.status,
                    resp.body.chars().take(200).collect::<String>()
                )));
            }
            Err(e) => e.0,
        };
        let Some(backoff) = opts.retry.backoff.get(failures) else {
            return Err(Error::Hydrate(format!("lookup failed: {wait}")));
        };
        tracing::warn!(error = %wait, retry_in_ms = backoff.as_millis() as u64, "lookup failed, retrying");
        failures += 1;
        out.retries += 1;
        opts.clock.sleep(*backoff);
    }
}

fn open_output(path: &Path, keep: Option<u64>) -> Result<File> {
    let mut f = OpenOptions::new()
        .create(true)
        .write(true)
        .truncate(keep.is_none())
        .open(path)
        .map_err(|e| Error::write(path, e))?;
    if let Some(len) = keep {
        let actual = f.metadata().map_err(|e| Error::read(path, e))?.len();
        if actual < len {
            return Err(Error::Hydrate(format!(
                "{} is shorter ({actual} bytes) than its checkpoint ({len} bytes)",
                path.display()
            )));
        }
        f.set_len(len).map_err(|e| Error::write(path, e))?;
    }
    use std::io::{Seek, SeekFrom};
    f.seek(SeekFrom::End(0)).map_err(|e| Error::write(path, e))?;
    Ok(f)
}

/// Hydrates `ids`, resuming from the checkpoint in `outputs` if one exists.
pub fn hydrate_ids(
    ids: &IdList,
    transport: &dyn LookupTransport,
    outputs: &HydrateOutputs,
    opts: &HydrateOptions,
) -> Result<HydrationStats> {
    if opts.batch_size == 0 || opts.batch_size > MAX_BATCH {
        return Err(Error::Config(format!(
            "batch size must be between 1 and {MAX_BATCH}, got {}",
            opts.batch_size
        )));
    }
    if opts.limit.max_requests == 0 {
        return Err(Error::Config("request ceiling must be positive".into()));
    }
    let batches: Vec<&[u64]> = ids.ids.chunks(opts.batch_size).collect();
    let mut stats = HydrationStats {
        input_ids: ids.ids.len() as u64,
        malformed_lines: ids.malformed_lines,
        duplicate_ids: ids.duplicate_ids,
        batches_total: batches.len() as u64,
        ..Default::default()
    };

    let mut cp = match Checkpoint::load(&outputs.checkpoint)? {
        Some(cp) => {
            if cp.batch_size != opts.batch_size || cp.total_ids != stats.input_ids {
                return Err(Error::Hydrate(format!(
                    "checkpoint {} was written for {} ids in batches of {}, \
                     this run has {} ids in batches of {}",
                    outputs.checkpoint.display(),
                    cp.total_ids,
                    cp.batch_size,
                    stats.input_ids,
                    opts.batch_size
                )));
            }
            tracing::info!(batches_done = cp.batches_done, "resuming from checkpoint");
            cp
        }
        None => Checkpoint {
            version: CHECKPOINT_VERSION,
            batch_size: opts.batch_size,
            total_ids: stats.input_ids,
            batches_done: 0,
            output_bytes: 0,
            missing_bytes: 0,
        },
    };
    let resuming = cp.batches_done > 0;
    let mut out = open_output(&outputs.output, resuming.then_some(cp.output_bytes))?;
    let mut missing = open_output(&outputs.missing, resuming.then_some(cp.missing_bytes))?;
    stats.batches_skipped = cp.batches_done.min(stats.batches_total);
    if !resuming {
        cp.store(&outputs.checkpoint)?;
    }

    let limiter = RateLimiter::new(opts.limit, DEFAULT_WINDOW_GUARD, opts.clock.clone());
    let width = opts.in_flight.max(1);
    let pending = &batches[stats.batches_skipped as usize..];
    for wave in pending.chunks(width) {
        let results: Vec<Result<BatchResult>> = if wave.len() == 1 {
            vec![fetch_batch(wave[0], transport, &limiter, opts)]
        } else {
            std::thread::scope(|s| {
                let handles: Vec<_> = wave
                    .iter()
                    .map(|b| s.spawn(|| fetch_batch(b, transport, &limiter, opts)))
                    .collect();
                handles
                    .into_iter()
                    .map(|h| h.join().expect("lookup worker panicked"))
                    .collect()
            })
        };
        for result in results {
            let r = result?;
            out.write_all(&r.lines)
                .and_then(|_| out.sync_data())
                .map_err(|e| Error::write(&outputs.output, e))?;
            missing
                .write_all(&r.missing)
                .and_then(|_| missing.sync_data())
                .map_err(|e| Error::write(&outputs.missing, e))?;
            cp.batches_done += 1;
            cp.output_bytes += r.lines.len() as u64;
            cp.missing_bytes += r.missing.len() as u64;
            cp.store(&outputs.checkpoint)?;
            stats.requests += r.requests;
            stats.retries += r.retries;
            stats.rate_limited += r.rate_limited;
            stats.hydrated += r.hydrated;
            stats.missing += r.missing_count;
        }
    }
    Ok(stats)
}

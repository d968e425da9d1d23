use std::collections::VecDeque;
use std::fs::File;
use std::io::{self, BufRead, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use anyhow::{Context, Result};
use clap::ValueEnum;
use rayon::prelude::*;
use tracing::info;

use tweetgeo::eval::{evaluate, EvalReport};
use tweetgeo::gazetteer::GazetteerIndex;
use tweetgeo::geocode::{
    EndpointConfig, FixtureTransport, GeocodeCache, GeocodeClient, HttpTransport,
    HttpTransportOptions, RetryPolicy, Transport,
};
use tweetgeo::hydrate::{
    hydrate_ids, read_id_file, HttpLookupTransport, HydrateOptions, HydrateOutputs,
    DEFAULT_LOOKUP_URL,
};
use tweetgeo::ingest::{open_source, Compression, CorpusReader, KeywordSet, RawTweet};
use tweetgeo::ratelimit::{RateLimit, DEFAULT_WINDOW_GUARD};
use tweetgeo::record::{read_records, GeoRecord, Source};
use tweetgeo::resolve::{run_pipeline, Resolver, VoteMode};
use tweetgeo::stats::{write_reports, CorpusSummary, ReportOptions};
use tweetgeo::toponym::{PreprocessOptions, StopWords, ToponymExtractor};

use crate::config::{pick, Config};
use crate::{
    BuildIndexArgs, CacheAction, CacheArgs, Cli, Command, CompressionArg, CorpusArgs,
    EvaluateArgs, ExtractArgs, FormatArg, GeocoderArgs, HydrateArgs, ResolveArgs, StatsArgs,
    UsageError, VoteArg,
};

const DEFAULT_QPS: u32 = 1;
const DEFAULT_MAX_IN_FLIGHT: usize = 64;
const DEFAULT_EVAL_SAMPLE: usize = 5000;
/// Tweets resolved per parallel batch when scoring straight from a corpus.
const EVAL_CHUNK: usize = 4096;

pub fn run(cli: Cli) -> Result<()> {
    let config = Config::load(cli.config.as_deref())?;
    match cli.command {
        Command::Resolve(a) => resolve(&config, a),
        Command::Evaluate(a) => evaluate_cmd(&config, a),
        Command::Stats(a) => stats(&config, a),
        Command::Hydrate(a) => hydrate(&config, a),
        Command::BuildIndex(a) => build_index(a),
        Command::Cache(a) => cache(&config, a),
    }
}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

/// Parses a config string with the same spelling the flag accepts.
fn config_enum<T: ValueEnum>(value: &Option<String>, key: &str) -> Result<Option<T>> {
    value
        .as_deref()
        .map(|v| T::from_str(v, true).map_err(|_| usage(format!("config {key}: unknown value `{v}`"))))
        .transpose()
}

fn open_corpus(
    path: &Path,
    args: &CorpusArgs,
    config: &Config,
) -> Result<CorpusReader<Box<dyn BufRead + Send>>> {
    let compression = match args.compression {
        Some(c) => Some(c),
        None => config_enum(&config.corpus.compression, "corpus.compression")?,
    };
    let compression = match compression.unwrap_or(CompressionArg::Auto) {
        CompressionArg::Auto => Compression::Auto,
        CompressionArg::None => Compression::None,
        CompressionArg::Gzip => Compression::Gzip,
    };
    let mut reader = CorpusReader::new(open_source(path, compression)?);
    if let Some(kw) = pick(args.keywords.clone(), &config.corpus.keywords) {
        let keywords = KeywordSet::load(&kw)?;
        info!(keywords = keywords.len(), path = %kw.display(), "keyword filter loaded");
        reader = reader.with_keywords(keywords);
    }
    Ok(reader)
}

fn build_client(args: &GeocoderArgs, config: &Config) -> Result<Arc<GeocodeClient>> {
    let c = &config.geocoder;
    let endpoints = if args.endpoints.is_empty() {
        c.endpoints.clone().unwrap_or_default()
    } else {
        args.endpoints.clone()
    };
    let fixtures = pick(args.fixtures.clone(), &c.fixtures);
    let transport: Arc<dyn Transport> = match &fixtures {
        Some(path) => {
            let t = FixtureTransport::load(path)?;
            info!(responses = t.len(), path = %path.display(), "replaying recorded responses");
            Arc::new(t)
        }
        None => {
            let mut options = HttpTransportOptions::default();
            if let Some(ua) = pick(args.user_agent.clone(), &c.user_agent) {
                options.user_agent = ua;
            }
            if let Some(lang) = pick(args.accept_language.clone(), &c.accept_language) {
                options.accept_language = lang;
            }
            if let Some(secs) = pick(args.timeout_secs, &c.timeout_secs) {
                options.timeout = Duration::from_secs(secs);
            }
            Arc::new(HttpTransport::new(options))
        }
    };
    let endpoints = match (endpoints.is_empty(), &fixtures) {
        (false, _) => endpoints,
        (true, Some(_)) => vec!["fixtures".to_owned()],
        (true, None) => {
            return Err(usage(
                "no geocoder: set --endpoints (geocoder.endpoints) or --fixtures (geocoder.fixtures)",
            ))
        }
    };
    // Replayed responses cost nothing, so only an explicit ceiling applies.
    let default_qps = if fixtures.is_some() { u32::MAX } else { DEFAULT_QPS };
    let qps = pick(args.qps, &c.qps).unwrap_or(default_qps);
    if qps == 0 {
        return Err(usage("--qps must be positive"));
    }
    let cache = match pick(args.cache.clone(), &c.cache) {
        Some(path) => {
            let cache = GeocodeCache::open(&path)?;
            let s = cache.stats();
            info!(entries = s.entries, skipped = s.skipped_lines, path = %path.display(), "cache loaded");
            Arc::new(cache)
        }
        None => Arc::new(GeocodeCache::in_memory()),
    };
    let retry = match pick(args.retries.clone(), &c.retries) {
        Some(secs) => RetryPolicy {
            backoff: secs.into_iter().map(Duration::from_secs).collect(),
        },
        None => RetryPolicy::default(),
    };
    let guard = pick(args.window_guard_ms, &c.window_guard_ms)
        .map(Duration::from_millis)
        .unwrap_or(DEFAULT_WINDOW_GUARD);
    let max_in_flight = pick(args.max_in_flight, &c.max_in_flight).unwrap_or(DEFAULT_MAX_IN_FLIGHT);
    let client = GeocodeClient::builder(transport)
        .endpoints(
            endpoints
                .into_iter()
                .map(|url| EndpointConfig::new(url, RateLimit::per_second(qps))),
        )
        .cache(cache)
        .retry(retry)
        .window_guard(guard)
        .max_in_flight(max_in_flight.max(1))
        .build();
    Ok(Arc::new(client))
}

fn build_resolver(extract: &ExtractArgs, geocoder: &GeocoderArgs, config: &Config) -> Result<Resolver> {
    let path = pick(extract.gazetteer.clone(), &config.gazetteer.path)
        .ok_or_else(|| usage("no gazetteer: set --gazetteer (gazetteer.path)"))?;
    let index = GazetteerIndex::load(&path)?;
    info!(entries = index.entry_count(), path = %path.display(), "gazetteer loaded");
    let stopwords = match pick(extract.stopwords.clone(), &config.toponyms.stopwords) {
        Some(p) => StopWords::load(&p)?,
        None => StopWords::english(),
    };
    let unwrap_hashtags = pick(extract.unwrap_hashtags, &config.toponyms.unwrap_hashtags).unwrap_or(true);
    let extractor = ToponymExtractor::new(Arc::new(index), Arc::new(stopwords))
        .with_options(PreprocessOptions { unwrap_hashtags });
    let vote = match extract.vote {
        Some(v) => Some(v),
        None => config_enum(&config.resolve.vote, "resolve.vote")?,
    };
    let vote = match vote.unwrap_or(VoteArg::Majority) {
        VoteArg::Majority => VoteMode::Majority,
        VoteArg::All => VoteMode::AllCandidates,
    };
    Ok(Resolver::new(build_client(geocoder, config)?, extractor).with_vote_mode(vote))
}

fn workers(flag: Option<usize>, config: &Config) -> usize {
    pick(flag, &config.resolve.workers)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
        .max(1)
}

fn is_stdio(path: &Path) -> bool {
    path.as_os_str() == "-"
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    }
    let file = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    Ok(BufWriter::with_capacity(1 << 16, file))
}

fn resolve(config: &Config, a: ResolveArgs) -> Result<()> {
    let resolver = build_resolver(&a.extract, &a.geocoder, config)?;
    let workers = workers(a.extract.workers, config);
    let mut reader = open_corpus(&a.input, &a.corpus, config)?;
    info!(workers, input = %a.input.display(), "resolving");
    let summary = if is_stdio(&a.out) {
        run_pipeline(&mut reader, &resolver, workers, io::stdout().lock())?
    } else {
        let mut sink = create(&a.out)?;
        let s = run_pipeline(&mut reader, &resolver, workers, &mut sink)?;
        sink.into_inner()
            .map_err(|e| e.into_error())
            .and_then(|f| f.sync_all())
            .with_context(|| format!("cannot write {}", a.out.display()))?;
        s
    };
    let sidecar = match a.summary {
        Some(p) => Some(p),
        None if is_stdio(&a.out) => None,
        None => {
            let mut p = a.out.clone().into_os_string();
            p.push(".summary.json");
            Some(PathBuf::from(p))
        }
    };
    if let Some(path) = sidecar {
        let mut w = create(&path)?;
        serde_json::to_writer_pretty(&mut w, &summary)?;
        w.write_all(b"\n")?;
        w.flush()?;
    }
    info!(
        records = summary.records_written,
        malformed = summary.ingest.skipped_malformed,
        geocode_requests = summary.geocoder.requests,
        cache_hits = summary.geocoder.cache_hits,
        "resolve finished"
    );
    Ok(())
}

/// Resolves corpus tweets in parallel batches, yielding records in input
/// order. Tweets failing `keep` are skipped without being resolved.
struct ResolvedStream<'a, R> {
    reader: CorpusReader<R>,
    resolver: &'a Resolver,
    pool: rayon::ThreadPool,
    keep: fn(&RawTweet) -> bool,
    ready: VecDeque<GeoRecord>,
    error: Option<io::Error>,
    done: bool,
}

impl<R: BufRead> Iterator for ResolvedStream<'_, R> {
    type Item = GeoRecord;

    fn next(&mut self) -> Option<GeoRecord> {
        while self.ready.is_empty() && !self.done {
            let mut chunk = Vec::with_capacity(EVAL_CHUNK);
            while chunk.len() < EVAL_CHUNK {
                match self.reader.next_tweet() {
                    Ok(Some(t)) if (self.keep)(&t) => chunk.push(t),
                    Ok(Some(_)) => {}
                    Ok(None) => {
                        self.done = true;
                        break;
                    }
                    Err(e) => {
                        self.error = Some(e);
                        self.done = true;
                        break;
                    }
                }
            }
            let resolver = self.resolver;
            let records: Vec<GeoRecord> = self
                .pool
                .install(|| chunk.par_iter().map(|t| resolver.resolve_tweet(t)).collect());
            self.ready.extend(records);
        }
        self.ready.pop_front()
    }
}

/// Records that read errors stop; the first error is kept for the caller.
struct RecordFile<R> {
    inner: R,
    error: Option<io::Error>,
}

impl<R: Iterator<Item = io::Result<GeoRecord>>> Iterator for RecordFile<R> {
    type Item = GeoRecord;

    fn next(&mut self) -> Option<GeoRecord> {
        if self.error.is_some() {
            return None;
        }
        match self.inner.next()? {
            Ok(r) => Some(r),
            Err(e) => {
                self.error = Some(e);
                None
            }
        }
    }
}

fn evaluate_cmd(config: &Config, a: EvaluateArgs) -> Result<()> {
    let n = pick(a.sample_size, &config.eval.sample_size).unwrap_or(DEFAULT_EVAL_SAMPLE);
    let seed = pick(a.seed, &config.eval.seed).unwrap_or(0);
    let format = match a.format {
        Some(f) => Some(f),
        None => config_enum(&config.eval.format, "eval.format")?,
    }
    .unwrap_or(FormatArg::Csv);
    let report: EvalReport = if let Some(geo) = &a.geo {
        let mut records = RecordFile {
            inner: read_records(open_source(geo, Compression::Auto)?),
            error: None,
        };
        let report = evaluate(&mut records, n, seed);
        if let Some(e) = records.error {
            return Err(e).with_context(|| format!("cannot read records from {}", geo.display()));
        }
        report?
    } else {
        let input = a.input.as_deref().expect("clap requires --in without --geo");
        let resolver = build_resolver(&a.extract, &a.geocoder, config)?;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers(a.extract.workers, config))
            .build()?;
        let mut stream = ResolvedStream {
            reader: open_corpus(input, &a.corpus, config)?,
            resolver: &resolver,
            pool,
            // Only these can carry both GPS truth and a profile-derived place.
            keep: |t| t.coordinates.is_some() && t.user_location.is_some(),
            ready: VecDeque::new(),
            error: None,
            done: false,
        };
        let report = evaluate(&mut stream, n, seed);
        if let Some(e) = stream.error {
            return Err(e).with_context(|| format!("cannot read {}", input.display()));
        }
        report?
    };
    let text = match format {
        FormatArg::Csv => report.to_csv(),
        FormatArg::Table => report.to_table(),
    };
    match &a.out {
        Some(path) => {
            let mut w = create(path)?;
            w.write_all(text.as_bytes())?;
            w.flush()?;
        }
        None => io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn parse_sources(names: &[String]) -> Result<Vec<Source>> {
    let sources = names
        .iter()
        .map(|n| {
            Source::parse(n.trim()).ok_or_else(|| {
                usage(format!(
                    "unknown source `{n}`; expected geo, place, user_location or tweet_locations"
                ))
            })
        })
        .collect::<Result<Vec<_>>>()?;
    if sources.is_empty() {
        return Err(usage("attribution needs at least one source"));
    }
    Ok(sources)
}

fn stats(config: &Config, a: StatsArgs) -> Result<()> {
    let c = &config.stats;
    let attribution = match pick(a.attribution.clone(), &c.attribution) {
        Some(names) => parse_sources(&names)?,
        None => Source::PRIORITY.to_vec(),
    };
    let defaults = ReportOptions::default();
    let opts = ReportOptions {
        country_thresholds: pick(a.country_thresholds.clone(), &c.country_thresholds)
            .unwrap_or(defaults.country_thresholds),
        city_thresholds: pick(a.city_thresholds.clone(), &c.city_thresholds)
            .unwrap_or(defaults.city_thresholds),
        top_n: pick(a.top_n, &c.top_n).unwrap_or(defaults.top_n),
    };
    let mut tweets = open_corpus(&a.input, &a.corpus, config)?;
    let mut records = match &a.geo {
        Some(p) => Some(read_records(open_source(p, Compression::Auto)?).peekable()),
        None => None,
    };
    let mut summary = CorpusSummary::new(attribution);
    let mut joined = 0u64;
    while let Some(tweet) = tweets.next_tweet()? {
        // Records follow corpus order; a tweet without one simply has none.
        let mut record = None;
        if let Some(it) = records.as_mut() {
            match it.peek() {
                Some(Ok(r)) if r.tweet_id == tweet.tweet_id => {
                    record = it.next().transpose()?;
                    joined += 1;
                }
                Some(Err(_)) => {
                    let err = it.next().and_then(|r| r.err()).expect("peeked an error");
                    return Err(err).context("cannot read GeoRecords");
                }
                _ => {}
            }
        }
        summary.add(&tweet, record.as_ref());
    }
    if let Some(mut it) = records {
        let leftover = it.by_ref().count();
        if leftover > 0 {
            tracing::warn!(leftover, "GeoRecords without a matching corpus tweet were ignored");
        }
    }
    let manifest = write_reports(&summary, &opts, &a.out_dir)?;
    info!(
        tweets = manifest.total_tweets,
        joined,
        dir = %a.out_dir.display(),
        "reports written"
    );
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, &manifest)?;
    out.write_all(b"\n")?;
    Ok(())
}

fn hydrate(config: &Config, a: HydrateArgs) -> Result<()> {
    let c = &config.hydrate;
    let ids = read_id_file(&a.ids)?;
    let url = pick(a.lookup_url.clone(), &c.lookup_url).unwrap_or_else(|| DEFAULT_LOOKUP_URL.to_owned());
    let timeout = Duration::from_secs(pick(a.timeout_secs, &c.timeout_secs).unwrap_or(30));
    let transport = HttpLookupTransport::from_env(url, timeout)?;
    let defaults = HydrateOptions::default();
    let opts = HydrateOptions {
        batch_size: pick(a.batch_size, &c.batch_size).unwrap_or(defaults.batch_size),
        limit: RateLimit {
            max_requests: pick(a.max_requests, &c.max_requests).unwrap_or(defaults.limit.max_requests),
            window: pick(a.window_secs, &c.window_secs)
                .map(Duration::from_secs)
                .unwrap_or(defaults.limit.window),
        },
        in_flight: pick(a.in_flight, &c.in_flight).unwrap_or(defaults.in_flight).max(1),
        ..defaults
    };
    let mut outputs = HydrateOutputs::beside(&a.out);
    if let Some(m) = a.missing {
        outputs.missing = m;
    }
    let stats = hydrate_ids(&ids, &transport, &outputs, &opts)?;
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, &stats)?;
    out.write_all(b"\n")?;
    Ok(())
}

fn build_index(a: BuildIndexArgs) -> Result<()> {
    let index = GazetteerIndex::build_from_csv(&a.csv)?;
    index.write_snapshot(&a.out)?;
    let counts = index.counts();
    info!(distinct = counts.distinct_names, out = %a.out.display(), "index written");
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, &counts)?;
    out.write_all(b"\n")?;
    Ok(())
}

fn cache(config: &Config, a: CacheArgs) -> Result<()> {
    let path = pick(a.cache.clone(), &config.geocoder.cache)
        .ok_or_else(|| usage("no cache file: set --cache (geocoder.cache)"))?;
    if !path.exists() {
        return Err(usage(format!("cache file {} does not exist", path.display())));
    }
    let mut out = io::stdout().lock();
    match a.action {
        CacheAction::Stats => {
            let cache = GeocodeCache::open(&path)?;
            serde_json::to_writer_pretty(&mut out, &cache.stats())?;
        }
        CacheAction::Compact => {
            let stats = GeocodeCache::compact(&path)?;
            serde_json::to_writer_pretty(&mut out, &stats)?;
        }
        CacheAction::Get { key } => {
            let cache = GeocodeCache::open(&path)?;
            match cache.get(&key) {
                Some(places) => serde_json::to_writer_pretty(&mut out, &*places)?,
                None => return Err(anyhow::anyhow!("key `{key}` is not cached")),
            }
        }
    }
    out.write_all(b"\n")?;
    Ok(())
}

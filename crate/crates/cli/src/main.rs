//! `tweetgeo`: the resolve, evaluate, stats and hydrate pipeline as one
//! executable.
//!
//! Exit codes: 0 on success, 1 on a runtime failure, 2 on a usage error.
//! Failures end with a one-line JSON summary on standard error.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;
use tracing_subscriber::EnvFilter;

/// Bad flags, a bad config file, or a setting missing from both.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

#[derive(Parser)]
#[command(name = "tweetgeo", version, about = "Geolocation inference for tweet corpora")]
pub struct Cli {
    /// JSON config file with one section per module. Flags override it.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Log filter such as `info` or `tweetgeo=debug`; defaults to RUST_LOG,
    /// then `info`. Logs go to stderr as JSON lines.
    #[arg(long, global = true, value_name = "FILTER")]
    log_level: Option<String>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Resolve every tweet of a corpus into a GeoRecord line.
    Resolve(ResolveArgs),
    /// Score text-derived locations against GPS ground truth.
    Evaluate(EvaluateArgs),
    /// Write corpus report CSVs and a manifest.
    Stats(StatsArgs),
    /// Fetch full tweets for a list of ids, resumably.
    Hydrate(HydrateArgs),
    /// Build a gazetteer index snapshot from a CSV.
    BuildIndex(BuildIndexArgs),
    /// Inspect or compact a geocode cache.
    Cache(CacheArgs),
}

#[derive(Args, Default)]
pub struct GeocoderArgs {
    /// Geocoder base URL; repeat or comma-separate for several servers.
    /// [config: geocoder.endpoints]
    #[arg(long, value_name = "URL", value_delimiter = ',')]
    pub endpoints: Vec<String>,

    /// Request ceiling per endpoint, per second (default 1).
    /// [config: geocoder.qps]
    #[arg(long, value_name = "N")]
    pub qps: Option<u32>,

    /// Persistent response cache (append-only JSON lines).
    /// [config: geocoder.cache]
    #[arg(long, value_name = "PATH")]
    pub cache: Option<PathBuf>,

    /// Replay recorded responses from this file instead of calling a server.
    /// [config: geocoder.fixtures]
    #[arg(long, value_name = "PATH")]
    pub fixtures: Option<PathBuf>,

    /// Concurrent requests across all endpoints (default 64).
    /// [config: geocoder.max_in_flight]
    #[arg(long, value_name = "N")]
    pub max_in_flight: Option<usize>,

    /// [config: geocoder.user_agent]
    #[arg(long, value_name = "STRING")]
    pub user_agent: Option<String>,

    /// Language of returned place names (default `en`).
    /// [config: geocoder.accept_language]
    #[arg(long, value_name = "LANG")]
    pub accept_language: Option<String>,

    /// Per-request timeout (default 30). [config: geocoder.timeout_secs]
    #[arg(long, value_name = "SECS")]
    pub timeout_secs: Option<u64>,

    /// Backoff before each retry, comma-separated (default 1,4,16).
    /// [config: geocoder.retries]
    #[arg(long, value_name = "SECS", value_delimiter = ',')]
    pub retries: Option<Vec<u64>>,

    /// Slack added to each rate-limit window (default 20).
    /// [config: geocoder.window_guard_ms]
    #[arg(long, value_name = "MS")]
    pub window_guard_ms: Option<u64>,
}

#[derive(Args, Default)]
pub struct ExtractArgs {
    /// Gazetteer index snapshot, or a gazetteer CSV to index on load.
    /// [config: gazetteer.path]
    #[arg(long, value_name = "PATH")]
    pub gazetteer: Option<PathBuf>,

    /// Stop-word list, one per line (default: bundled English list).
    /// [config: toponyms.stopwords]
    #[arg(long, value_name = "PATH")]
    pub stopwords: Option<PathBuf>,

    /// Treat `#tag` as the word `tag` (default true).
    /// [config: toponyms.unwrap_hashtags]
    #[arg(long, value_name = "BOOL")]
    pub unwrap_hashtags: Option<bool>,

    /// What fills the text-derived slots (default majority).
    /// [config: resolve.vote]
    #[arg(long, value_enum)]
    pub vote: Option<VoteArg>,

    /// Resolve worker threads (default: CPU count). [config: resolve.workers]
    #[arg(long, value_name = "N")]
    pub workers: Option<usize>,
}

#[derive(Args, Default)]
pub struct CorpusArgs {
    /// Input compression (default auto). [config: corpus.compression]
    #[arg(long, value_enum)]
    pub compression: Option<CompressionArg>,

    /// Keep only tweets containing one of these words, one per line.
    /// [config: corpus.keywords]
    #[arg(long, value_name = "PATH")]
    pub keywords: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VoteArg {
    /// The majority-vote winner.
    Majority,
    /// Nothing; every resolved candidate is listed under mentioned_toponyms.
    All,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CompressionArg {
    Auto,
    None,
    Gzip,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Csv,
    Table,
}

#[derive(Args)]
pub struct ResolveArgs {
    /// Tweet corpus, JSON lines, optionally gzipped; `-` for stdin.
    #[arg(long = "in", value_name = "PATH")]
    pub input: PathBuf,

    /// GeoRecord output; `-` for stdout.
    #[arg(long, value_name = "PATH")]
    pub out: PathBuf,

    /// Run summary (default `<out>.summary.json`; none when writing to stdout).
    #[arg(long, value_name = "PATH")]
    pub summary: Option<PathBuf>,

    #[command(flatten)]
    pub corpus: CorpusArgs,
    #[command(flatten)]
    pub extract: ExtractArgs,
    #[command(flatten)]
    pub geocoder: GeocoderArgs,
}

#[derive(Args)]
pub struct EvaluateArgs {
    /// Tweet corpus to resolve before scoring. Only tweets with GPS and a
    /// profile location are resolved.
    #[arg(long = "in", value_name = "PATH", required_unless_present = "geo")]
    pub input: Option<PathBuf>,

    /// Score an existing GeoRecord file instead of resolving a corpus.
    #[arg(long, value_name = "PATH", conflicts_with = "input")]
    pub geo: Option<PathBuf>,

    /// Sample size (default 5000). [config: eval.sample_size]
    #[arg(short = 'n', long, value_name = "N")]
    pub sample_size: Option<usize>,

    /// Sampling seed (default 0). [config: eval.seed]
    #[arg(long, value_name = "N")]
    pub seed: Option<u64>,

    /// Output format (default csv). [config: eval.format]
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,

    /// Write the report here instead of stdout.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,

    #[command(flatten)]
    pub corpus: CorpusArgs,
    #[command(flatten)]
    pub extract: ExtractArgs,
    #[command(flatten)]
    pub geocoder: GeocoderArgs,
}

#[derive(Args)]
pub struct StatsArgs {
    /// Tweet corpus.
    #[arg(long = "in", value_name = "PATH")]
    pub input: PathBuf,

    /// GeoRecords for the corpus, in corpus order as `resolve` writes them.
    #[arg(long, value_name = "PATH")]
    pub geo: Option<PathBuf>,

    /// Report directory (created if missing).
    #[arg(long, value_name = "DIR", default_value = "reports")]
    pub out_dir: PathBuf,

    /// Descending tweet-count thresholds for the country table.
    /// [config: stats.country_thresholds]
    #[arg(long, value_name = "N,...", value_delimiter = ',')]
    pub country_thresholds: Option<Vec<u64>>,

    /// Descending tweet-count thresholds for the city table.
    /// [config: stats.city_thresholds]
    #[arg(long, value_name = "N,...", value_delimiter = ',')]
    pub city_thresholds: Option<Vec<u64>>,

    /// Entities per daily series (default 15). [config: stats.top_n]
    #[arg(long, value_name = "N")]
    pub top_n: Option<usize>,

    /// Slots consulted, in order, when attributing a tweet to a country or
    /// city (default geo,place,user_location,tweet_locations).
    /// [config: stats.attribution]
    #[arg(long, value_name = "SOURCE,...", value_delimiter = ',')]
    pub attribution: Option<Vec<String>>,

    #[command(flatten)]
    pub corpus: CorpusArgs,
}

#[derive(Args)]
pub struct HydrateArgs {
    /// Tweet ids, one per line.
    #[arg(long, value_name = "PATH")]
    pub ids: PathBuf,

    /// Hydrated tweets, JSON lines. Reruns resume from `<out>.checkpoint`.
    #[arg(long, value_name = "PATH")]
    pub out: PathBuf,

    /// Ids the service did not return (default `missing_ids.txt` beside the
    /// output).
    #[arg(long, value_name = "PATH")]
    pub missing: Option<PathBuf>,

    /// Lookup endpoint. The bearer token is read from TWITTER_BEARER_TOKEN.
    /// [config: hydrate.lookup_url]
    #[arg(long, value_name = "URL")]
    pub lookup_url: Option<String>,

    /// Ids per request, at most 100. [config: hydrate.batch_size]
    #[arg(long, value_name = "N")]
    pub batch_size: Option<usize>,

    /// Requests allowed per window (default 300). [config: hydrate.max_requests]
    #[arg(long, value_name = "N")]
    pub max_requests: Option<u32>,

    /// Rate-limit window (default 900). [config: hydrate.window_secs]
    #[arg(long, value_name = "SECS")]
    pub window_secs: Option<u64>,

    /// Concurrent requests (default 1). [config: hydrate.in_flight]
    #[arg(long, value_name = "N")]
    pub in_flight: Option<usize>,

    /// Per-request timeout (default 30). [config: hydrate.timeout_secs]
    #[arg(long, value_name = "SECS")]
    pub timeout_secs: Option<u64>,
}

#[derive(Args)]
pub struct BuildIndexArgs {
    /// Gazetteer CSV with a header row naming its columns.
    #[arg(long, value_name = "PATH")]
    pub csv: PathBuf,

    /// Snapshot to write.
    #[arg(long, value_name = "PATH")]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct CacheArgs {
    #[command(subcommand)]
    pub action: CacheAction,

    /// Cache file. [config: geocoder.cache]
    #[arg(long, value_name = "PATH", global = true)]
    pub cache: Option<PathBuf>,
}

#[derive(Subcommand)]
pub enum CacheAction {
    /// Print entry and log-line counts.
    Stats,
    /// Rewrite the log keeping one line per key.
    Compact,
    /// Print the cached places for a request key such as `search:paris`.
    Get { key: String },
}

fn init_logging(filter: Option<&str>) -> Result<(), UsageError> {
    let filter = match filter {
        Some(f) => EnvFilter::try_new(f).map_err(|e| UsageError(format!("--log-level: {e}")))?,
        None => EnvFilter::try_from_default_env().unwrap_or_else(|_| EnvFilter::new("info")),
    };
    tracing_subscriber::fmt()
        .json()
        .with_env_filter(filter)
        .with_writer(std::io::stderr)
        .init();
    Ok(())
}

fn error_kind(err: &anyhow::Error) -> (&'static str, u8) {
    if err.downcast_ref::<UsageError>().is_some() {
        return ("usage", 2);
    }
    match err.downcast_ref::<tweetgeo::Error>() {
        Some(tweetgeo::Error::Config(_)) => ("config", 2),
        Some(tweetgeo::Error::Read { .. }) => ("read", 1),
        Some(tweetgeo::Error::Write { .. }) => ("write", 1),
        Some(tweetgeo::Error::Io(_)) => ("io", 1),
        Some(tweetgeo::Error::Csv { .. }) => ("csv", 1),
        Some(tweetgeo::Error::Snapshot(_)) => ("snapshot", 1),
        Some(tweetgeo::Error::Json(_)) => ("json", 1),
        Some(tweetgeo::Error::EmptyEvalSet) => ("empty_eval_set", 1),
        Some(tweetgeo::Error::Hydrate(_)) => ("hydrate", 1),
        Some(tweetgeo::Error::Auth(_)) => ("auth", 1),
        None => ("runtime", 1),
    }
}

/// `a: b: c` over the error chain, skipping causes already quoted by the
/// error above them.
fn chain_message(e: &anyhow::Error) -> String {
    let mut out = String::new();
    for cause in e.chain() {
        let text = cause.to_string();
        if !out.contains(&text) {
            if !out.is_empty() {
                out.push_str(": ");
            }
            out.push_str(&text);
        }
    }
    out
}

fn report_failure(kind: &str, code: u8, message: &str) -> ExitCode {
    let summary = json!({"error": {"kind": kind, "exit_code": code, "message": message}});
    eprintln!("{summary}");
    ExitCode::from(code)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let _ = e.print();
            return report_failure("usage", 2, e.to_string().trim_end());
        }
    };
    if let Err(e) = init_logging(cli.log_level.as_deref()) {
        return report_failure("usage", 2, &e.0);
    }
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let (kind, code) = error_kind(&e);
            let message = chain_message(&e);
            tracing::error!(kind, error = %message, "command failed");
            report_failure(kind, code, &message)
        }
    }
}

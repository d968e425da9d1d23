//! JSON configuration file. Every key has a flag of the same name on the
//! subcommands that use it; a flag given on the command line wins.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::UsageError;

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub geocoder: GeocoderConfig,
    pub corpus: CorpusConfig,
    pub gazetteer: GazetteerConfig,
    pub toponyms: ToponymConfig,
    pub resolve: ResolveConfig,
    pub eval: EvalConfig,
    pub stats: StatsConfig,
    pub hydrate: HydrateConfig,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeocoderConfig {
    pub endpoints: Option<Vec<String>>,
    /// Requests per second, per endpoint.
    pub qps: Option<u32>,
    pub cache: Option<PathBuf>,
    /// Recorded responses to replay instead of calling a server.
    pub fixtures: Option<PathBuf>,
    pub max_in_flight: Option<usize>,
    pub user_agent: Option<String>,
    pub accept_language: Option<String>,
    pub timeout_secs: Option<u64>,
    /// Backoff before each retry, in seconds.
    pub retries: Option<Vec<u64>>,
    pub window_guard_ms: Option<u64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GazetteerConfig {
    /// Index snapshot or gazetteer CSV.
    pub path: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ToponymConfig {
    pub stopwords: Option<PathBuf>,
    pub unwrap_hashtags: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ResolveConfig {
    pub workers: Option<usize>,
    pub vote: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CorpusConfig {
    pub compression: Option<String>,
    pub keywords: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalConfig {
    pub sample_size: Option<usize>,
    pub seed: Option<u64>,
    pub format: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StatsConfig {
    pub country_thresholds: Option<Vec<u64>>,
    pub city_thresholds: Option<Vec<u64>>,
    pub top_n: Option<usize>,
    pub attribution: Option<Vec<String>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HydrateConfig {
    pub lookup_url: Option<String>,
    pub batch_size: Option<usize>,
    pub max_requests: Option<u32>,
    pub window_secs: Option<u64>,
    pub in_flight: Option<usize>,
    pub timeout_secs: Option<u64>,
}

impl Config {
    pub fn load(path: Option<&Path>) -> Result<Config, UsageError> {
        let Some(path) = path else {
            return Ok(Config::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| UsageError(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| UsageError(format!("invalid config {}: {e}", path.display())))
    }
}

/// The flag value if given, else the config value.
pub fn pick<T>(flag: Option<T>, config: &Option<T>) -> Option<T>
where
    T: Clone,
{
    flag.or_else(|| config.clone())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sections_parse() {
        let c: Config = serde_json::from_str(
            r#"{"geocoder": {"endpoints": ["http://a"], "qps": 40},
                "stats": {"top_n": 5}}"#,
        )
        .unwrap();
        assert_eq!(c.geocoder.qps, Some(40));
        assert_eq!(c.stats.top_n, Some(5));
        assert!(c.gazetteer.path.is_none());
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(serde_json::from_str::<Config>(r#"{"geocoder": {"qsp": 1}}"#).is_err());
        assert!(serde_json::from_str::<Config>(r#"{"geocodr": {}}"#).is_err());
    }

    #[test]
    fn flag_wins() {
        assert_eq!(pick(Some(3), &Some(4)), Some(3));
        assert_eq!(pick(None, &Some(4)), Some(4));
        assert_eq!(pick::<u32>(None, &None), None);
    }
}

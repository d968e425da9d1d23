use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_tweetgeo");

const CONFIG_KEYS: &[&str] = &[
    "corpus.compression",
    "corpus.keywords",
    "eval.format",
    "eval.sample_size",
    "eval.seed",
    "gazetteer.path",
    "geocoder.accept_language",
    "geocoder.cache",
    "geocoder.endpoints",
    "geocoder.fixtures",
    "geocoder.max_in_flight",
    "geocoder.qps",
    "geocoder.retries",
    "geocoder.timeout_secs",
    "geocoder.user_agent",
    "geocoder.window_guard_ms",
    "hydrate.batch_size",
    "hydrate.in_flight",
    "hydrate.lookup_url",
    "hydrate.max_requests",
    "hydrate.timeout_secs",
    "hydrate.window_secs",
    "resolve.vote",
    "resolve.workers",
    "stats.attribution",
    "stats.city_thresholds",
    "stats.country_thresholds",
    "stats.top_n",
    "toponyms.stopwords",
    "toponyms.unwrap_hashtags",
];

fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn fx(name: &str) -> String {
    fixtures().join(name).to_string_lossy().into_owned()
}

fn tweetgeo(args: &[&str]) -> Output {
    Command::new(BIN)
        .args(["--log-level", "off"])
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// The JSON error summary is the last stderr line.
fn error_summary(o: &Output) -> serde_json::Value {
    let stderr = String::from_utf8_lossy(&o.stderr);
    let last = stderr.lines().last().expect("stderr is empty");
    serde_json::from_str(last).unwrap_or_else(|e| panic!("{e}: {last}"))
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn every_config_key_is_documented_in_help() {
    let mut seen = BTreeSet::new();
    for sub in ["resolve", "evaluate", "stats", "hydrate", "build-index", "cache"] {
        let help = stdout(&tweetgeo(&[sub, "--help"]));
        let mut rest = help.as_str();
        while let Some(i) = rest.find("[config: ") {
            rest = &rest[i + 9..];
            let end = rest.find(']').unwrap();
            seen.insert(rest[..end].to_owned());
        }
    }
    let want: BTreeSet<String> = CONFIG_KEYS.iter().map(|s| s.to_string()).collect();
    assert_eq!(seen, want);
}

#[test]
fn exit_codes_and_error_summary() {
    assert_eq!(tweetgeo(&["--help"]).status.code(), Some(0));

    let o = tweetgeo(&["resolve", "--bogus"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(error_summary(&o)["error"]["exit_code"], 2);

    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.jsonl");
    let o = tweetgeo(&["resolve", "--in", &fx("corpus.jsonl"), "--out", path_str(&out), "--fixtures", &fx("nominatim.jsonl")]);
    assert_eq!(o.status.code(), Some(2), "missing gazetteer is a usage error");

    let o = tweetgeo(&[
        "resolve", "--in", "/definitely/not/here.jsonl", "--out", path_str(&out),
        "--gazetteer", &fx("gazetteer.csv"), "--fixtures", &fx("nominatim.jsonl"),
    ]);
    assert_eq!(o.status.code(), Some(1));
    let e = error_summary(&o);
    assert_eq!(e["error"]["kind"], "read");
    assert_eq!(e["error"]["exit_code"], 1);
    assert!(e["error"]["message"].as_str().unwrap().contains("/definitely/not/here.jsonl"));

    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, r#"{"geocoder": {"qqps": 3}}"#).unwrap();
    let o = tweetgeo(&["--config", path_str(&cfg), "evaluate", "--geo", &fx("golden_records.jsonl")]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn resolve_writes_records_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("records.jsonl");
    stdout(&tweetgeo(&[
        "resolve", "--in", &fx("corpus.jsonl"), "--out", path_str(&out),
        "--gazetteer", &fx("gazetteer.csv"), "--fixtures", &fx("nominatim.jsonl"), "--workers", "3",
    ]));
    assert!(std::fs::read(&out).unwrap() == std::fs::read(fixtures().join("golden_records.jsonl")).unwrap());
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("records.jsonl.summary.json")).unwrap()).unwrap();
    assert_eq!(summary["records_written"], 200);
    assert_eq!(summary["ingest"]["lines_read"], 200);
    assert_eq!(summary["resolve"]["geo"]["present"], 90);
}

#[test]
fn evaluate_from_records_and_from_corpus_agree() {
    let geo = stdout(&tweetgeo(&["evaluate", "--geo", &fx("golden_records.jsonl"), "-n", "40", "--seed", "7"]));
    let corpus = stdout(&tweetgeo(&[
        "evaluate", "--in", &fx("corpus.jsonl"), "-n", "40", "--seed", "7",
        "--gazetteer", &fx("gazetteer.csv"), "--fixtures", &fx("nominatim.jsonl"),
    ]));
    assert_eq!(geo, corpus);
    let mut lines = geo.lines();
    assert_eq!(lines.next(), Some("source,level,matches,samples,accuracy"));
    assert_eq!(lines.count(), 8);
    assert!(geo.contains(",40,"));

    let table = stdout(&tweetgeo(&["evaluate", "--geo", &fx("golden_records.jsonl"), "--format", "table"]));
    assert!(table.starts_with("Tweet field"));
}

#[test]
fn config_values_apply_and_flags_override_them() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("tweetgeo.json");
    std::fs::write(&cfg, r#"{"eval": {"sample_size": 10, "seed": 3}}"#).unwrap();
    let from_config = stdout(&tweetgeo(&["--config", path_str(&cfg), "evaluate", "--geo", &fx("golden_records.jsonl")]));
    assert!(from_config.contains(",10,"));
    let explicit = stdout(&tweetgeo(&["evaluate", "--geo", &fx("golden_records.jsonl"), "-n", "10", "--seed", "3"]));
    assert_eq!(from_config, explicit);
    let overridden = stdout(&tweetgeo(&["--config", path_str(&cfg), "evaluate", "--geo", &fx("golden_records.jsonl"), "-n", "5"]));
    assert!(overridden.contains(",5,"));
}

#[test]
fn stats_reports_match_expected() {
    let params: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(fixtures().join("stats_expected/params.json")).unwrap()).unwrap();
    let join = |k: &str| {
        params[k].as_array().unwrap().iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
    };
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("reports");
    let manifest = stdout(&tweetgeo(&[
        "stats", "--in", &fx("corpus.jsonl"), "--geo", &fx("golden_records.jsonl"),
        "--out-dir", path_str(&out),
        "--country-thresholds", &join("country_thresholds"),
        "--city-thresholds", &join("city_thresholds"),
        "--top-n", &params["top_n"].to_string(),
    ]));
    let manifest: serde_json::Value = serde_json::from_str(&manifest).unwrap();
    assert_eq!(manifest["total_tweets"], 200);
    for entry in std::fs::read_dir(fixtures().join("stats_expected")).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "csv") {
            let name = path.file_name().unwrap();
            let want = std::fs::read_to_string(&path).unwrap();
            let got = std::fs::read_to_string(out.join(name)).unwrap();
            assert_eq!(got, want, "{name:?}");
        }
    }
}

#[test]
fn build_index_and_cache_commands() {
    let dir = tempfile::tempdir().unwrap();
    let idx = dir.path().join("index.bin");
    let counts: serde_json::Value = serde_json::from_str(&stdout(&tweetgeo(&[
        "build-index", "--csv", &fx("gazetteer.csv"), "--out", path_str(&idx),
    ])))
    .unwrap();
    assert_eq!(counts["rows"], 2000);

    let cache = dir.path().join("cache.jsonl");
    let out = dir.path().join("r.jsonl");
    stdout(&tweetgeo(&[
        "resolve", "--in", &fx("corpus.jsonl"), "--out", path_str(&out),
        "--gazetteer", path_str(&idx), "--fixtures", &fx("nominatim.jsonl"), "--cache", path_str(&cache),
    ]));
    assert!(std::fs::read(&out).unwrap() == std::fs::read(fixtures().join("golden_records.jsonl")).unwrap());

    let stats: serde_json::Value =
        serde_json::from_str(&stdout(&tweetgeo(&["cache", "--cache", path_str(&cache), "stats"]))).unwrap();
    assert_eq!(stats["entries"], 170);
    let paris: serde_json::Value =
        serde_json::from_str(&stdout(&tweetgeo(&["cache", "--cache", path_str(&cache), "get", "search:paris"]))).unwrap();
    assert_eq!(paris[0]["country_code"], "fr");
    stdout(&tweetgeo(&["cache", "--cache", path_str(&cache), "compact"]));

    let missing = dir.path().join("absent.jsonl");
    assert_eq!(tweetgeo(&["cache", "--cache", path_str(&missing), "stats"]).status.code(), Some(2));
}

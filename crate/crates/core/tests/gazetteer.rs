mod common;

use std::sync::{Arc, OnceLock};
use std::time::Instant;

use proptest::prelude::*;
use tweetgeo::gazetteer::{normalize, GazetteerIndex};

#[test]
fn normalize_examples() {
    assert_eq!(normalize("  New   York "), "new york");
    assert_eq!(normalize("PARIS"), "paris");
    // Decomposed input comes back composed.
    assert_eq!(normalize("Sa\u{0303}o Paulo"), "s\u{e3}o paulo");
    assert_eq!(normalize("São Paulo").chars().count(), 9);
}

#[test]
fn five_rows_two_duplicates() {
    let csv = "name\nAustin\nParis\n  PARIS \nLondon\nLyon\n";
    let idx = GazetteerIndex::build_from_reader(csv.as_bytes()).unwrap();
    let counts = idx.counts();
    assert_eq!((counts.rows, counts.raw_names), (5, 5));
    assert_eq!(idx.entry_count(), 4);
}

#[test]
fn name_and_ascii_columns_both_indexed() {
    let csv = "Country,City,AccentCity\nbr,sao paulo,S\u{e3}o Paulo\nfr,paris,Paris\n";
    let idx = GazetteerIndex::build_from_reader(csv.as_bytes()).unwrap();
    assert!(idx.contains("sao paulo"));
    assert!(idx.contains("S\u{e3}o Paulo"));
    assert_eq!(idx.entry_count(), 3);
}

#[test]
fn header_only() {
    let idx = GazetteerIndex::build_from_reader("Country,City,AccentCity\n".as_bytes()).unwrap();
    assert_eq!(idx.entry_count(), 0);
}

#[test]
fn fixture_lookups() {
    let idx = common::fixture_index();
    assert!(idx.contains("New York"));
    assert!(idx.contains("  new   YORK"));
    assert!(!idx.contains("qwxzt"));
    assert!(idx.entry_count() > 1_500, "fixture has {} names", idx.entry_count());
}

#[test]
fn build_is_deterministic() {
    let path = common::fixtures().join("gazetteer.csv");
    let a = GazetteerIndex::build_from_csv(&path).unwrap();
    let b = GazetteerIndex::build_from_csv(&path).unwrap();
    let mut ea: Vec<&str> = a.entries().collect();
    let mut eb: Vec<&str> = b.entries().collect();
    ea.sort_unstable();
    eb.sort_unstable();
    assert_eq!(ea, eb);
}

#[test]
fn snapshot_matches_csv_build() {
    let dir = tempfile::tempdir().unwrap();
    let snap = dir.path().join("index.bin");
    let csv = common::fixtures().join("gazetteer.csv");
    let built = GazetteerIndex::build_from_csv(&csv).unwrap();
    built.write_snapshot(&snap).unwrap();
    let loaded = GazetteerIndex::load(&snap).unwrap();
    assert_eq!(loaded.entry_count(), built.entry_count());
    assert!(built.entries().all(|e| loaded.contains_normalized(e)));
    assert_eq!(GazetteerIndex::load(&csv).unwrap().entry_count(), built.entry_count());
}

#[test]
fn ten_thousand_lookups_on_a_large_index() {
    // Full-dump scale, synthesized.
    let names: Vec<String> = (0..3_200_000u32).map(|i| format!("place {i:07}")).collect();
    let idx = GazetteerIndex::from_names(&names);
    let probes: Vec<String> = (0..10_000u32)
        .map(|i| {
            let n = i.wrapping_mul(2_654_435_761) % 6_400_000;
            format!("Place {n:07}")
        })
        .collect();
    // Best of three; other tests share the machine.
    let mut elapsed = std::time::Duration::MAX;
    let mut hits = 0;
    for _ in 0..3 {
        let start = Instant::now();
        hits = probes.iter().filter(|p| idx.contains(p)).count();
        elapsed = elapsed.min(start.elapsed());
    }
    assert!(hits > 0 && hits < probes.len());
    eprintln!("10k lookups: {elapsed:?}");
    assert!(elapsed.as_millis() < 10, "10k lookups took {elapsed:?}");
}

fn shared_index() -> Arc<GazetteerIndex> {
    static INDEX: OnceLock<Arc<GazetteerIndex>> = OnceLock::new();
    INDEX.get_or_init(common::fixture_index).clone()
}

proptest! {
    #[test]
    fn normalize_is_idempotent(s in "\\PC{0,30}") {
        let once = normalize(&s);
        prop_assert_eq!(normalize(&once), once.clone());
    }

    #[test]
    fn ascii_normalization(s in "[ -~\t\n\x0b\x0c\r]{0,30}") {
        let want = s.to_lowercase().split_whitespace().collect::<Vec<_>>().join(" ");
        prop_assert_eq!(normalize(&s), want);
    }

    #[test]
    fn lookup_is_normalization_invariant(
        pick in 0usize..2000,
        upper in prop::collection::vec(any::<bool>(), 0..40),
        pad in "[ \t]{0,3}",
    ) {
        let idx = shared_index();
        let mut entries: Vec<&str> = idx.entries().collect();
        entries.sort_unstable();
        let name = entries[pick % entries.len()];
        let variant: String = name
            .chars()
            .zip(upper.iter().chain(std::iter::repeat(&false)))
            .map(|(c, &u)| if u { c.to_uppercase().collect::<String>() } else { c.to_string() })
            .collect::<String>()
            .replace(' ', "  ");
        let variant = format!("{pad}{variant}{pad}");
        prop_assert_eq!(idx.contains(&variant), idx.contains(&normalize(&variant)));
        prop_assert!(idx.contains(&variant), "{:?} from {:?}", variant, name);
    }

    #[test]
    fn random_phrases_are_normalization_invariant(s in "\\PC{0,20}") {
        let idx = shared_index();
        prop_assert_eq!(idx.contains(&s), idx.contains(&normalize(&s)));
    }
}

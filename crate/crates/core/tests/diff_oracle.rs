//! On-disk ingest and diff against an in-memory set oracle.

use std::collections::BTreeSet;
use std::io::Write;
use std::path::Path;

use doi_audit::snapshot::{diff_snapshots, ingest_snapshot, IngestOptions};
use proptest::prelude::*;

/// Canonical identifiers drawn from a small pool so duplicates and overlaps are common.
fn canonical() -> impl Strategy<Value = String> {
    ("[0-9]{1,2}", "[a-c0-9./-]{1,6}").prop_map(|(p, s)| format!("10.{p}/{s}"))
}

/// A spelling that must normalize back to `doi`.
fn spell(doi: &str, style: u8) -> String {
    match style % 4 {
        0 => doi.to_owned(),
        1 => doi.to_uppercase(),
        2 => {
            let first = doi.as_bytes()[0];
            format!("  %{:02X}{}\t", first, &doi[1..])
        }
        _ => doi.replacen('/', "%2f", 1),
    }
}

fn write_lines(path: &Path, lines: &[(String, u8)]) {
    let mut f = std::fs::File::create(path).unwrap();
    for (doi, style) in lines {
        writeln!(f, "{}", spell(doi, *style)).unwrap();
    }
}

fn read_all(path: &Path) -> Vec<String> {
    std::fs::read_to_string(path).unwrap().lines().map(str::to_owned).collect()
}

fn check(a: &[(String, u8)], b: &[(String, u8)], budget: usize) -> Result<(), TestCaseError> {
    let dir = tempfile::tempdir().unwrap();
    let (pa, pb) = (dir.path().join("a.txt"), dir.path().join("b.txt"));
    write_lines(&pa, a);
    write_lines(&pb, b);
    let opts = IngestOptions { chunk_budget: budget };
    let ha = ingest_snapshot(&pa, "A", &dir.path().join("s"), &opts).unwrap();
    let hb = ingest_snapshot(&pb, "B", &dir.path().join("s"), &opts).unwrap();
    let diff = diff_snapshots(&ha, &hb, &dir.path().join("d")).unwrap();
    diff.check_partition().unwrap();

    let sa: BTreeSet<String> = a.iter().map(|(d, _)| d.clone()).collect();
    let sb: BTreeSet<String> = b.iter().map(|(d, _)| d.clone()).collect();
    let only_a: Vec<String> = sa.difference(&sb).cloned().collect();
    let only_b: Vec<String> = sb.difference(&sa).cloned().collect();
    prop_assert_eq!(ha.unique_count, sa.len() as u64);
    prop_assert_eq!(hb.unique_count, sb.len() as u64);
    prop_assert_eq!(ha.record_count, a.len() as u64);
    prop_assert_eq!(read_all(&diff.only_in_a.path), only_a);
    prop_assert_eq!(read_all(&diff.only_in_b.path), only_b);
    prop_assert_eq!(diff.in_both, sa.intersection(&sb).count() as u64);
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn diff_matches_set_difference(
        a in proptest::collection::vec((canonical(), any::<u8>()), 0..300),
        b in proptest::collection::vec((canonical(), any::<u8>()), 0..300),
        budget in 256usize..4096,
    ) {
        check(&a, &b, budget)?;
    }

    #[test]
    fn identical_snapshots_have_empty_difference(
        a in proptest::collection::vec((canonical(), any::<u8>()), 1..200),
    ) {
        let b: Vec<(String, u8)> = a.iter().rev().map(|(d, s)| (d.clone(), s.wrapping_add(1))).collect();
        check(&a, &b, 512)?;
    }
}

#[test]
fn disjoint_snapshots() {
    let a: Vec<(String, u8)> = (0..500).map(|i| (format!("10.1/a{i}"), i as u8)).collect();
    let b: Vec<(String, u8)> = (0..500).map(|i| (format!("10.1/b{i}"), i as u8)).collect();
    check(&a, &b, 300).unwrap();
}

#[test]
fn synthetic_pair_matches_its_summary() {
    let dir = tempfile::tempdir().unwrap();
    let (pa, pb) = (dir.path().join("a.txt"), dir.path().join("b.txt"));
    let spec = doi_audit::synth::SynthSpec { seed: 11, size_a: 20_000, removed: 700, added: 300, prefixes: 40, variant_rate: 0.2 };
    let summary = doi_audit::synth::write_snapshot_pair(&spec, &pa, &pb).unwrap();
    let opts = IngestOptions { chunk_budget: 64 * 1024 };
    let ha = ingest_snapshot(&pa, "A", &dir.path().join("s"), &opts).unwrap();
    let hb = ingest_snapshot(&pb, "B", &dir.path().join("s"), &opts).unwrap();
    let diff = diff_snapshots(&ha, &hb, &dir.path().join("d")).unwrap();
    assert_eq!(ha.record_count, summary.lines_a);
    assert_eq!(ha.unique_count, summary.unique_a);
    assert_eq!(hb.unique_count, summary.unique_b);
    assert_eq!(diff.only_in_a.count, summary.only_in_a);
    assert_eq!(diff.only_in_b.count, summary.only_in_b);
    assert_eq!(diff.in_both, summary.in_both);
}

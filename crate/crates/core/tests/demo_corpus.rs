//! End-to-end run over the bundled demo corpus, checked against its
//! hand-assigned labels and the expectations recorded next to it.

use std::collections::BTreeMap;
use std::path::PathBuf;

use doi_audit::analytics::ChangePattern;
use doi_audit::classifier::DeletionClass;
use doi_audit::pipeline::{run_pipeline, RunConfig, RunOutput};
use serde_json::Value;

fn demo() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/demo")
}

fn config(out: &std::path::Path) -> RunConfig {
    let d = demo();
    let mut cfg = RunConfig::new(d.join("snapshot_2017.txt.gz"), d.join("snapshot_2021.jsonl"), out).offline(d.join("resolver"));
    cfg.label_a = "2017".into();
    cfg.label_b = "2021".into();
    cfg
}

fn run(out: &std::path::Path) -> RunOutput {
    run_pipeline(config(out)).expect("demo run succeeds")
}

fn expected() -> Value {
    serde_json::from_str(&std::fs::read_to_string(demo().join("expected.json")).unwrap()).unwrap()
}

fn labels() -> BTreeMap<String, String> {
    let mut rdr = csv::Reader::from_path(demo().join("labels.csv")).unwrap();
    rdr.records()
        .map(|r| {
            let r = r.unwrap();
            (r[0].to_owned(), r[1].to_owned())
        })
        .collect()
}

#[test]
fn every_candidate_matches_its_label() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path());
    let classified = out.classified.unwrap();
    let got: BTreeMap<String, String> = classified
        .records()
        .into_iter()
        .map(|r| (r.doi.as_str().to_owned(), r.class.map(DeletionClass::key).unwrap_or("unclassifiable").to_owned()))
        .collect();
    assert_eq!(got, labels());
}

#[test]
fn tables_match_recorded_expectations() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path());
    let exp = expected();
    let bundle = out.bundle.unwrap();
    bundle.check_identities().unwrap();

    let census = &bundle.diff_census;
    assert_eq!(census.only_in_a, exp["candidates"].as_u64().unwrap());
    assert_eq!(census.unique_a, exp["unique_a"].as_u64().unwrap());
    assert_eq!(census.unique_b, exp["unique_b"].as_u64().unwrap());
    assert_eq!(census.records_a, exp["records_a"].as_u64().unwrap());
    assert_eq!(census.malformed_a, exp["malformed_a"].as_u64().unwrap());
    assert_eq!(census.records_b, exp["records_b"].as_u64().unwrap());

    for (class, n) in &bundle.classes.rows {
        assert_eq!(*n, exp["classes"][class.key()].as_u64().unwrap(), "{class:?}");
    }
    assert_eq!(bundle.classes.deleted_total, exp["deleted"].as_u64().unwrap());
    assert_eq!(bundle.classes.excluded_non_crossref, exp["classes"]["excluded_non_crossref"].as_u64().unwrap());
    assert_eq!(bundle.classes.unclassifiable, exp["classes"]["unclassifiable"].as_u64().unwrap());

    for (i, p) in ChangePattern::ALL.iter().enumerate() {
        assert_eq!(bundle.patterns[i], exp["patterns"][p.key()].as_u64().unwrap(), "{p:?}");
    }
    assert_eq!(bundle.group_stats.groups(), exp["alias_groups"].as_u64().unwrap() as usize);
    let top = &bundle.top_primaries[0];
    assert_eq!(top.primary.as_str(), exp["top_primary"][0].as_str().unwrap());
    assert_eq!(top.count, exp["top_primary"][1].as_u64().unwrap());

    let rows: Vec<(String, u64, String, u64, String)> = bundle
        .prefixes
        .iter()
        .map(|r| (r.prefix.clone(), r.deleted_count, r.p1.to_string(), r.baseline_count, r.p2.to_string()))
        .collect();
    let want: Vec<(String, u64, String, u64, String)> = exp["prefixes"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| {
            (
                r["prefix"].as_str().unwrap().to_owned(),
                r["count"].as_u64().unwrap(),
                r["p1"].as_str().unwrap().to_owned(),
                r["baseline"].as_u64().unwrap(),
                r["p2"].as_str().unwrap().to_owned(),
            )
        })
        .collect();
    assert_eq!(rows, want);

    let (_, _, suffix_only) = bundle.edit_patterns.iter().find(|(p, _, _)| *p == ChangePattern::SuffixOnly).unwrap();
    assert_eq!(suffix_only[0].description, exp["top_edit_pattern"]["description"].as_str().unwrap());
    assert_eq!(suffix_only[0].count, exp["top_edit_pattern"]["count"].as_u64().unwrap());

    let queue: Vec<&str> = bundle.review_queue.iter().map(|r| r.doi.as_str()).collect();
    let want: Vec<&str> = exp["review_queue"].as_array().unwrap().iter().map(|v| v.as_str().unwrap()).collect();
    assert_eq!(queue, want);
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let (d1, d2) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let a = run(d1.path());
    let mut cfg = config(d2.path());
    cfg.concurrency = 1;
    let b = run_pipeline(cfg).unwrap();
    assert_eq!(a.report_files.len(), b.report_files.len());
    for (x, y) in a.report_files.iter().zip(&b.report_files) {
        assert_eq!(x.file_name(), y.file_name());
        assert_eq!(std::fs::read(x).unwrap(), std::fs::read(y).unwrap(), "{}", x.display());
    }
}

#[test]
fn rerun_skips_completed_stages() {
    let dir = tempfile::tempdir().unwrap();
    run(dir.path());
    let again = run(dir.path());
    assert!(again.stages.iter().all(|s| s.status == doi_audit::pipeline::StageStatus::Skipped), "{:?}", again.stages);
    assert!(again.bundle.is_some());
}

#[test]
fn changed_formats_rerun_only_the_report() {
    use doi_audit::pipeline::{Stage, StageStatus};
    let dir = tempfile::tempdir().unwrap();
    run(dir.path());
    let mut cfg = config(dir.path());
    cfg.formats = vec![doi_audit::report::ReportFormat::Csv];
    let out = run_pipeline(cfg).unwrap();
    for s in &out.stages {
        let want = if s.stage == Stage::Report { StageStatus::Ran } else { StageStatus::Skipped };
        assert_eq!(s.status, want, "{:?}", s.stage);
    }
}

//! Report tables and their CSV, JSON, and markdown renderings.
//!
//! [`ReportBundle::build`] turns the diff census and the classified set into
//! typed tables; [`ReportBundle::tables`] renders each one as a [`Table`]
//! and [`emit_report`] writes one file per table per format. Table bytes
//! depend only on their inputs; the run manifest is written separately.

mod table;

use std::collections::BTreeMap;
use std::io;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use table::{group_digits, Cell, Table};

use crate::analytics::{
    alias_group_stats, alias_pairs, bucket_label, doc_type_histogram, pattern_counts, prefix_table, rank_counts,
    similarity_histogram, summarize_edits, top_primaries, AnalyticsError, ChangePattern, EditSummary, GroupStats,
    Percent, PrefixRow, SimilarityGroup, SIM_BUCKETS,
};
use crate::classifier::{ClassifiedSet, DeletionClass, ReviewItem};
use crate::doi::NormalizedDoi;
use crate::fsutil::write_atomic;
use crate::resolvers::WorkRecord;
use crate::snapshot::{DiffSets, SnapshotHandle};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Csv,
    Json,
    Markdown,
}

impl ReportFormat {
    pub fn extension(self) -> &'static str {
        match self {
            ReportFormat::Csv => "csv",
            ReportFormat::Json => "json",
            ReportFormat::Markdown => "md",
        }
    }
}

impl FromStr for ReportFormat {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            "markdown" | "md" => Ok(ReportFormat::Markdown),
            other => Err(format!("unknown report format {other:?} (expected csv, json, or markdown)")),
        }
    }
}

/// Sizes of the two snapshots and of their difference and product sets.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiffCensus {
    pub label_a: String,
    pub label_b: String,
    pub unique_a: u64,
    pub unique_b: u64,
    pub only_in_a: u64,
    pub only_in_b: u64,
    pub in_both: u64,
    /// Valid records read per snapshot, duplicates included.
    #[serde(default)]
    pub records_a: u64,
    #[serde(default)]
    pub records_b: u64,
    #[serde(default)]
    pub malformed_a: u64,
    #[serde(default)]
    pub malformed_b: u64,
}

impl DiffCensus {
    /// Adds the raw line counts recorded at ingest.
    pub fn with_ingest(mut self, a: &SnapshotHandle, b: &SnapshotHandle) -> Self {
        self.records_a = a.record_count;
        self.records_b = b.record_count;
        self.malformed_a = a.malformed_count;
        self.malformed_b = b.malformed_count;
        self
    }
}

impl From<&DiffSets> for DiffCensus {
    fn from(d: &DiffSets) -> Self {
        DiffCensus {
            label_a: d.label_a.clone(),
            label_b: d.label_b.clone(),
            unique_a: d.unique_a,
            unique_b: d.unique_b,
            only_in_a: d.only_in_a.count,
            only_in_b: d.only_in_b.count,
            in_both: d.in_both,
            records_a: 0,
            records_b: 0,
            malformed_a: 0,
            malformed_b: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClassCensus {
    /// The six deleted groups in table order.
    pub rows: Vec<(DeletionClass, u64)>,
    pub deleted_total: u64,
    pub excluded_non_crossref: u64,
    pub unclassifiable: u64,
    pub candidates: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PrimaryRow {
    pub primary: NormalizedDoi,
    pub count: u64,
    pub record: WorkRecord,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AnomalyRow {
    pub doi: NormalizedDoi,
    pub class: String,
    pub anomaly: String,
}

/// Every table the pipeline reports.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportBundle {
    pub diff_census: DiffCensus,
    pub classes: ClassCensus,
    pub doc_types: Vec<(String, u64)>,
    pub group_stats: GroupStats,
    pub top_primaries: Vec<PrimaryRow>,
    pub prefixes: Vec<PrefixRow>,
    pub patterns: [u64; 3],
    pub similarity: [SimilarityGroup; 2],
    pub edit_patterns: Vec<(ChangePattern, u64, Vec<EditSummary>)>,
    pub review_queue: Vec<ReviewItem>,
    pub anomalies: Vec<AnomalyRow>,
}

impl ReportBundle {
    /// `baseline` holds per-prefix counts of snapshot A.
    pub fn build(
        census: DiffCensus,
        classified: &ClassifiedSet,
        baseline: &BTreeMap<String, u64>,
        top_k: usize,
    ) -> Result<Self, AnalyticsError> {
        let classes = ClassCensus {
            rows: DeletionClass::DELETED.iter().map(|&c| (c, classified.count(c))).collect(),
            deleted_total: classified.deleted_total(),
            excluded_non_crossref: classified.count(DeletionClass::ExcludedNonCrossref),
            unclassifiable: classified.unclassifiable,
            candidates: classified.candidates(),
        };
        let pairs = alias_pairs(classified)?;
        let group_stats = alias_group_stats(&pairs);

        let mut primary_records: BTreeMap<&NormalizedDoi, &WorkRecord> = BTreeMap::new();
        for ev in classified.evidence() {
            if let Some(p) = &ev.primary {
                if let Some(r) = p.metadata.record() {
                    primary_records.entry(&p.doi).or_insert(r);
                }
            }
        }
        let top = top_primaries(&group_stats, top_k)
            .into_iter()
            .map(|(primary, count)| {
                let record = primary_records.get(&primary).map(|r| (*r).clone()).unwrap_or_default();
                PrimaryRow { primary, count, record }
            })
            .collect();

        let suffix_groups = [ChangePattern::SuffixOnly, ChangePattern::PrefixAndSuffix];
        let counts = pattern_counts(&pairs);
        let edit_patterns = suffix_groups
            .into_iter()
            .map(|g| (g, counts[g as usize], summarize_edits(&pairs, g)))
            .collect();

        let mut anomalies = Vec::new();
        for a in classified.assignments.values() {
            let doi = &a.evidence.doi;
            match &a.outcome {
                Ok(c) => anomalies.extend(c.anomalies.iter().map(|an| AnomalyRow {
                    doi: doi.clone(),
                    class: c.class.key().to_owned(),
                    anomaly: an.key(),
                })),
                Err(u) => anomalies.push(AnomalyRow {
                    doi: doi.clone(),
                    class: "unclassifiable".to_owned(),
                    anomaly: serde_json::to_value(u).ok().and_then(|v| v.as_str().map(str::to_owned)).unwrap_or_default(),
                }),
            }
        }

        Ok(ReportBundle {
            diff_census: census,
            classes,
            doc_types: rank_counts(&doc_type_histogram(classified)),
            group_stats,
            top_primaries: top,
            prefixes: prefix_table(classified, baseline)?,
            patterns: counts,
            similarity: similarity_histogram(&pairs),
            edit_patterns,
            review_queue: classified.review_queue.clone(),
            anomalies,
        })
    }

    /// Count identities that must hold on every run: class counts sum to
    /// the candidates, patterns to the alias pairs, buckets to their group,
    /// and `p1` to 100 within rounding.
    pub fn check_identities(&self) -> Result<(), String> {
        let c = &self.classes;
        let classified = c.deleted_total + c.excluded_non_crossref + c.unclassifiable;
        if classified != c.candidates {
            return Err(format!("class counts sum to {classified}, candidates {}", c.candidates));
        }
        let pattern_total: u64 = self.patterns.iter().sum();
        if pattern_total != self.group_stats.pairs() {
            return Err(format!("patterns sum to {pattern_total}, alias pairs {}", self.group_stats.pairs()));
        }
        for g in &self.similarity {
            let sum: u64 = g.buckets.iter().sum();
            if sum != g.total || g.total != self.patterns[g.pattern as usize] {
                return Err(format!("{} buckets sum to {sum}, group size {}", g.pattern.key(), self.patterns[g.pattern as usize]));
            }
        }
        if !self.prefixes.is_empty() {
            let p1 = crate::analytics::p1_sum(&self.prefixes);
            if (p1 - 100.0).abs() > 0.01 {
                return Err(format!("p1 sums to {p1}"));
            }
        }
        Ok(())
    }

    /// All tables in emission order.
    pub fn tables(&self) -> Vec<Table> {
        vec![
            self.table_diff_census(),
            self.table_classes(),
            self.table_doc_types(),
            self.table_group_stats(),
            self.table_top_primaries(),
            self.table_prefixes(),
            self.table_patterns(),
            self.table_similarity(),
            self.table_edit_patterns(),
            self.table_review_queue(),
            self.table_anomalies(),
        ]
    }

    fn table_diff_census(&self) -> Table {
        let d = &self.diff_census;
        let row = |name: &str, a: u64, b: u64| {
            vec![
                Cell::text(name),
                Cell::Int(a),
                Cell::Pct(Percent::of(a, d.unique_a)),
                Cell::Int(b),
                Cell::Pct(Percent::of(b, d.unique_b)),
            ]
        };
        Table {
            name: "table1_diff_census",
            caption: format!("Basic statistics of the datasets ({} vs {})", d.label_a, d.label_b),
            columns: vec!["set", "count_a", "pct_a", "count_b", "pct_b"],
            rows: vec![
                row("Difference set", d.only_in_a, d.only_in_b),
                row("Product set", d.in_both, d.in_both),
                row("Overall", d.unique_a, d.unique_b),
            ],
            totals: vec![
                ("records_a", d.records_a),
                ("malformed_a", d.malformed_a),
                ("records_b", d.records_b),
                ("malformed_b", d.malformed_b),
            ],
        }
    }

    fn table_classes(&self) -> Table {
        let c = &self.classes;
        Table {
            name: "table2_classes",
            caption: format!("Number of deleted DOIs in each group (n={})", group_digits(c.deleted_total)),
            columns: vec!["rank", "group", "class", "count", "pct", "n"],
            rows: c
                .rows
                .iter()
                .enumerate()
                .map(|(i, &(class, count))| {
                    vec![
                        Cell::Int(i as u64 + 1),
                        Cell::text(class.label()),
                        Cell::text(class.key()),
                        Cell::Int(count),
                        Cell::Pct(Percent::of(count, c.deleted_total)),
                        Cell::Int(c.deleted_total),
                    ]
                })
                .collect(),
            totals: vec![
                ("deleted", c.deleted_total),
                ("excluded_non_crossref", c.excluded_non_crossref),
                ("unclassifiable", c.unclassifiable),
                ("candidates", c.candidates),
            ],
        }
    }

    fn table_doc_types(&self) -> Table {
        let n = self.classes.deleted_total;
        Table {
            name: "table3_doc_types",
            caption: format!("Document types of deleted DOIs (n={})", group_digits(n)),
            columns: vec!["rank", "type", "count", "pct", "n"],
            rows: self
                .doc_types
                .iter()
                .enumerate()
                .map(|(i, (ty, count))| {
                    vec![
                        Cell::Int(i as u64 + 1),
                        Cell::text(ty.as_str()),
                        Cell::Int(*count),
                        Cell::Pct(Percent::of(*count, n)),
                        Cell::Int(n),
                    ]
                })
                .collect(),
            totals: vec![("deleted", n)],
        }
    }

    fn table_group_stats(&self) -> Table {
        let s = &self.group_stats;
        Table {
            name: "alias_group_stats",
            caption: "Alias DOIs per Primary DOI".into(),
            columns: vec!["groups", "pairs", "min", "max", "median", "stddev"],
            rows: vec![vec![
                Cell::Int(s.groups() as u64),
                Cell::Int(s.pairs()),
                Cell::Int(s.min),
                Cell::Int(s.max),
                Cell::Real(s.median),
                Cell::Real(s.stddev),
            ]],
            totals: vec![],
        }
    }

    fn table_top_primaries(&self) -> Table {
        Table {
            name: "table4_top_primaries",
            caption: format!("{} Primary DOIs with the largest numbers of associated Alias DOIs", self.top_primaries.len()),
            columns: vec!["rank", "primary_doi", "count", "title", "container_title", "volume", "issue", "page", "type"],
            rows: self
                .top_primaries
                .iter()
                .enumerate()
                .map(|(i, p)| {
                    let r = &p.record;
                    vec![
                        Cell::Int(i as u64 + 1),
                        Cell::text(p.primary.as_str()),
                        Cell::Int(p.count),
                        Cell::opt(r.title.clone()),
                        Cell::opt(r.container_title.clone()),
                        Cell::opt(r.volume.clone()),
                        Cell::opt(r.issue.clone()),
                        Cell::opt(r.page.clone()),
                        Cell::opt(r.doc_type.clone()),
                    ]
                })
                .collect(),
            totals: vec![("groups", self.group_stats.groups() as u64)],
        }
    }

    fn table_prefixes(&self) -> Table {
        let n = self.classes.deleted_total;
        Table {
            name: "prefix_table",
            caption: format!("Prefixes of deleted DOIs (n={})", group_digits(n)),
            columns: vec!["rank", "prefix", "count", "p1", "baseline_count", "p2"],
            rows: self
                .prefixes
                .iter()
                .enumerate()
                .map(|(i, r)| {
                    vec![
                        Cell::Int(i as u64 + 1),
                        Cell::text(r.prefix.as_str()),
                        Cell::Int(r.deleted_count),
                        Cell::Pct(r.p1),
                        Cell::Int(r.baseline_count),
                        Cell::Pct(r.p2),
                    ]
                })
                .collect(),
            totals: vec![("deleted", n)],
        }
    }

    fn table_patterns(&self) -> Table {
        let n: u64 = self.patterns.iter().sum();
        Table {
            name: "table5_change_patterns",
            caption: format!("DOI name change patterns (n={})", group_digits(n)),
            columns: vec!["pattern", "key", "count", "pct", "n"],
            rows: ChangePattern::ALL
                .iter()
                .map(|&p| {
                    let c = self.patterns[p as usize];
                    vec![Cell::text(p.label()), Cell::text(p.key()), Cell::Int(c), Cell::Pct(Percent::of(c, n)), Cell::Int(n)]
                })
                .collect(),
            totals: vec![("alias_pairs", n)],
        }
    }

    fn table_similarity(&self) -> Table {
        let [so, ps] = &self.similarity;
        let mut rows: Vec<Vec<Cell>> = (0..SIM_BUCKETS)
            .map(|k| {
                vec![
                    Cell::text(bucket_label(k)),
                    Cell::Int(so.buckets[k]),
                    Cell::Pct(Percent::of(so.buckets[k], so.total)),
                    Cell::Int(ps.buckets[k]),
                    Cell::Pct(Percent::of(ps.buckets[k], ps.total)),
                ]
            })
            .collect();
        rows.push(vec![
            Cell::text("Overall"),
            Cell::Int(so.total),
            Cell::Pct(Percent::of(so.total, so.total)),
            Cell::Int(ps.total),
            Cell::Pct(Percent::of(ps.total, ps.total)),
        ]);
        Table {
            name: "table6_similarity",
            caption: "Distribution of similarity scores between Alias DOI and Primary DOI suffixes".into(),
            columns: vec!["bucket", "suffix_only_count", "suffix_only_pct", "prefix_and_suffix_count", "prefix_and_suffix_pct"],
            rows,
            totals: vec![],
        }
    }

    fn table_edit_patterns(&self) -> Table {
        let mut rows = Vec::new();
        for (group, n, summaries) in &self.edit_patterns {
            for s in summaries {
                rows.push(vec![
                    Cell::text(group.key()),
                    Cell::Int(s.rank as u64),
                    Cell::text(s.description.as_str()),
                    Cell::Int(s.count),
                    Cell::Pct(s.share),
                    Cell::Int(*n),
                    Cell::text(s.example.0.as_str()),
                    Cell::text(s.example.1.as_str()),
                ]);
            }
        }
        Table {
            name: "table7_edit_patterns",
            caption: "Patterns of changes in the suffix".into(),
            columns: vec!["group", "rank", "pattern", "count", "pct", "n", "example_alias_suffix", "example_primary_suffix"],
            rows,
            totals: self.edit_patterns.iter().map(|(g, n, _)| (g.key(), *n)).collect(),
        }
    }

    fn table_review_queue(&self) -> Table {
        Table {
            name: "review_queue",
            caption: "DOIs classified by a delete word, for manual landing-page review".into(),
            columns: vec!["doi", "matched_field", "matched_in", "matched_text", "landing_uri"],
            rows: self
                .review_queue
                .iter()
                .map(|r| {
                    vec![
                        Cell::text(r.doi.as_str()),
                        Cell::text(r.matched_field.key()),
                        Cell::text(r.matched_in.key()),
                        Cell::text(r.matched_text.as_str()),
                        Cell::opt(r.landing_uri.clone()),
                    ]
                })
                .collect(),
            totals: vec![],
        }
    }

    fn table_anomalies(&self) -> Table {
        Table {
            name: "anomalies",
            caption: "Anomalous and unclassifiable candidates".into(),
            columns: vec!["doi", "class", "anomaly"],
            rows: self
                .anomalies
                .iter()
                .map(|a| vec![Cell::text(a.doi.as_str()), Cell::text(a.class.as_str()), Cell::text(a.anomaly.as_str())])
                .collect(),
            totals: vec![],
        }
    }
}

/// Writes `<name>.<ext>` for every table and format into `dir`, plus a
/// combined `report.json` keyed by table name and a combined `report.md`.
/// Returns the paths written, in order.
pub fn emit_report(bundle: &ReportBundle, dir: &Path, formats: &[ReportFormat]) -> io::Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let tables = bundle.tables();
    let mut written = Vec::new();
    let mut put = |name: String, bytes: Vec<u8>| -> io::Result<()> {
        let path = dir.join(name);
        write_atomic(&path, &bytes)?;
        written.push(path);
        Ok(())
    };
    let mut formats = formats.to_vec();
    formats.sort();
    formats.dedup();
    for format in formats {
        let ext = format.extension();
        for t in &tables {
            let bytes = match format {
                ReportFormat::Csv => {
                    let mut buf = Vec::new();
                    t.write_csv(&mut buf).map_err(io::Error::other)?;
                    buf
                }
                ReportFormat::Json => json_bytes(t)?,
                ReportFormat::Markdown => t.to_markdown().into_bytes(),
            };
            put(format!("{}.{ext}", t.name), bytes)?;
        }
        match format {
            ReportFormat::Json => {
                let combined: BTreeMap<&str, &Table> = tables.iter().map(|t| (t.name, t)).collect();
                put("report.json".into(), json_bytes(&combined)?)?;
            }
            ReportFormat::Markdown => {
                let md: Vec<String> = tables.iter().map(Table::to_markdown).collect();
                put("report.md".into(), format!("# Deleted DOI audit\n\n{}", md.join("\n")).into_bytes())?;
            }
            ReportFormat::Csv => {}
        }
    }
    Ok(written)
}

fn json_bytes(v: &impl Serialize) -> io::Result<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(v).map_err(io::Error::other)?;
    bytes.push(b'\n');
    Ok(bytes)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn empty_bundle() -> ReportBundle {
        let census = DiffCensus {
            label_a: "a".into(),
            label_b: "b".into(),
            unique_a: 0,
            unique_b: 0,
            only_in_a: 0,
            only_in_b: 0,
            in_both: 0,
            records_a: 0,
            records_b: 0,
            malformed_a: 0,
            malformed_b: 0,
        };
        ReportBundle::build(census, &ClassifiedSet::default(), &BTreeMap::new(), 10).unwrap()
    }

    #[test]
    fn empty_analytics_emit_headers_only() {
        let dir = tempfile::tempdir().unwrap();
        let paths = emit_report(&empty_bundle(), dir.path(), &[ReportFormat::Csv]).unwrap();
        assert_eq!(paths.len(), 11);
        let t3 = std::fs::read_to_string(dir.path().join("table3_doc_types.csv")).unwrap();
        assert_eq!(t3, "rank,type,count,pct,n\r\n");
        let t2 = std::fs::read_to_string(dir.path().join("table2_classes.csv")).unwrap();
        assert_eq!(t2.lines().count(), 7);
    }

    #[test]
    fn combined_json_is_keyed_by_table() {
        let dir = tempfile::tempdir().unwrap();
        emit_report(&empty_bundle(), dir.path(), &[ReportFormat::Json, ReportFormat::Markdown]).unwrap();
        let v: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.path().join("report.json")).unwrap()).unwrap();
        let keys: Vec<&String> = v.as_object().unwrap().keys().collect();
        assert!(keys.iter().any(|k| *k == "table7_edit_patterns"));
        assert_eq!(keys.len(), 11);
        assert!(dir.path().join("report.md").exists());
    }

    #[test]
    fn format_parsing() {
        assert_eq!("markdown".parse::<ReportFormat>(), Ok(ReportFormat::Markdown));
        assert!("xml".parse::<ReportFormat>().is_err());
    }
}

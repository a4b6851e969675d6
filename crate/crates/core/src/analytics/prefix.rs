use std::collections::BTreeMap;

use serde::Serialize;

use super::{AnalyticsError, Percent};
use crate::classifier::ClassifiedSet;

/// Share of one prefix among deleted DOIs (`p1`) and among its own DOIs in
/// the baseline snapshot (`p2`).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PrefixRow {
    pub prefix: String,
    pub deleted_count: u64,
    pub baseline_count: u64,
    pub p1: Percent,
    pub p2: Percent,
}

/// Deleted-DOI counts per prefix.
pub fn deleted_by_prefix(classified: &ClassifiedSet) -> BTreeMap<String, u64> {
    let mut counts = BTreeMap::new();
    for (doi, a) in &classified.assignments {
        if a.class().is_some_and(|c| c.is_deleted()) {
            *counts.entry(doi.prefix().to_owned()).or_default() += 1;
        }
    }
    counts
}

/// One row per prefix among the deleted DOIs, sorted by deleted count
/// descending then prefix ascending.
///
/// ```
/// use std::collections::BTreeMap;
/// use doi_audit::analytics::prefix_rows;
///
/// let deleted = BTreeMap::from([("10.5555".to_owned(), 2)]);
/// let baseline = BTreeMap::from([("10.5555".to_owned(), 4)]);
/// let rows = prefix_rows(&deleted, &baseline).unwrap();
/// assert_eq!((rows[0].p1.to_string(), rows[0].p2.to_string()), ("100.00".into(), "50.00".into()));
/// ```
pub fn prefix_rows(
    deleted: &BTreeMap<String, u64>,
    baseline: &BTreeMap<String, u64>,
) -> Result<Vec<PrefixRow>, AnalyticsError> {
    let total: u64 = deleted.values().sum();
    let mut rows = Vec::with_capacity(deleted.len());
    for (prefix, &d) in deleted {
        let b = baseline.get(prefix).copied().unwrap_or(0);
        if b == 0 {
            return Err(AnalyticsError::MissingBaseline(prefix.clone()));
        }
        if d > b {
            return Err(AnalyticsError::InconsistentBaseline { prefix: prefix.clone(), deleted: d, baseline: b });
        }
        rows.push(PrefixRow {
            prefix: prefix.clone(),
            deleted_count: d,
            baseline_count: b,
            p1: Percent::of(d, total),
            p2: Percent::of(d, b),
        });
    }
    rows.sort_by(|x, y| y.deleted_count.cmp(&x.deleted_count).then_with(|| x.prefix.cmp(&y.prefix)));
    Ok(rows)
}

/// Prefix table of the deleted DOIs in `classified` against the baseline
/// snapshot's per-prefix counts.
pub fn prefix_table(
    classified: &ClassifiedSet,
    baseline: &BTreeMap<String, u64>,
) -> Result<Vec<PrefixRow>, AnalyticsError> {
    prefix_rows(&deleted_by_prefix(classified), baseline)
}

/// Unrounded sum of `p1` over the rows, in percent.
pub fn p1_sum(rows: &[PrefixRow]) -> f64 {
    rows.iter().map(|r| r.p1.exact()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn map(entries: &[(&str, u64)]) -> BTreeMap<String, u64> {
        entries.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    #[test]
    fn wiley_row() {
        let deleted = map(&[("10.1002", 94_471), ("10.9999", 708_282 - 94_471)]);
        let baseline = map(&[("10.1002", 4_718_360), ("10.9999", 80_000_000)]);
        let rows = prefix_rows(&deleted, &baseline).unwrap();
        let wiley = rows.iter().find(|r| r.prefix == "10.1002").unwrap();
        assert_eq!(wiley.p1.to_string(), "13.34");
        assert_eq!(wiley.p2.to_string(), "2.00");
        assert!((p1_sum(&rows) - 100.0).abs() <= 0.01);
    }

    #[test]
    fn ordering_and_errors() {
        let rows = prefix_rows(&map(&[("10.2", 1), ("10.1", 1), ("10.3", 5)]), &map(&[("10.1", 9), ("10.2", 9), ("10.3", 9)])).unwrap();
        let order: Vec<&str> = rows.iter().map(|r| r.prefix.as_str()).collect();
        assert_eq!(order, ["10.3", "10.1", "10.2"]);
        assert_eq!(
            prefix_rows(&map(&[("10.7", 1)]), &map(&[])),
            Err(AnalyticsError::MissingBaseline("10.7".into()))
        );
        assert!(prefix_rows(&map(&[("10.7", 3)]), &map(&[("10.7", 2)])).is_err());
        assert!(prefix_rows(&map(&[]), &map(&[])).unwrap().is_empty());
    }
}

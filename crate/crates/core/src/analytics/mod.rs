//! Statistics over a classified candidate set.
//!
//! * document types of the deleted DOIs,
//! * alias-group sizes and the largest primaries,
//! * per-prefix shares `p1` (of all deleted DOIs) and `p2` (of the prefix's
//!   own DOIs in the baseline snapshot),
//! * for each alias/primary pair: which DOI components changed, the suffix
//!   similarity, and the character edits between the suffixes.

mod editscript;
mod levenshtein;
mod prefix;
mod stats;

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;
use serde::{Serialize, Serializer};

pub use editscript::{edit_script, ApplyError, EditKind, EditOp, EditScript, SigOp, Signature};
pub use levenshtein::{bucket_label, levenshtein, suffix_similarity, Similarity, SIM_BUCKETS};
pub use prefix::{deleted_by_prefix, p1_sum, prefix_rows, prefix_table, PrefixRow};
pub use stats::{alias_group_stats, top_primaries, GroupStats};

use crate::classifier::{ClassifiedSet, DeletionClass};
use crate::doi::NormalizedDoi;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AnalyticsError {
    #[error("alias and primary are the same DOI: {0}")]
    IdenticalPair(String),
    #[error("prefix {0} has deleted DOIs but no baseline count")]
    MissingBaseline(String),
    #[error("prefix {prefix} has {deleted} deleted DOIs but only {baseline} in the baseline")]
    InconsistentBaseline { prefix: String, deleted: u64, baseline: u64 },
}

/// `count / denom` as a percentage, rounded half-up to two decimals for
/// display. The raw operands are kept so every figure is recomputable.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Percent {
    pub count: u64,
    pub denom: u64,
}

impl Percent {
    pub fn of(count: u64, denom: u64) -> Self {
        Percent { count, denom }
    }

    /// Rounded value in hundredths of a percent; 0 for an empty denominator.
    pub fn hundredths(self) -> u64 {
        if self.denom == 0 {
            return 0;
        }
        let (c, d) = (self.count as u128, self.denom as u128);
        ((c * 20_000 + d) / (2 * d)) as u64
    }

    pub fn exact(self) -> f64 {
        if self.denom == 0 {
            return 0.0;
        }
        self.count as f64 * 100.0 / self.denom as f64
    }
}

impl fmt::Display for Percent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let h = self.hundredths();
        write!(f, "{}.{:02}", h / 100, h % 100)
    }
}

impl Serialize for Percent {
    /// A JSON number with exactly two decimals.
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let raw = serde_json::value::RawValue::from_string(self.to_string()).map_err(serde::ser::Error::custom)?;
        raw.serialize(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ChangePattern {
    SuffixOnly,
    PrefixAndSuffix,
    PrefixOnly,
}

impl ChangePattern {
    pub const ALL: [ChangePattern; 3] = [ChangePattern::SuffixOnly, ChangePattern::PrefixAndSuffix, ChangePattern::PrefixOnly];

    pub fn label(self) -> &'static str {
        match self {
            ChangePattern::SuffixOnly => "Only the suffix changed",
            ChangePattern::PrefixAndSuffix => "Both the prefix and the suffix changed",
            ChangePattern::PrefixOnly => "Only the prefix changed",
        }
    }

    pub fn key(self) -> &'static str {
        match self {
            ChangePattern::SuffixOnly => "suffix_only",
            ChangePattern::PrefixAndSuffix => "prefix_and_suffix",
            ChangePattern::PrefixOnly => "prefix_only",
        }
    }

    pub fn suffix_changed(self) -> bool {
        self != ChangePattern::PrefixOnly
    }
}

/// Which components differ between two distinct DOIs.
///
/// ```
/// use doi_audit::analytics::{change_pattern, ChangePattern};
/// let p = |s: &str| s.parse().unwrap();
/// assert_eq!(change_pattern(&p("10.14359/15303"), &p("10.14359/15306")).unwrap(), ChangePattern::SuffixOnly);
/// assert_eq!(change_pattern(&p("10.2523/x"), &p("10.2118/x")).unwrap(), ChangePattern::PrefixOnly);
/// ```
pub fn change_pattern(alias: &NormalizedDoi, primary: &NormalizedDoi) -> Result<ChangePattern, AnalyticsError> {
    match (alias.prefix() == primary.prefix(), alias.suffix() == primary.suffix()) {
        (true, true) => Err(AnalyticsError::IdenticalPair(alias.as_str().to_owned())),
        (true, false) => Ok(ChangePattern::SuffixOnly),
        (false, false) => Ok(ChangePattern::PrefixAndSuffix),
        (false, true) => Ok(ChangePattern::PrefixOnly),
    }
}

/// An alias DOI and its primary. `sim` and `edits` describe the suffix
/// change and are present exactly when the suffix changed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AliasPair {
    pub alias: NormalizedDoi,
    pub primary: NormalizedDoi,
    pub pattern: ChangePattern,
    pub sim: Option<Similarity>,
    pub edits: Option<EditScript>,
}

impl AliasPair {
    pub fn new(alias: NormalizedDoi, primary: NormalizedDoi) -> Result<Self, AnalyticsError> {
        let pattern = change_pattern(&alias, &primary)?;
        let (sim, edits) = if pattern.suffix_changed() {
            (
                Some(Similarity::between(alias.suffix(), primary.suffix())),
                Some(edit_script(alias.suffix(), primary.suffix())),
            )
        } else {
            (None, None)
        };
        Ok(AliasPair { alias, primary, pattern, sim, edits })
    }
}

/// Pairs for every Alias-class DOI whose primary is known, in alias order.
pub fn alias_pairs(classified: &ClassifiedSet) -> Result<Vec<AliasPair>, AnalyticsError> {
    let raw: Vec<(NormalizedDoi, NormalizedDoi)> = classified
        .assignments
        .iter()
        .filter(|(_, a)| a.class() == Some(DeletionClass::Alias))
        .filter_map(|(doi, a)| a.evidence.primary.as_ref().map(|p| (doi.clone(), p.doi.clone())))
        .collect();
    raw.into_par_iter().map(|(a, p)| AliasPair::new(a, p)).collect()
}

/// Pair counts per change pattern, in [`ChangePattern::ALL`] order.
pub fn pattern_counts(pairs: &[AliasPair]) -> [u64; 3] {
    let mut counts = [0; 3];
    for p in pairs {
        counts[p.pattern as usize] += 1;
    }
    counts
}

/// Similarity bucket counts for one suffix-changed pattern group.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SimilarityGroup {
    pub pattern: ChangePattern,
    pub buckets: [u64; SIM_BUCKETS],
    pub total: u64,
}

/// One group each for [`ChangePattern::SuffixOnly`] and
/// [`ChangePattern::PrefixAndSuffix`].
pub fn similarity_histogram(pairs: &[AliasPair]) -> [SimilarityGroup; 2] {
    let mut groups = [ChangePattern::SuffixOnly, ChangePattern::PrefixAndSuffix]
        .map(|pattern| SimilarityGroup { pattern, buckets: [0; SIM_BUCKETS], total: 0 });
    for p in pairs {
        let (Some(sim), Some(g)) = (p.sim, groups.iter_mut().find(|g| g.pattern == p.pattern)) else {
            continue;
        };
        g.buckets[sim.bucket()] += 1;
        g.total += 1;
    }
    groups
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EditSummary {
    pub rank: usize,
    pub description: String,
    pub signature: Signature,
    pub count: u64,
    pub share: Percent,
    /// Alias and primary suffix of the first pair (in alias order) with this
    /// signature.
    pub example: (String, String),
}

/// Edit signatures of one pattern group, most frequent first; ties are
/// ordered by signature.
pub fn summarize_edits(pairs: &[AliasPair], pattern: ChangePattern) -> Vec<EditSummary> {
    let mut group: Vec<&AliasPair> = pairs.iter().filter(|p| p.pattern == pattern).collect();
    group.sort_by(|a, b| a.alias.cmp(&b.alias));
    let total = group.len() as u64;
    let mut tally: BTreeMap<Signature, (u64, &AliasPair)> = BTreeMap::new();
    for p in &group {
        let Some(edits) = &p.edits else { continue };
        tally.entry(edits.signature()).or_insert((0, p)).0 += 1;
    }
    let mut ranked: Vec<(Signature, u64, &AliasPair)> = tally.into_iter().map(|(s, (c, p))| (s, c, p)).collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    ranked
        .into_iter()
        .enumerate()
        .map(|(i, (signature, count, p))| EditSummary {
            rank: i + 1,
            description: signature.to_string(),
            signature,
            count,
            share: Percent::of(count, total),
            example: (p.alias.suffix().to_owned(), p.primary.suffix().to_owned()),
        })
        .collect()
}

/// Placeholder type for deleted DOIs without retrievable metadata.
pub const UNKNOWN_TYPE: &str = "unknown";

/// Document type counts over deleted DOIs, using each DOI's own metadata
/// record or else its primary's.
pub fn doc_type_histogram(classified: &ClassifiedSet) -> BTreeMap<String, u64> {
    let mut counts = BTreeMap::new();
    for a in classified.assignments.values() {
        if !a.class().is_some_and(|c| c.is_deleted()) {
            continue;
        }
        let ev = &a.evidence;
        let ty = ev
            .metadata
            .as_ref()
            .and_then(|m| m.record())
            .and_then(|r| r.doc_type.clone())
            .or_else(|| ev.primary.as_ref().and_then(|p| p.metadata.record()).and_then(|r| r.doc_type.clone()))
            .unwrap_or_else(|| UNKNOWN_TYPE.to_owned());
        *counts.entry(ty).or_default() += 1;
    }
    counts
}

/// Histogram entries by count descending, then name.
pub fn rank_counts(counts: &BTreeMap<String, u64>) -> Vec<(String, u64)> {
    let mut v: Vec<(String, u64)> = counts.iter().map(|(k, &c)| (k.clone(), c)).collect();
    v.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doi(s: &str) -> NormalizedDoi {
        s.parse().unwrap()
    }

    #[test]
    fn percent_rounding() {
        assert_eq!(Percent::of(94_471, 708_282).to_string(), "13.34");
        assert_eq!(Percent::of(94_471, 4_718_360).to_string(), "2.00");
        assert_eq!(Percent::of(1, 8).to_string(), "12.50");
        // 1/800 = 0.125% rounds half up
        assert_eq!(Percent::of(1, 800).to_string(), "0.13");
        assert_eq!(Percent::of(3, 3).to_string(), "100.00");
        assert_eq!(Percent::of(0, 0).to_string(), "0.00");
        assert_eq!(serde_json::to_string(&Percent::of(1, 2)).unwrap(), "50.00");
    }

    #[test]
    fn pair_invariants() {
        assert_eq!(
            AliasPair::new(doi("10.1/A"), doi("10.1/a")),
            Err(AnalyticsError::IdenticalPair("10.1/a".into()))
        );
        let p = AliasPair::new(doi("10.2523/x"), doi("10.2118/x")).unwrap();
        assert!(p.sim.is_none() && p.edits.is_none());
        let p = AliasPair::new(doi("10.2307/abc"), doi("10.1090/xyz")).unwrap();
        assert_eq!(p.pattern, ChangePattern::PrefixAndSuffix);
        assert_eq!(p.sim.unwrap().value(), 0.0);
    }

    #[test]
    fn histogram_and_summary() {
        let pairs: Vec<AliasPair> = [
            ("10.1/15303", "10.1/15306"),
            ("10.1/15304", "10.1/15306"),
            ("10.1//s1", "10.1/s1"),
            ("10.1//s2", "10.1/s2"),
            ("10.1/q", "10.2/q"),
            ("10.1/abc", "10.2/xyz"),
        ]
        .iter()
        .map(|(a, p)| AliasPair::new(doi(a), doi(p)).unwrap())
        .collect();
        assert_eq!(pattern_counts(&pairs), [4, 1, 1]);
        let [so, ps] = similarity_histogram(&pairs);
        assert_eq!(so.total, 4);
        assert_eq!(so.buckets[7], 2); // 0.8
        assert_eq!(so.buckets[6], 2); // "/s1" vs "s1": 2/3
        assert_eq!(ps.buckets[0], 1);
        let sums = summarize_edits(&pairs, ChangePattern::SuffixOnly);
        assert_eq!(sums[0].description, "Delete a slash (/) once.");
        assert_eq!(sums[0].count, 2);
        assert_eq!(sums[0].example, ("/s1".to_owned(), "s1".to_owned()));
        assert_eq!(sums.iter().map(|s| s.count).sum::<u64>(), 4);
        assert!(summarize_edits(&[], ChangePattern::SuffixOnly).is_empty());
    }
}

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::AliasPair;
use crate::doi::NormalizedDoi;

/// Number of aliases per primary, with summary statistics over the group
/// sizes. All summary fields are zero when there are no groups.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GroupStats {
    pub min: u64,
    pub max: u64,
    pub median: f64,
    /// Population standard deviation.
    pub stddev: f64,
    pub group_sizes: BTreeMap<NormalizedDoi, u64>,
}

impl GroupStats {
    pub fn groups(&self) -> usize {
        self.group_sizes.len()
    }

    pub fn pairs(&self) -> u64 {
        self.group_sizes.values().sum()
    }
}

/// ```
/// use doi_audit::analytics::{alias_group_stats, AliasPair};
/// let p = |a: &str| AliasPair::new(a.parse().unwrap(), "10.14359/15306".parse().unwrap()).unwrap();
/// let stats = alias_group_stats(&[p("10.14359/15303"), p("10.14359/15304"), p("10.14359/15305")]);
/// assert_eq!((stats.min, stats.max, stats.median), (3, 3, 3.0));
/// ```
pub fn alias_group_stats(pairs: &[AliasPair]) -> GroupStats {
    let mut group_sizes: BTreeMap<NormalizedDoi, u64> = BTreeMap::new();
    for p in pairs {
        *group_sizes.entry(p.primary.clone()).or_default() += 1;
    }
    if group_sizes.is_empty() {
        return GroupStats::default();
    }
    let mut sizes: Vec<u64> = group_sizes.values().copied().collect();
    sizes.sort_unstable();
    let n = sizes.len();
    let median = if n % 2 == 1 {
        sizes[n / 2] as f64
    } else {
        (sizes[n / 2 - 1] + sizes[n / 2]) as f64 / 2.0
    };
    let mean = sizes.iter().sum::<u64>() as f64 / n as f64;
    let var = sizes.iter().map(|&s| (s as f64 - mean).powi(2)).sum::<f64>() / n as f64;
    GroupStats {
        min: sizes[0],
        max: sizes[n - 1],
        median,
        stddev: var.sqrt(),
        group_sizes,
    }
}

/// The `k` largest groups: count descending, then primary DOI ascending.
pub fn top_primaries(stats: &GroupStats, k: usize) -> Vec<(NormalizedDoi, u64)> {
    let mut ranked: Vec<(NormalizedDoi, u64)> = stats.group_sizes.iter().map(|(d, &c)| (d.clone(), c)).collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    ranked.truncate(k);
    ranked
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair(alias: &str, primary: &str) -> AliasPair {
        AliasPair::new(alias.parse().unwrap(), primary.parse().unwrap()).unwrap()
    }

    #[test]
    fn even_median_and_population_stddev() {
        // groups of sizes 1, 1, 2, 4
        let mut pairs = vec![pair("10.1/a", "10.1/p"), pair("10.1/b", "10.1/q")];
        pairs.extend((0..2).map(|i| pair(&format!("10.1/r{i}"), "10.1/r")));
        pairs.extend((0..4).map(|i| pair(&format!("10.1/s{i}"), "10.1/s")));
        let s = alias_group_stats(&pairs);
        assert_eq!((s.min, s.max, s.median), (1, 4, 1.5));
        // mean 2, squared deviations 1+1+0+4, population variance 1.5
        assert!((s.stddev - 1.5f64.sqrt()).abs() < 1e-12);
        assert_eq!(s.pairs(), 8);
    }

    #[test]
    fn empty() {
        let s = alias_group_stats(&[]);
        assert_eq!(s.groups(), 0);
        assert!(top_primaries(&s, 3).is_empty());
    }

    #[test]
    fn ties_break_on_primary() {
        let pairs = [pair("10.1/x1", "10.1/b"), pair("10.1/x2", "10.1/a"), pair("10.1/x3", "10.1/c"), pair("10.1/x4", "10.1/c")];
        let top = top_primaries(&alias_group_stats(&pairs), 10);
        let names: Vec<(&str, u64)> = top.iter().map(|(d, c)| (d.as_str(), *c)).collect();
        assert_eq!(names, [("10.1/c", 2), ("10.1/a", 1), ("10.1/b", 1)]);
        assert_eq!(top_primaries(&alias_group_stats(&pairs), 1).len(), 1);
    }
}

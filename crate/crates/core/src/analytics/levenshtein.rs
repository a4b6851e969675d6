use serde::{Deserialize, Serialize};

/// Unit-cost edit distance over Unicode scalar values.
///
/// Two-row dynamic programme after stripping the common prefix and suffix,
/// so memory is linear in the shorter remaining string.
pub fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    levenshtein_chars(&a, &b)
}

pub(crate) fn levenshtein_chars(a: &[char], b: &[char]) -> usize {
    let pre = a.iter().zip(b).take_while(|(x, y)| x == y).count();
    let (a, b) = (&a[pre..], &b[pre..]);
    let suf = a.iter().rev().zip(b.iter().rev()).take_while(|(x, y)| x == y).count();
    let (a, b) = (&a[..a.len() - suf], &b[..b.len() - suf]);
    let (long, short) = if a.len() >= b.len() { (a, b) } else { (b, a) };
    if short.is_empty() {
        return long.len();
    }
    let mut prev: Vec<usize> = (0..=short.len()).collect();
    let mut cur = vec![0; short.len() + 1];
    for (i, &lc) in long.iter().enumerate() {
        cur[0] = i + 1;
        for (j, &sc) in short.iter().enumerate() {
            let sub = prev[j] + usize::from(lc != sc);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[short.len()]
}

/// Edit distance together with the normalizing length, kept as integers so
/// bucket boundaries are decided exactly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Similarity {
    pub distance: usize,
    pub max_len: usize,
}

/// Number of similarity buckets; bucket `k` covers `(k/10, (k+1)/10]`, except
/// that the first also includes 0 and the last excludes 1.
pub const SIM_BUCKETS: usize = 10;

impl Similarity {
    pub fn between(a: &str, b: &str) -> Self {
        let a: Vec<char> = a.chars().collect();
        let b: Vec<char> = b.chars().collect();
        Similarity {
            distance: levenshtein_chars(&a, &b),
            max_len: a.len().max(b.len()),
        }
    }

    /// `1 - distance / max_len`; 1.0 for two empty strings.
    pub fn value(self) -> f64 {
        if self.max_len == 0 {
            return 1.0;
        }
        (self.max_len - self.distance) as f64 / self.max_len as f64
    }

    /// Bucket index in `0..SIM_BUCKETS`. Identical strings (similarity 1)
    /// land in the last bucket.
    pub fn bucket(self) -> usize {
        if self.max_len == 0 {
            return SIM_BUCKETS - 1;
        }
        let m = self.max_len;
        let same = m - self.distance;
        // smallest k with same/m <= k/10
        let k = (SIM_BUCKETS * same).div_ceil(m);
        k.clamp(1, SIM_BUCKETS) - 1
    }
}

/// Normalized suffix similarity in `[0, 1]`.
///
/// ```
/// use doi_audit::analytics::suffix_similarity;
/// assert_eq!(suffix_similarity("15303", "15306"), 0.8);
/// assert_eq!(suffix_similarity("abc", "abc"), 1.0);
/// ```
pub fn suffix_similarity(s1: &str, s2: &str) -> f64 {
    Similarity::between(s1, s2).value()
}

/// Label of a bucket as printed in reports.
pub fn bucket_label(k: usize) -> String {
    match k {
        0 => "0 <= sim <= 0.1".to_owned(),
        k if k == SIM_BUCKETS - 1 => "0.9 < sim < 1.0".to_owned(),
        k => format!("0.{k} < sim <= 0.{}", k + 1),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn distances() {
        assert_eq!(levenshtein("", ""), 0);
        assert_eq!(levenshtein("abc", ""), 3);
        assert_eq!(levenshtein("kitten", "sitting"), 3);
        assert_eq!(levenshtein("15303", "15306"), 1);
        assert_eq!(levenshtein("/s12445-012-0033-7", "s12445-012-0033-7"), 1);
        assert_eq!(levenshtein("é1", "e1"), 1);
    }

    #[test]
    fn similarity_values() {
        assert_eq!(suffix_similarity("15303", "15306"), 0.8);
        let s = suffix_similarity("/s12445-012-0033-7", "s12445-012-0033-7");
        assert!((s - (1.0 - 1.0 / 18.0)).abs() < 1e-12);
    }

    #[test]
    fn bucket_boundaries() {
        let b = |distance, max_len| Similarity { distance, max_len }.bucket();
        assert_eq!(b(10, 10), 0); // 0.0
        assert_eq!(b(9, 10), 0); // 0.1 closed upper bound
        assert_eq!(b(89, 100), 1); // 0.11
        assert_eq!(b(1, 5), 7); // 0.8 -> (0.7, 0.8]
        assert_eq!(b(1, 10), 8); // 0.9 -> (0.8, 0.9]
        assert_eq!(b(1, 18), 9); // 0.944
        assert_eq!(b(0, 4), 9);
    }

    #[test]
    fn labels() {
        assert_eq!(bucket_label(0), "0 <= sim <= 0.1");
        assert_eq!(bucket_label(7), "0.7 < sim <= 0.8");
        assert_eq!(bucket_label(8), "0.8 < sim <= 0.9");
        assert_eq!(bucket_label(9), "0.9 < sim < 1.0");
    }
}

//! Seeded synthetic snapshot pairs for load tests and oracle checks.
//!
//! Identifier `i` of a stream is `10.<registrant>/<random>-<i in hex>`; the
//! hex tail makes every identifier unique. Snapshot A holds identifiers
//! `0..size_a`, snapshot B holds `removed..size_a + added`, so the expected
//! diff is known without computing it. Lines are written in index order,
//! which is not lexicographic.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub seed: u64,
    pub size_a: u64,
    /// Leading identifiers of A missing from B.
    pub removed: u64,
    /// Identifiers appended to B only.
    pub added: u64,
    /// Number of distinct registrant prefixes.
    pub prefixes: u32,
    /// Probability of writing an extra case/encoding variant of a line.
    pub variant_rate: f64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        SynthSpec { seed: 0, size_a: 1000, removed: 10, added: 10, prefixes: 50, variant_rate: 0.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SynthSummary {
    pub lines_a: u64,
    pub lines_b: u64,
    pub unique_a: u64,
    pub unique_b: u64,
    pub only_in_a: u64,
    pub only_in_b: u64,
    pub in_both: u64,
}

const ALPHABET: &[u8] = b"abcdefghijklmnopqrstuvwxyz0123456789";

fn identifier(rng: &mut ChaCha8Rng, prefixes: u32, index: u64, out: &mut String) {
    use std::fmt::Write as _;
    out.clear();
    let registrant = 1000 + rng.gen_range(0..prefixes.max(1));
    let len = rng.gen_range(4..12);
    let _ = write!(out, "10.{registrant}/");
    for _ in 0..len {
        out.push(ALPHABET[rng.gen_range(0..ALPHABET.len())] as char);
    }
    let _ = write!(out, "-{index:x}");
}

/// A spelling of `doi` that normalizes to the same identifier: some letters
/// uppercased, possibly one character percent-encoded, possibly padded.
pub fn variant(doi: &str, rng: &mut impl Rng) -> String {
    let chars: Vec<char> = doi.chars().collect();
    let encode_at = rng.gen_bool(0.5).then(|| rng.gen_range(0..chars.len()));
    let mut out = String::with_capacity(doi.len() + 4);
    if rng.gen_bool(0.2) {
        out.push(' ');
    }
    for (i, c) in chars.into_iter().enumerate() {
        if Some(i) == encode_at && c.is_ascii() {
            out.push_str(&format!("%{:02X}", c as u32));
        } else if rng.gen_bool(0.3) {
            out.extend(c.to_uppercase());
        } else {
            out.push(c);
        }
    }
    if rng.gen_bool(0.2) {
        out.push('\t');
    }
    out
}

/// Writes snapshot A and B as plain text, one DOI per line.
pub fn write_snapshot_pair(spec: &SynthSpec, path_a: &Path, path_b: &Path) -> io::Result<SynthSummary> {
    assert!(spec.removed <= spec.size_a, "cannot remove more identifiers than exist");
    let mut a = BufWriter::with_capacity(1 << 20, File::create(path_a)?);
    let mut b = BufWriter::with_capacity(1 << 20, File::create(path_b)?);
    let mut ids = ChaCha8Rng::seed_from_u64(spec.seed);
    // separate stream so variant decisions never perturb the identifiers
    let mut noise = ChaCha8Rng::seed_from_u64(spec.seed ^ 0x5eed_5eed_5eed_5eed);
    let mut line = String::new();
    let (mut lines_a, mut lines_b) = (0u64, 0u64);
    for i in 0..spec.size_a + spec.added {
        identifier(&mut ids, spec.prefixes, i, &mut line);
        let targets: [(bool, &mut BufWriter<File>, &mut u64); 2] =
            [(i < spec.size_a, &mut a, &mut lines_a), (i >= spec.removed, &mut b, &mut lines_b)];
        for (wanted, w, count) in targets {
            if !wanted {
                continue;
            }
            w.write_all(line.as_bytes())?;
            w.write_all(b"\n")?;
            *count += 1;
            if spec.variant_rate > 0.0 && noise.gen_bool(spec.variant_rate) {
                w.write_all(variant(&line, &mut noise).as_bytes())?;
                w.write_all(b"\n")?;
                *count += 1;
            }
        }
    }
    a.into_inner().map_err(|e| e.into_error())?.sync_all()?;
    b.into_inner().map_err(|e| e.into_error())?.sync_all()?;
    let in_both = spec.size_a - spec.removed;
    Ok(SynthSummary {
        lines_a,
        lines_b,
        unique_a: spec.size_a,
        unique_b: in_both + spec.added,
        only_in_a: spec.removed,
        only_in_b: spec.added,
        in_both,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::doi::NormalizedDoi;
    use std::collections::BTreeSet;

    fn read_set(p: &Path) -> BTreeSet<String> {
        std::fs::read_to_string(p)
            .unwrap()
            .lines()
            .map(|l| l.parse::<NormalizedDoi>().unwrap().into_string())
            .collect()
    }

    #[test]
    fn summary_matches_contents() {
        let dir = tempfile::tempdir().unwrap();
        let (pa, pb) = (dir.path().join("a.txt"), dir.path().join("b.txt"));
        let spec = SynthSpec { seed: 7, size_a: 500, removed: 40, added: 25, prefixes: 5, variant_rate: 0.3 };
        let s = write_snapshot_pair(&spec, &pa, &pb).unwrap();
        let (a, b) = (read_set(&pa), read_set(&pb));
        assert_eq!(a.len() as u64, s.unique_a);
        assert_eq!(b.len() as u64, s.unique_b);
        assert_eq!(a.difference(&b).count() as u64, s.only_in_a);
        assert_eq!(b.difference(&a).count() as u64, s.only_in_b);
        assert!(s.lines_a > s.unique_a, "variants were written");
    }

    #[test]
    fn seeded_output_is_reproducible() {
        let dir = tempfile::tempdir().unwrap();
        let spec = SynthSpec { seed: 3, variant_rate: 0.1, ..SynthSpec::default() };
        let p = |n: &str| dir.path().join(n);
        write_snapshot_pair(&spec, &p("a1"), &p("b1")).unwrap();
        write_snapshot_pair(&spec, &p("a2"), &p("b2")).unwrap();
        assert_eq!(std::fs::read(p("a1")).unwrap(), std::fs::read(p("a2")).unwrap());
        assert_eq!(std::fs::read(p("b1")).unwrap(), std::fs::read(p("b2")).unwrap());
    }

    #[test]
    fn variants_normalize_back() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..200 {
            let v = variant("10.1234/abc-1f", &mut rng);
            assert_eq!(v.parse::<NormalizedDoi>().unwrap().as_str(), "10.1234/abc-1f", "{v:?}");
        }
    }
}

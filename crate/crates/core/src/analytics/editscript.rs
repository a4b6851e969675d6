//! Character-level diffs between alias and primary suffixes.
//!
//! The script comes from a longest-common-subsequence alignment. Between two
//! consecutive matched characters there is a gap holding some deleted old
//! characters and some added new ones; the k-th deletion of a gap pairs with
//! its k-th addition as a Replace, and the surplus stays Delete or Add.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EditKind {
    Delete,
    Add,
    Replace,
}

/// One edit. `position` is an index into the old string for Delete and
/// Replace and into the new string for Add, in Unicode scalar values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EditOp {
    pub kind: EditKind,
    pub position: usize,
    pub old_char: Option<char>,
    pub new_char: Option<char>,
}

impl EditOp {
    pub fn delete(position: usize, c: char) -> Self {
        EditOp { kind: EditKind::Delete, position, old_char: Some(c), new_char: None }
    }
    pub fn add(position: usize, c: char) -> Self {
        EditOp { kind: EditKind::Add, position, old_char: None, new_char: Some(c) }
    }
    pub fn replace(position: usize, old: char, new: char) -> Self {
        EditOp { kind: EditKind::Replace, position, old_char: Some(old), new_char: Some(new) }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EditScript {
    pub ops: Vec<EditOp>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ApplyError {
    #[error("op {index} is out of order or out of range")]
    Misplaced { index: usize },
    #[error("op {index} expects {expected:?} but the input has {found:?}")]
    Mismatch { index: usize, expected: char, found: Option<char> },
    #[error("op {index} is missing a character")]
    Malformed { index: usize },
}

/// LCS-based edit script turning `s1` into `s2`.
///
/// ```
/// use doi_audit::analytics::{edit_script, EditOp};
/// let script = edit_script("15303", "15306");
/// assert_eq!(script.ops, [EditOp::replace(4, '3', '6')]);
/// assert_eq!(script.apply("15303").unwrap(), "15306");
/// ```
pub fn edit_script(s1: &str, s2: &str) -> EditScript {
    let a: Vec<char> = s1.chars().collect();
    let b: Vec<char> = s2.chars().collect();
    let pre = a.iter().zip(&b).take_while(|(x, y)| x == y).count();
    let suf = a[pre..].iter().rev().zip(b[pre..].iter().rev()).take_while(|(x, y)| x == y).count();
    let (ca, cb) = (&a[pre..a.len() - suf], &b[pre..b.len() - suf]);
    let (n, m) = (ca.len(), cb.len());

    // lcs[i][j] = LCS length of ca[i..] and cb[j..]
    let w = m + 1;
    let mut lcs = vec![0u32; (n + 1) * w];
    for i in (0..n).rev() {
        for j in (0..m).rev() {
            lcs[i * w + j] = if ca[i] == cb[j] {
                lcs[(i + 1) * w + j + 1] + 1
            } else {
                lcs[(i + 1) * w + j].max(lcs[i * w + j + 1])
            };
        }
    }

    let mut ops = Vec::new();
    let mut gap_del: Vec<(usize, char)> = Vec::new();
    let mut gap_add: Vec<(usize, char)> = Vec::new();
    let (mut i, mut j) = (0, 0);
    loop {
        let at_match = i < n && j < m && ca[i] == cb[j];
        if at_match || (i == n && j == m) {
            flush_gap(&mut gap_del, &mut gap_add, &mut ops);
            if !at_match {
                break;
            }
            i += 1;
            j += 1;
        } else if j == m || (i < n && lcs[(i + 1) * w + j] >= lcs[i * w + j + 1]) {
            gap_del.push((pre + i, ca[i]));
            i += 1;
        } else {
            gap_add.push((pre + j, cb[j]));
            j += 1;
        }
    }
    EditScript { ops }
}

fn flush_gap(dels: &mut Vec<(usize, char)>, adds: &mut Vec<(usize, char)>, ops: &mut Vec<EditOp>) {
    let paired = dels.len().min(adds.len());
    for k in 0..paired {
        ops.push(EditOp::replace(dels[k].0, dels[k].1, adds[k].1));
    }
    ops.extend(dels[paired..].iter().map(|&(p, c)| EditOp::delete(p, c)));
    ops.extend(adds[paired..].iter().map(|&(p, c)| EditOp::add(p, c)));
    dels.clear();
    adds.clear();
}

impl EditScript {
    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    /// Applies the ops in order, copying untouched characters of `old`
    /// between them.
    pub fn apply(&self, old: &str) -> Result<String, ApplyError> {
        let old: Vec<char> = old.chars().collect();
        let mut out: Vec<char> = Vec::with_capacity(old.len() + self.ops.len());
        let mut cursor = 0;
        for (index, op) in self.ops.iter().enumerate() {
            match op.kind {
                EditKind::Delete | EditKind::Replace => {
                    if op.position < cursor || op.position >= old.len() {
                        return Err(ApplyError::Misplaced { index });
                    }
                    out.extend_from_slice(&old[cursor..op.position]);
                    let expected = op.old_char.ok_or(ApplyError::Malformed { index })?;
                    if old[op.position] != expected {
                        return Err(ApplyError::Mismatch { index, expected, found: Some(old[op.position]) });
                    }
                    if op.kind == EditKind::Replace {
                        out.push(op.new_char.ok_or(ApplyError::Malformed { index })?);
                    }
                    cursor = op.position + 1;
                }
                EditKind::Add => {
                    let copy = op.position.checked_sub(out.len()).ok_or(ApplyError::Misplaced { index })?;
                    if cursor + copy > old.len() {
                        return Err(ApplyError::Misplaced { index });
                    }
                    out.extend_from_slice(&old[cursor..cursor + copy]);
                    cursor += copy;
                    out.push(op.new_char.ok_or(ApplyError::Malformed { index })?);
                }
            }
        }
        out.extend_from_slice(&old[cursor..]);
        Ok(out.into_iter().collect())
    }

    /// Position-free multiset of the ops.
    pub fn signature(&self) -> Signature {
        let mut counts: BTreeMap<SigOp, u64> = BTreeMap::new();
        for op in &self.ops {
            let key = SigOp { kind: op.kind, old_char: op.old_char, new_char: op.new_char };
            *counts.entry(key).or_default() += 1;
        }
        Signature(counts.into_iter().collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SigOp {
    pub kind: EditKind,
    pub old_char: Option<char>,
    pub new_char: Option<char>,
}

/// Ops with multiplicities, ordered by kind and then character.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Signature(pub Vec<(SigOp, u64)>);

fn char_phrase(c: char) -> String {
    let name = match c {
        '/' => "a slash",
        '-' => "a hyphen",
        '.' => "a period",
        '_' => "an underscore",
        ':' => "a colon",
        ';' => "a semicolon",
        ',' => "a comma",
        ' ' => return "a space".to_owned(),
        _ => return format!("\"{c}\""),
    };
    format!("{name} ({c})")
}

fn times(n: u64) -> String {
    match n {
        1 => "once".into(),
        2 => "twice".into(),
        3 => "three times".into(),
        4 => "four times".into(),
        5 => "five times".into(),
        n => format!("{n} times"),
    }
}

impl fmt::Display for Signature {
    /// Sentence such as `Delete a slash (/) once.`
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("No change.");
        }
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|(op, n)| {
                let old = op.old_char.map(char_phrase).unwrap_or_default();
                let new = op.new_char.map(char_phrase).unwrap_or_default();
                match op.kind {
                    EditKind::Delete => format!("delete {old} {}", times(*n)),
                    EditKind::Add => format!("add {new} {}", times(*n)),
                    EditKind::Replace => format!("replace {old} with {new} {}", times(*n)),
                }
            })
            .collect();
        let mut sentence = match parts.len() {
            1 => parts[0].clone(),
            k => format!("{}, and {}", parts[..k - 1].join(", "), parts[k - 1]),
        };
        if let Some(first) = sentence.get_mut(0..1) {
            first.make_ascii_uppercase();
        }
        write!(f, "{sentence}.")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sig(s1: &str, s2: &str) -> String {
        edit_script(s1, s2).signature().to_string()
    }

    #[test]
    fn worked_examples() {
        assert_eq!(edit_script("/s12445-012-0033-7", "s12445-012-0033-7").ops, [EditOp::delete(0, '/')]);
        assert_eq!(sig("/s12445-012-0033-7", "s12445-012-0033-7"), "Delete a slash (/) once.");
        assert_eq!(sig("9781591401087.ch001", "978-1-59140-108-7.ch001"), "Add a hyphen (-) four times.");
        let s = edit_script("2214-8647_dnp_e1000010", "1574-9347_dnp_e1000010");
        assert_eq!(
            s.ops,
            [
                EditOp::delete(0, '2'),
                EditOp::delete(1, '2'),
                EditOp::add(1, '5'),
                EditOp::add(2, '7'),
                EditOp::replace(5, '8', '9'),
                EditOp::replace(6, '6', '3'),
            ]
        );
        assert_eq!(
            s.signature().to_string(),
            "Delete \"2\" twice, add \"5\" once, add \"7\" once, replace \"6\" with \"3\" once, and replace \"8\" with \"9\" once."
        );
    }

    #[test]
    fn round_trips() {
        for (a, b) in [("", "abc"), ("abc", ""), ("abc", "abc"), ("axc", "abc"), ("ab", "ba"), ("15303", "15306")] {
            assert_eq!(edit_script(a, b).apply(a).unwrap(), b, "{a} -> {b}");
        }
    }

    #[test]
    fn apply_rejects_foreign_input() {
        let s = edit_script("abc", "axc");
        assert!(matches!(s.apply("aqc"), Err(ApplyError::Mismatch { .. })));
        assert!(matches!(s.apply("a"), Err(ApplyError::Misplaced { .. })));
    }

    #[test]
    fn op_shape() {
        for op in edit_script("2214-8647", "1574-9347").ops {
            match op.kind {
                EditKind::Add => assert!(op.old_char.is_none() && op.new_char.is_some()),
                EditKind::Delete => assert!(op.old_char.is_some() && op.new_char.is_none()),
                EditKind::Replace => assert!(op.old_char.is_some() && op.new_char.is_some()),
            }
        }
    }
}

use std::cmp::Ordering;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{IdStreamIter, SnapshotError, SnapshotHandle};
use crate::fsutil::write_atomic;

/// One step of a sorted two-way merge.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MergeEvent<'a> {
    OnlyA(&'a [u8]),
    OnlyB(&'a [u8]),
    Both(&'a [u8]),
}

/// Merges two strictly increasing sequences, reporting every element once.
///
/// Returns `Err(side, index)` if either input is not strictly increasing.
pub fn merge_diff<A, B, T>(a: A, b: B, mut on_event: impl FnMut(MergeEvent<'_>)) -> Result<(), (char, usize)>
where
    A: IntoIterator<Item = T>,
    B: IntoIterator<Item = T>,
    T: AsRef<[u8]>,
{
    let mut a = a.into_iter();
    let mut b = b.into_iter();
    let mut prev_a: Option<T> = None;
    let mut prev_b: Option<T> = None;
    let (mut ia, mut ib) = (0usize, 0usize);
    let mut next_a = a.next();
    let mut next_b = b.next();
    let check = |prev: &Option<T>, cur: &T, side: char, idx: usize| match prev {
        Some(p) if p.as_ref() >= cur.as_ref() => Err((side, idx)),
        _ => Ok(()),
    };
    loop {
        match (&next_a, &next_b) {
            (None, None) => return Ok(()),
            (Some(x), None) => {
                check(&prev_a, x, 'a', ia)?;
                on_event(MergeEvent::OnlyA(x.as_ref()));
                prev_a = next_a.take();
                next_a = a.next();
                ia += 1;
            }
            (None, Some(y)) => {
                check(&prev_b, y, 'b', ib)?;
                on_event(MergeEvent::OnlyB(y.as_ref()));
                prev_b = next_b.take();
                next_b = b.next();
                ib += 1;
            }
            (Some(x), Some(y)) => {
                check(&prev_a, x, 'a', ia)?;
                check(&prev_b, y, 'b', ib)?;
                match x.as_ref().cmp(y.as_ref()) {
                    Ordering::Less => {
                        on_event(MergeEvent::OnlyA(x.as_ref()));
                        prev_a = next_a.take();
                        next_a = a.next();
                        ia += 1;
                    }
                    Ordering::Greater => {
                        on_event(MergeEvent::OnlyB(y.as_ref()));
                        prev_b = next_b.take();
                        next_b = b.next();
                        ib += 1;
                    }
                    Ordering::Equal => {
                        on_event(MergeEvent::Both(x.as_ref()));
                        prev_a = next_a.take();
                        prev_b = next_b.take();
                        next_a = a.next();
                        next_b = b.next();
                        ia += 1;
                        ib += 1;
                    }
                }
            }
        }
    }
}

/// A sorted identifier file plus its line count.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdStream {
    pub path: PathBuf,
    pub count: u64,
}

impl IdStream {
    pub fn iter(&self) -> Result<IdStreamIter, SnapshotError> {
        IdStreamIter::open(&self.path)
    }
}

/// Difference and product sets of two snapshots.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiffSets {
    pub label_a: String,
    pub label_b: String,
    pub unique_a: u64,
    pub unique_b: u64,
    /// Deletion candidates.
    pub only_in_a: IdStream,
    pub only_in_b: IdStream,
    pub in_both: u64,
}

impl DiffSets {
    pub fn check_partition(&self) -> Result<(), SnapshotError> {
        if self.only_in_a.count + self.in_both != self.unique_a {
            return Err(SnapshotError::CountMismatch(format!(
                "only_in_a {} + in_both {} != unique(A) {}",
                self.only_in_a.count, self.in_both, self.unique_a
            )));
        }
        if self.only_in_b.count + self.in_both != self.unique_b {
            return Err(SnapshotError::CountMismatch(format!(
                "only_in_b {} + in_both {} != unique(B) {}",
                self.only_in_b.count, self.in_both, self.unique_b
            )));
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, SnapshotError> {
        let text = std::fs::read_to_string(path).map_err(SnapshotError::io(path))?;
        serde_json::from_str(&text).map_err(|e| SnapshotError::BadHandle {
            path: path.to_owned(),
            message: e.to_string(),
        })
    }

    pub fn save(&self, path: &Path) -> Result<(), SnapshotError> {
        write_atomic(path, &serde_json::to_vec_pretty(self).expect("diff serializes"))
            .map_err(SnapshotError::io(path))
    }
}

struct StoreLines(IdStreamIter, Option<SnapshotError>);

impl Iterator for StoreLines {
    type Item = Vec<u8>;

    fn next(&mut self) -> Option<Vec<u8>> {
        match self.0.next_bytes() {
            Ok(line) => line.map(<[u8]>::to_vec),
            Err(e) => {
                self.1 = Some(e);
                None
            }
        }
    }
}

/// Streams both sorted stores once, writing `only_in_a.txt` and
/// `only_in_b.txt` into `dest_dir` and `diff.json` describing them.
pub fn diff_snapshots(
    a: &SnapshotHandle,
    b: &SnapshotHandle,
    dest_dir: &Path,
) -> Result<DiffSets, SnapshotError> {
    std::fs::create_dir_all(dest_dir).map_err(SnapshotError::io(dest_dir))?;
    let path_a = dest_dir.join("only_in_a.txt");
    let path_b = dest_dir.join("only_in_b.txt");
    let mut out_a = BufWriter::with_capacity(1 << 20, File::create(&path_a).map_err(SnapshotError::io(&path_a))?);
    let mut out_b = BufWriter::with_capacity(1 << 20, File::create(&path_b).map_err(SnapshotError::io(&path_b))?);
    let mut lines_a = StoreLines(a.iter()?, None);
    let mut lines_b = StoreLines(b.iter()?, None);
    let (mut only_a, mut only_b, mut both) = (0u64, 0u64, 0u64);
    let mut write_err = None;
    let merged = merge_diff(&mut lines_a, &mut lines_b, |ev| {
        let res = match ev {
            MergeEvent::OnlyA(doi) => {
                only_a += 1;
                out_a.write_all(doi).and_then(|_| out_a.write_all(b"\n"))
            }
            MergeEvent::OnlyB(doi) => {
                only_b += 1;
                out_b.write_all(doi).and_then(|_| out_b.write_all(b"\n"))
            }
            MergeEvent::Both(_) => {
                both += 1;
                Ok(())
            }
        };
        if let Err(e) = res {
            write_err.get_or_insert(e);
        }
    });
    if let Some(e) = lines_a.1.take().or(lines_b.1.take()) {
        return Err(e);
    }
    if let Err((side, idx)) = merged {
        let path = if side == 'a' { &a.sorted_store } else { &b.sorted_store };
        return Err(SnapshotError::Unsorted {
            path: path.clone(),
            line: idx as u64 + 1,
        });
    }
    if let Some(e) = write_err {
        return Err(SnapshotError::Io { path: dest_dir.to_owned(), source: e });
    }
    out_a.flush().map_err(SnapshotError::io(&path_a))?;
    out_b.flush().map_err(SnapshotError::io(&path_b))?;
    let sets = DiffSets {
        label_a: a.label.clone(),
        label_b: b.label.clone(),
        unique_a: a.unique_count,
        unique_b: b.unique_count,
        only_in_a: IdStream { path: path_a, count: only_a },
        only_in_b: IdStream { path: path_b, count: only_b },
        in_both: both,
    };
    sets.check_partition()?;
    sets.save(&dest_dir.join("diff.json"))?;
    Ok(sets)
}

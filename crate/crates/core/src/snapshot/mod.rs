//! Snapshot ingestion and differencing.
//!
//! A snapshot dump is normalized line by line, sorted and deduplicated on
//! disk, and summarized by a [`SnapshotHandle`]. Two handles are compared by a
//! single streaming merge in [`diff_snapshots`].

mod diff;
mod extsort;
pub mod input;

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::doi::{has_residual_escape, normalize_doi, NormalizedDoi, RawDoi};
use crate::fsutil::write_atomic;

pub use diff::{diff_snapshots, merge_diff, DiffSets, IdStream, MergeEvent};
pub use extsort::ExternalSorter;

/// Default per-chunk memory budget for the external sort.
pub const DEFAULT_CHUNK_BUDGET: usize = 256 << 20;

/// Malformed line numbers kept in the handle; the count is always exact.
const MALFORMED_SAMPLE: usize = 100;

#[derive(Debug, thiserror::Error)]
pub enum SnapshotError {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("sorted store {path} is not strictly increasing at line {line}")]
    Unsorted { path: PathBuf, line: u64 },
    #[error("invalid snapshot handle {path}: {message}")]
    BadHandle { path: PathBuf, message: String },
    #[error("count identity violated: {0}")]
    CountMismatch(String),
}

impl SnapshotError {
    pub(crate) fn io(path: impl Into<PathBuf>) -> impl FnOnce(io::Error) -> SnapshotError {
        let path = path.into();
        move |source| SnapshotError::Io { path, source }
    }
}

#[derive(Debug, Clone)]
pub struct IngestOptions {
    /// Bytes of line text plus bookkeeping buffered per sorted run.
    pub chunk_budget: usize,
}

impl Default for IngestOptions {
    fn default() -> Self {
        IngestOptions {
            chunk_budget: DEFAULT_CHUNK_BUDGET,
        }
    }
}

/// Summary of one ingested snapshot and the location of its sorted store.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SnapshotHandle {
    pub label: String,
    /// Valid identifier records read, duplicates included.
    pub record_count: u64,
    pub unique_count: u64,
    pub malformed_count: u64,
    pub blank_lines: u64,
    /// Records whose decoded text still looked percent-encoded.
    pub residual_escape_count: u64,
    /// First malformed line numbers (1-based).
    pub malformed_lines: Vec<u64>,
    /// One canonical DOI per line, strictly increasing byte order.
    pub sorted_store: PathBuf,
    /// `prefix<TAB>count` for every prefix in the store.
    pub prefix_counts: PathBuf,
}

impl SnapshotHandle {
    pub fn load(path: &Path) -> Result<Self, SnapshotError> {
        let text = std::fs::read_to_string(path).map_err(SnapshotError::io(path))?;
        let handle: SnapshotHandle =
            serde_json::from_str(&text).map_err(|e| SnapshotError::BadHandle {
                path: path.to_owned(),
                message: e.to_string(),
            })?;
        if handle.unique_count > handle.record_count {
            return Err(SnapshotError::BadHandle {
                path: path.to_owned(),
                message: "unique_count exceeds record_count".into(),
            });
        }
        Ok(handle)
    }

    pub fn save(&self, path: &Path) -> Result<(), SnapshotError> {
        let json = serde_json::to_vec_pretty(self).expect("handle serializes");
        write_atomic(path, &json).map_err(SnapshotError::io(path))
    }

    /// Streams the sorted store as canonical DOIs.
    pub fn iter(&self) -> Result<IdStreamIter, SnapshotError> {
        IdStreamIter::open(&self.sorted_store)
    }

    pub fn load_prefix_counts(&self) -> Result<BTreeMap<String, u64>, SnapshotError> {
        read_prefix_counts(&self.prefix_counts)
    }
}

/// Reads a `prefix<TAB>count` sidecar.
pub fn read_prefix_counts(path: &Path) -> Result<BTreeMap<String, u64>, SnapshotError> {
    let file = File::open(path).map_err(SnapshotError::io(path))?;
    let mut out = BTreeMap::new();
    for (n, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(SnapshotError::io(path))?;
        let bad = || SnapshotError::BadHandle {
            path: path.to_owned(),
            message: format!("bad prefix-count line {}", n + 1),
        };
        let (prefix, count) = line.split_once('\t').ok_or_else(bad)?;
        out.insert(prefix.to_owned(), count.parse().map_err(|_| bad())?);
    }
    Ok(out)
}

/// Turns a label into something safe to use as a file stem.
pub fn label_stem(label: &str) -> String {
    let stem: String = label
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' || c == '.' { c } else { '_' })
        .collect();
    if stem.is_empty() { "snapshot".into() } else { stem }
}

/// Normalizes, deduplicates, and sorts a dump into `dest_dir`.
///
/// Writes `<stem>.sorted.txt`, `<stem>.prefixes.tsv`, and `<stem>.json`
/// where `stem` is derived from `label`.
pub fn ingest_snapshot(
    source: &Path,
    label: &str,
    dest_dir: &Path,
    opts: &IngestOptions,
) -> Result<SnapshotHandle, SnapshotError> {
    std::fs::create_dir_all(dest_dir).map_err(SnapshotError::io(dest_dir))?;
    let stem = label_stem(label);
    let store_path = dest_dir.join(format!("{stem}.sorted.txt"));
    let prefix_path = dest_dir.join(format!("{stem}.prefixes.tsv"));

    let mut reader = input::open_dump(source).map_err(SnapshotError::io(source))?;
    let mut sorter =
        ExternalSorter::new(dest_dir, opts.chunk_budget).map_err(SnapshotError::io(dest_dir))?;

    let mut record_count = 0u64;
    let mut malformed_count = 0u64;
    let mut blank_lines = 0u64;
    let mut residual = 0u64;
    let mut malformed_lines = Vec::new();
    let mut line = Vec::with_capacity(256);
    let mut line_no = 0u64;
    loop {
        line.clear();
        let n = reader
            .read_until(b'\n', &mut line)
            .map_err(SnapshotError::io(source))?;
        if n == 0 {
            break;
        }
        line_no += 1;
        if line.last() == Some(&b'\n') {
            line.pop();
        }
        let problem = match input::parse_line(&line) {
            input::LineValue::Blank => {
                blank_lines += 1;
                continue;
            }
            input::LineValue::Unreadable(why) => why.to_owned(),
            input::LineValue::Doi(text) => match normalize_doi(RawDoi(&text)) {
                Ok(doi) => {
                    if text.contains('%') && has_residual_escape(&text) {
                        residual += 1;
                    }
                    record_count += 1;
                    sorter
                        .push(doi.as_str().as_bytes())
                        .map_err(SnapshotError::io(dest_dir))?;
                    continue;
                }
                Err(e) => e.to_string(),
            },
        };
        malformed_count += 1;
        if malformed_lines.len() < MALFORMED_SAMPLE {
            malformed_lines.push(line_no);
        }
        log::warn!("{}:{line_no}: skipped malformed line: {problem}", source.display());
    }

    let mut store = BufWriter::with_capacity(
        1 << 20,
        File::create(&store_path).map_err(SnapshotError::io(&store_path))?,
    );
    let mut prefixes = BufWriter::new(File::create(&prefix_path).map_err(SnapshotError::io(&prefix_path))?);
    let mut unique_count = 0u64;
    let mut current_prefix: Vec<u8> = Vec::new();
    let mut current_count = 0u64;
    sorter
        .finish(|doi| {
            unique_count += 1;
            store.write_all(doi)?;
            store.write_all(b"\n")?;
            let slash = doi.iter().position(|&b| b == b'/').unwrap_or(doi.len());
            let prefix = &doi[..slash];
            if prefix != current_prefix.as_slice() {
                if current_count > 0 {
                    prefixes.write_all(&current_prefix)?;
                    writeln!(prefixes, "\t{current_count}")?;
                }
                current_prefix.clear();
                current_prefix.extend_from_slice(prefix);
                current_count = 0;
            }
            current_count += 1;
            Ok(())
        })
        .map_err(SnapshotError::io(&store_path))?;
    if current_count > 0 {
        prefixes
            .write_all(&current_prefix)
            .and_then(|_| writeln!(prefixes, "\t{current_count}"))
            .map_err(SnapshotError::io(&prefix_path))?;
    }
    store.flush().map_err(SnapshotError::io(&store_path))?;
    prefixes.flush().map_err(SnapshotError::io(&prefix_path))?;

    let handle = SnapshotHandle {
        label: label.to_owned(),
        record_count,
        unique_count,
        malformed_count,
        blank_lines,
        residual_escape_count: residual,
        malformed_lines,
        sorted_store: store_path,
        prefix_counts: prefix_path,
    };
    handle.save(&dest_dir.join(format!("{stem}.json")))?;
    log::info!(
        "ingested {} ({}): {} records, {} unique, {} malformed",
        label,
        source.display(),
        record_count,
        unique_count,
        malformed_count
    );
    Ok(handle)
}

/// Iterator over a one-DOI-per-line store.
pub struct IdStreamIter {
    reader: BufReader<File>,
    path: PathBuf,
    buf: Vec<u8>,
}

impl IdStreamIter {
    pub fn open(path: &Path) -> Result<Self, SnapshotError> {
        let file = File::open(path).map_err(SnapshotError::io(path))?;
        Ok(IdStreamIter {
            reader: BufReader::with_capacity(1 << 20, file),
            path: path.to_owned(),
            buf: Vec::new(),
        })
    }

    /// Next raw line without the newline; `None` at end of file.
    pub(crate) fn next_bytes(&mut self) -> Result<Option<&[u8]>, SnapshotError> {
        self.buf.clear();
        let n = self
            .reader
            .read_until(b'\n', &mut self.buf)
            .map_err(SnapshotError::io(&self.path))?;
        if n == 0 {
            return Ok(None);
        }
        if self.buf.last() == Some(&b'\n') {
            self.buf.pop();
        }
        Ok(Some(&self.buf))
    }
}

impl Iterator for IdStreamIter {
    type Item = Result<NormalizedDoi, SnapshotError>;

    fn next(&mut self) -> Option<Self::Item> {
        let path = self.path.clone();
        match self.next_bytes() {
            Ok(None) => None,
            Ok(Some(bytes)) => Some(
                std::str::from_utf8(bytes)
                    .ok()
                    .and_then(|s| NormalizedDoi::from_canonical(s).ok())
                    .ok_or_else(|| SnapshotError::BadHandle {
                        path,
                        message: "store contains a non-canonical line".into(),
                    }),
            ),
            Err(e) => Some(Err(e)),
        }
    }
}

//! Bounded-memory sort + dedupe of byte lines.
//!
//! Lines are packed into an arena until the chunk budget is reached, sorted in
//! parallel, deduplicated, and spilled as a sorted run. The runs are then
//! merged with a k-way heap merge that drops duplicates across runs.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::slice::ParallelSliceMut;

/// Bytes of bookkeeping charged against the budget for every buffered line.
const PER_LINE_OVERHEAD: usize = std::mem::size_of::<(u32, u32)>();
const MAX_CHUNK_BYTES: usize = u32::MAX as usize;

pub struct ExternalSorter {
    tmp_dir: tempfile::TempDir,
    budget: usize,
    arena: Vec<u8>,
    spans: Vec<(u32, u32)>,
    runs: Vec<PathBuf>,
}

impl ExternalSorter {
    /// `budget` bounds the buffered text plus per-line overhead of one chunk.
    pub fn new(tmp_parent: &Path, budget: usize) -> io::Result<Self> {
        let budget = budget.clamp(1024, MAX_CHUNK_BYTES);
        Ok(ExternalSorter {
            tmp_dir: tempfile::Builder::new()
                .prefix(".extsort-")
                .tempdir_in(tmp_parent)?,
            budget,
            arena: Vec::new(),
            spans: Vec::new(),
            runs: Vec::new(),
        })
    }

    pub fn push(&mut self, line: &[u8]) -> io::Result<()> {
        debug_assert!(!line.contains(&b'\n'));
        let needed = line.len() + PER_LINE_OVERHEAD;
        if self.arena.capacity() == 0 {
            // Reserve once; untouched capacity does not count toward resident memory.
            self.arena.reserve_exact(self.budget);
            self.spans.reserve_exact(self.budget / (PER_LINE_OVERHEAD + 16));
        }
        if !self.spans.is_empty() && self.used() + needed > self.budget {
            self.spill()?;
        }
        let offset = self.arena.len() as u32;
        self.arena.extend_from_slice(line);
        self.spans.push((offset, line.len() as u32));
        Ok(())
    }

    fn used(&self) -> usize {
        self.arena.len() + self.spans.len() * PER_LINE_OVERHEAD
    }

    fn spill(&mut self) -> io::Result<()> {
        let arena = &self.arena;
        let key = |&(o, l): &(u32, u32)| &arena[o as usize..(o + l) as usize];
        self.spans.par_sort_unstable_by(|a, b| key(a).cmp(key(b)));
        let path = self
            .tmp_dir
            .path()
            .join(format!("run-{:05}", self.runs.len()));
        let mut out = BufWriter::with_capacity(1 << 20, File::create(&path)?);
        let mut prev: Option<&[u8]> = None;
        for span in &self.spans {
            let line = key(span);
            if prev != Some(line) {
                out.write_all(line)?;
                out.write_all(b"\n")?;
                prev = Some(line);
            }
        }
        out.flush()?;
        log::debug!(
            "spilled run {} ({} lines, {} bytes)",
            self.runs.len(),
            self.spans.len(),
            self.arena.len()
        );
        self.runs.push(path);
        self.arena.clear();
        self.spans.clear();
        Ok(())
    }

    /// Spills the final chunk and streams the merged, duplicate-free output
    /// to `sink` in ascending byte order.
    pub fn finish(mut self, mut sink: impl FnMut(&[u8]) -> io::Result<()>) -> io::Result<()> {
        if !self.spans.is_empty() {
            self.spill()?;
        }
        // release chunk memory before the merge phase
        self.arena = Vec::new();
        self.spans = Vec::new();
        let mut readers = self
            .runs
            .iter()
            .map(|p| File::open(p).map(|f| BufReader::with_capacity(256 << 10, f)))
            .collect::<io::Result<Vec<_>>>()?;
        let mut heap = BinaryHeap::with_capacity(readers.len());
        for (idx, r) in readers.iter_mut().enumerate() {
            if let Some(line) = next_line(r)? {
                heap.push(Reverse((line, idx)));
            }
        }
        let mut last: Option<Vec<u8>> = None;
        while let Some(Reverse((line, idx))) = heap.pop() {
            if last.as_deref() != Some(line.as_slice()) {
                sink(&line)?;
                last = Some(line);
            }
            if let Some(next) = next_line(&mut readers[idx])? {
                heap.push(Reverse((next, idx)));
            }
        }
        Ok(())
    }
}

fn next_line(r: &mut impl BufRead) -> io::Result<Option<Vec<u8>>> {
    let mut buf = Vec::new();
    if r.read_until(b'\n', &mut buf)? == 0 {
        return Ok(None);
    }
    if buf.last() == Some(&b'\n') {
        buf.pop();
    }
    Ok(Some(buf))
}

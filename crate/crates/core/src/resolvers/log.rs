use std::sync::Mutex;
use std::time::{Duration, Instant};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LogEntry {
    /// Offset from when the log was created.
    pub at: Duration,
    pub kind: String,
    pub target: String,
}

/// Append-only, thread-safe record of requests.
#[derive(Debug)]
pub struct RequestLog {
    origin: Instant,
    entries: Mutex<Vec<LogEntry>>,
}

impl Default for RequestLog {
    fn default() -> Self {
        RequestLog {
            origin: Instant::now(),
            entries: Mutex::new(Vec::new()),
        }
    }
}

impl RequestLog {
    pub fn record(&self, kind: &str, target: &str) {
        let entry = LogEntry {
            at: self.origin.elapsed(),
            kind: kind.to_owned(),
            target: target.to_owned(),
        };
        self.entries.lock().unwrap_or_else(|p| p.into_inner()).push(entry);
    }

    pub fn entries(&self) -> Vec<LogEntry> {
        self.entries.lock().unwrap_or_else(|p| p.into_inner()).clone()
    }

    pub fn len(&self) -> usize {
        self.entries.lock().unwrap_or_else(|p| p.into_inner()).len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

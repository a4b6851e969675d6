//! Offline replay of recorded service responses.
//!
//! A fixture store is a directory of `*.jsonl` files. Each line records what
//! the services returned for one DOI:
//!
//! ```json
//! {"doi": "10.14359/15303",
//!  "ra_response": [{"DOI": "10.14359/15303", "RA": "Crossref"}],
//!  "redirect_chain": [{"status": 302, "location": "https://example.org/a"}, {"status": 200}],
//!  "metadata_response": "Resource not found.",
//!  "alias_of": "10.14359/15306"}
//! ```
//!
//! `ra_response` and `metadata_response` hold the verbatim response bodies;
//! `{"error": <status>}` in either stands for a request that failed with that
//! HTTP status (0 for a transport failure) after all retries.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use serde::Deserialize;
use serde_json::Value;

use super::parse;
use super::types::{AliasSource, AliasTarget, Hop, MetadataResult, Method, RaOutcome, RaResult, RedirectTrace};
use crate::doi::NormalizedDoi;

#[derive(Debug, thiserror::Error)]
pub enum FixtureError {
    #[error("cannot read fixture {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Parse { path: PathBuf, line: usize, message: String },
    #[error("{path}:{line}: duplicate fixture entry for {doi}")]
    Duplicate { path: PathBuf, line: usize, doi: String },
}

#[derive(Debug, Clone, Deserialize)]
struct RawEntry {
    doi: String,
    #[serde(default)]
    ra_response: Option<Value>,
    #[serde(default)]
    redirect_chain: Option<Vec<Hop>>,
    #[serde(default)]
    redirect_method: Option<Method>,
    #[serde(default)]
    metadata_response: Option<Value>,
    #[serde(default)]
    alias_of: Option<String>,
    #[serde(default)]
    handle_response: Option<Value>,
    #[serde(default)]
    fetched_at: Option<DateTime<Utc>>,
}

/// Recorded responses for one DOI. Absent fields were never recorded.
#[derive(Debug, Clone, PartialEq)]
pub struct FixtureEntry {
    pub doi: NormalizedDoi,
    pub ra_response: Option<Value>,
    pub redirect_chain: Option<Vec<Hop>>,
    pub redirect_method: Method,
    pub metadata_response: Option<Value>,
    pub alias_of: Option<NormalizedDoi>,
    pub handle_response: Option<Value>,
    pub fetched_at: Option<DateTime<Utc>>,
}

fn error_code(v: &Value) -> Option<u16> {
    let code = v.as_object()?.get("error")?;
    Some(code.as_u64().map(|c| c.min(u64::from(u16::MAX)) as u16).unwrap_or(0))
}

impl FixtureEntry {
    pub fn ra(&self) -> Option<RaResult> {
        let body = self.ra_response.as_ref()?;
        let outcome = match error_code(body) {
            Some(_) => RaOutcome::Indeterminate,
            None => parse::ra_outcome(body),
        };
        Some(RaResult { outcome, fetched_at: self.fetched_at })
    }

    /// Replays the chain. At most `max_redirects` redirects are followed; a
    /// further redirect is recorded but not followed.
    pub fn trace(&self, max_redirects: usize) -> Option<RedirectTrace> {
        let chain = self.redirect_chain.as_ref()?;
        let mut hops = Vec::new();
        let mut redirects = 0;
        let mut incomplete = false;
        for hop in chain {
            hops.push(hop.clone());
            if hop.status == 0 {
                incomplete = true;
                break;
            }
            if (300..400).contains(&hop.status) {
                if hop.location.is_none() {
                    incomplete = true;
                    break;
                }
                redirects += 1;
                if redirects > max_redirects {
                    incomplete = true;
                    break;
                }
            } else {
                break;
            }
        }
        Some(RedirectTrace::from_hops(hops, self.redirect_method, incomplete))
    }

    pub fn metadata(&self) -> Option<MetadataResult> {
        let body = self.metadata_response.as_ref()?;
        Some(match body {
            Value::String(text) if parse::is_not_found_body(text) => MetadataResult::ResourceNotFound,
            Value::String(_) => MetadataResult::OtherError { code: 404 },
            v => match error_code(v) {
                Some(code) => MetadataResult::OtherError { code },
                None => match parse::work_record(v) {
                    Some(record) => MetadataResult::Found { record },
                    None => MetadataResult::OtherError { code: 200 },
                },
            },
        })
    }

    /// `None` when nothing about the alias target was recorded;
    /// `Some(None)` when it was recorded as unknown.
    pub fn alias_target(&self) -> Option<Option<AliasTarget>> {
        if let Some(primary) = &self.alias_of {
            return Some(Some(AliasTarget {
                primary: primary.clone(),
                source: AliasSource::ConflictRecord,
            }));
        }
        let body = self.handle_response.as_ref()?;
        Some(parse::handle_alias(body).map(|primary| AliasTarget {
            primary,
            source: AliasSource::Handle,
        }))
    }
}

#[derive(Debug, Default, Clone)]
pub struct FixtureStore {
    entries: HashMap<NormalizedDoi, FixtureEntry>,
}

impl FixtureStore {
    /// Loads every `*.jsonl` file in `dir` (sorted by name).
    pub fn load(dir: &Path) -> Result<Self, FixtureError> {
        let io_err = |path: &Path| {
            let path = path.to_owned();
            move |source| FixtureError::Io { path, source }
        };
        let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
            .map_err(io_err(dir))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "jsonl"))
            .collect();
        files.sort();
        let mut store = FixtureStore::default();
        for path in files {
            let text = std::fs::read_to_string(&path).map_err(io_err(&path))?;
            store.add_jsonl(&path, &text)?;
        }
        Ok(store)
    }

    pub fn from_jsonl(text: &str) -> Result<Self, FixtureError> {
        let mut store = FixtureStore::default();
        store.add_jsonl(Path::new("<memory>"), text)?;
        Ok(store)
    }

    fn add_jsonl(&mut self, path: &Path, text: &str) -> Result<(), FixtureError> {
        for (idx, line) in text.lines().enumerate() {
            let line_no = idx + 1;
            if line.trim().is_empty() {
                continue;
            }
            let parse_err = |message: String| FixtureError::Parse {
                path: path.to_owned(),
                line: line_no,
                message,
            };
            let raw: RawEntry = serde_json::from_str(line).map_err(|e| parse_err(e.to_string()))?;
            let doi: NormalizedDoi = raw.doi.parse().map_err(|e: crate::MalformedDoi| parse_err(e.to_string()))?;
            let alias_of = raw
                .alias_of
                .map(|a| a.parse::<NormalizedDoi>())
                .transpose()
                .map_err(|e| parse_err(e.to_string()))?;
            let entry = FixtureEntry {
                doi: doi.clone(),
                ra_response: raw.ra_response,
                redirect_chain: raw.redirect_chain,
                redirect_method: raw.redirect_method.unwrap_or(Method::Head),
                metadata_response: raw.metadata_response,
                alias_of,
                handle_response: raw.handle_response,
                fetched_at: raw.fetched_at,
            };
            if self.entries.insert(doi.clone(), entry).is_some() {
                return Err(FixtureError::Duplicate {
                    path: path.to_owned(),
                    line: line_no,
                    doi: doi.into_string(),
                });
            }
        }
        Ok(())
    }

    pub fn get(&self, doi: &NormalizedDoi) -> Option<&FixtureEntry> {
        self.entries.get(doi)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn entry(line: &str) -> FixtureEntry {
        let store = FixtureStore::from_jsonl(line).unwrap();
        store.entries.into_values().next().unwrap()
    }

    #[test]
    fn ra_fixture_mapping() {
        let e = entry(r#"{"doi":"10.1/a","ra_response":[{"DOI":"10.1/a","RA":"Crossref"}]}"#);
        assert_eq!(e.ra().unwrap().outcome, RaOutcome::Crossref);
        let e = entry(r#"{"doi":"10.1/a","ra_response":[{"DOI":"10.1/a","status":"DOI does not exist"}]}"#);
        assert_eq!(e.ra().unwrap().outcome, RaOutcome::DoesNotExist);
        let e = entry(r#"{"doi":"10.1/a","ra_response":[{"DOI":"10.1/a","RA":"DataCite"}]}"#);
        assert_eq!(e.ra().unwrap().outcome, RaOutcome::OtherRa("DataCite".into()));
        let e = entry(r#"{"doi":"10.1/a","ra_response":{"error":0}}"#);
        assert_eq!(e.ra().unwrap().outcome, RaOutcome::Indeterminate);
        assert!(e.trace(10).is_none());
    }

    #[test]
    fn redirect_replay() {
        let e = entry(
            r#"{"doi":"10.1/a","redirect_chain":[{"status":302,"location":"https://pub.example/a"},{"status":200}]}"#,
        );
        let t = e.trace(10).unwrap();
        assert_eq!(t.final_uri.as_deref(), Some("https://pub.example/a"));
        assert!(!t.incomplete);

        let e = entry(
            r#"{"doi":"10.1/a","redirect_chain":[{"status":302,"location":"https://www.crossref.org/_deleted-doi/"},{"status":200}]}"#,
        );
        assert!(e.trace(10).unwrap().is_defunct());

        let e = entry(r#"{"doi":"10.1/a","redirect_chain":[{"status":404}]}"#);
        let t = e.trace(10).unwrap();
        assert_eq!((t.hops.len(), t.final_uri), (1, None));
    }

    #[test]
    fn loop_guard_truncates() {
        let hop = r#"{"status":301,"location":"https://loop.example/"}"#;
        let chain = vec![hop; 30].join(",");
        let e = entry(&format!(r#"{{"doi":"10.1/a","redirect_chain":[{chain}]}}"#));
        let t = e.trace(5).unwrap();
        assert_eq!(t.hops.len(), 6);
        assert!(t.incomplete);
        let e = entry(&format!(r#"{{"doi":"10.1/a","redirect_chain":[{hop},{hop},{{"status":200}}]}}"#));
        let t = e.trace(2).unwrap();
        assert_eq!(t.hops.len(), 3);
        assert!(!t.incomplete);
    }

    #[test]
    fn metadata_replay() {
        let e = entry(r#"{"doi":"10.1/a","metadata_response":{"status":"ok","message":{"type":"journal-article"}}}"#);
        assert_eq!(e.metadata().unwrap().record().unwrap().doc_type.as_deref(), Some("journal-article"));
        let e = entry(r#"{"doi":"10.1/a","metadata_response":"Resource not found."}"#);
        assert_eq!(e.metadata().unwrap(), MetadataResult::ResourceNotFound);
        let e = entry(r#"{"doi":"10.1/a","metadata_response":{"error":503}}"#);
        assert_eq!(e.metadata().unwrap(), MetadataResult::OtherError { code: 503 });
    }

    #[test]
    fn alias_sources() {
        let e = entry(r#"{"doi":"10.14359/15303","alias_of":"10.14359/15306"}"#);
        let t = e.alias_target().unwrap().unwrap();
        assert_eq!((t.primary.as_str(), t.source), ("10.14359/15306", AliasSource::ConflictRecord));
        let e = entry(
            r#"{"doi":"10.2523/x","handle_response":{"values":[{"type":"HS_ALIAS","data":{"value":"10.2118/x"}}]}}"#,
        );
        let t = e.alias_target().unwrap().unwrap();
        assert_eq!((t.primary.as_str(), t.source), ("10.2118/x", AliasSource::Handle));
        let e = entry(r#"{"doi":"10.1/a","handle_response":{"values":[]}}"#);
        assert_eq!(e.alias_target(), Some(None));
        let e = entry(r#"{"doi":"10.1/a"}"#);
        assert_eq!(e.alias_target(), None);
    }

    #[test]
    fn duplicates_and_bad_lines_are_errors() {
        let err = FixtureStore::from_jsonl("{\"doi\":\"10.1/A\"}\n{\"doi\":\"10.1/a\"}\n").unwrap_err();
        assert!(matches!(err, FixtureError::Duplicate { line: 2, .. }));
        let err = FixtureStore::from_jsonl("{\"doi\":\"bogus\"}").unwrap_err();
        assert!(matches!(err, FixtureError::Parse { line: 1, .. }));
    }
}

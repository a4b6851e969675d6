use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::doi::NormalizedDoi;

/// URI Crossref redirects defunct DOIs to.
pub const DELETED_DOI_URI: &str = "https://www.crossref.org/_deleted-doi/";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "name", rename_all = "snake_case")]
pub enum RaOutcome {
    Crossref,
    /// Registered with another agency; the name is never empty.
    OtherRa(String),
    DoesNotExist,
    /// Transport failed after retries, or the response was not understood.
    Indeterminate,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RaResult {
    pub outcome: RaOutcome,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fetched_at: Option<DateTime<Utc>>,
}

impl RaResult {
    pub fn new(outcome: RaOutcome) -> Self {
        RaResult { outcome, fetched_at: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Method {
    Head,
    Get,
}

/// One response in a redirect chain. Status 0 marks a transport failure.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Hop {
    pub status: u16,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub location: Option<String>,
}

impl Hop {
    pub fn is_redirect(&self) -> bool {
        (300..400).contains(&self.status) && self.location.is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RedirectTrace {
    pub hops: Vec<Hop>,
    pub final_uri: Option<String>,
    pub method_used: Method,
    /// Chain stopped early: transport error, loop guard, or a 3xx without
    /// a location.
    #[serde(default)]
    pub incomplete: bool,
}

impl RedirectTrace {
    /// Builds a trace from observed hops; `final_uri` is the last location
    /// that was redirected to.
    pub fn from_hops(hops: Vec<Hop>, method_used: Method, incomplete: bool) -> Self {
        let final_uri = hops
            .iter()
            .rev()
            .find(|h| h.is_redirect())
            .and_then(|h| h.location.clone());
        RedirectTrace {
            hops,
            final_uri,
            method_used,
            incomplete,
        }
    }

    /// At least one HTTP response was received.
    pub fn responded(&self) -> bool {
        self.hops.iter().any(|h| h.status != 0)
    }

    pub fn has_redirect(&self) -> bool {
        self.final_uri.is_some()
    }

    /// Final URI is the deleted-content page (trailing segments tolerated).
    pub fn is_defunct(&self) -> bool {
        self.final_uri.as_deref().is_some_and(is_deleted_doi_uri)
    }
}

pub fn is_deleted_doi_uri(uri: &str) -> bool {
    let stem = DELETED_DOI_URI.trim_end_matches('/');
    match uri.strip_prefix(stem) {
        Some(rest) => rest.is_empty() || rest.starts_with('/') || rest.starts_with('?'),
        None => false,
    }
}

/// Fields copied from a works record.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct WorkRecord {
    #[serde(rename = "type", default)]
    pub doc_type: Option<String>,
    #[serde(default)]
    pub title: Option<String>,
    #[serde(default)]
    pub container_title: Option<String>,
    #[serde(default)]
    pub volume: Option<String>,
    #[serde(default)]
    pub issue: Option<String>,
    #[serde(default)]
    pub page: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum MetadataResult {
    Found { record: WorkRecord },
    ResourceNotFound,
    /// HTTP status of the failed request; 0 for transport failure.
    OtherError { code: u16 },
}

impl MetadataResult {
    pub fn record(&self) -> Option<&WorkRecord> {
        match self {
            MetadataResult::Found { record } => Some(record),
            _ => None,
        }
    }

    /// Failure caused by the network or the server rather than the DOI.
    pub fn is_transient(&self) -> bool {
        matches!(self, MetadataResult::OtherError { code } if *code == 0 || *code == 429 || *code >= 500)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AliasSource {
    /// Explicit alias record: a fixture entry or a conflict report row.
    ConflictRecord,
    /// `HS_ALIAS` value in the handle record.
    Handle,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AliasTarget {
    pub primary: NormalizedDoi,
    pub source: AliasSource,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrimaryEvidence {
    pub doi: NormalizedDoi,
    pub source: AliasSource,
    pub metadata: MetadataResult,
}

/// Everything gathered about one candidate, in lookup order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResolutionEvidence {
    pub doi: NormalizedDoi,
    pub ra: RaResult,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub redirect: Option<RedirectTrace>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metadata: Option<MetadataResult>,
    /// Set when the DOI's own metadata was not found and an alias target was
    /// looked up.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub primary: Option<PrimaryEvidence>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub primary_lookup_failed: bool,
}

impl ResolutionEvidence {
    pub fn ra_only(doi: NormalizedDoi, ra: RaResult) -> Self {
        ResolutionEvidence {
            doi,
            ra,
            redirect: None,
            metadata: None,
            primary: None,
            primary_lookup_failed: false,
        }
    }
}

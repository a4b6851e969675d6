//! Evidence gathering: registration agency, redirect chain, and metadata.
//!
//! [`Resolvers`] answers each question from a fixture store when one is
//! loaded and falls back to the live services unless running offline.
//! [`gather_evidence`] asks the questions lazily, in the order the
//! classifier needs them: agency first, then redirects and metadata only for
//! Crossref DOIs.

mod cache;
pub mod fixtures;
mod live;
mod log;
pub mod parse;
mod ratelimit;
mod types;

pub use cache::ResponseCache;
pub use fixtures::{FixtureEntry, FixtureError, FixtureStore};
pub use live::{
    encode_doi_path, read_conflict_report, HttpResponse, LiveConfig, LiveResolver, ReqwestTransport, RetryPolicy,
    Transport, TransportError, DEFAULT_API_BASE, DEFAULT_MAX_REDIRECTS, DEFAULT_RA_BASE, DEFAULT_RESOLVER_BASE,
};
pub use log::{LogEntry, RequestLog};
pub use ratelimit::RateLimiter;
pub use types::*;

use crate::doi::NormalizedDoi;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ResolveError {
    #[error("offline and no recorded {field} for {doi}")]
    FixtureMiss { doi: String, field: &'static str },
}

/// The four lookups evidence gathering needs.
pub trait EvidenceSource: Sync {
    fn lookup_ra(&self, doi: &NormalizedDoi) -> Result<RaResult, ResolveError>;
    fn trace_redirects(&self, doi: &NormalizedDoi) -> Result<RedirectTrace, ResolveError>;
    fn fetch_metadata(&self, doi: &NormalizedDoi) -> Result<MetadataResult, ResolveError>;
    /// `None` when no alias target can be determined.
    fn resolve_primary(&self, alias: &NormalizedDoi) -> Result<Option<AliasTarget>, ResolveError>;
}

/// Fixture replay layered over an optional live client.
pub struct Resolvers {
    fixtures: Option<FixtureStore>,
    live: Option<LiveResolver>,
    max_redirects: usize,
    log: RequestLog,
}

impl Resolvers {
    /// Replay only; any lookup without a recorded answer is an error.
    pub fn offline(fixtures: FixtureStore) -> Self {
        Resolvers {
            fixtures: Some(fixtures),
            live: None,
            max_redirects: DEFAULT_MAX_REDIRECTS,
            log: RequestLog::default(),
        }
    }

    /// Live lookups, with recorded answers taking precedence when given.
    pub fn live(live: LiveResolver, fixtures: Option<FixtureStore>) -> Self {
        Resolvers {
            fixtures,
            live: Some(live),
            max_redirects: DEFAULT_MAX_REDIRECTS,
            log: RequestLog::default(),
        }
    }

    pub fn with_max_redirects(mut self, k: usize) -> Self {
        self.max_redirects = k;
        self
    }

    pub fn is_offline(&self) -> bool {
        self.live.is_none()
    }

    /// One entry per evidence request: kind is `ra`, `redirect`, `metadata`
    /// or `primary`, target is the DOI.
    pub fn request_log(&self) -> &RequestLog {
        &self.log
    }

    pub fn live_client(&self) -> Option<&LiveResolver> {
        self.live.as_ref()
    }

    fn answer<T>(
        &self,
        doi: &NormalizedDoi,
        field: &'static str,
        recorded: impl FnOnce(&FixtureEntry) -> Option<T>,
        fetch: impl FnOnce(&LiveResolver) -> T,
    ) -> Result<T, ResolveError> {
        self.log.record(field, doi.as_str());
        if let Some(v) = self.fixtures.as_ref().and_then(|f| f.get(doi)).and_then(recorded) {
            return Ok(v);
        }
        match &self.live {
            Some(live) => Ok(fetch(live)),
            None => Err(ResolveError::FixtureMiss {
                doi: doi.as_str().to_owned(),
                field,
            }),
        }
    }
}

impl EvidenceSource for Resolvers {
    fn lookup_ra(&self, doi: &NormalizedDoi) -> Result<RaResult, ResolveError> {
        self.answer(doi, "ra", FixtureEntry::ra, |l| l.lookup_ra(doi))
    }

    fn trace_redirects(&self, doi: &NormalizedDoi) -> Result<RedirectTrace, ResolveError> {
        let k = self.max_redirects;
        self.answer(doi, "redirect", |e| e.trace(k), |l| l.trace_redirects(doi))
    }

    fn fetch_metadata(&self, doi: &NormalizedDoi) -> Result<MetadataResult, ResolveError> {
        self.answer(doi, "metadata", FixtureEntry::metadata, |l| l.fetch_metadata(doi))
    }

    fn resolve_primary(&self, alias: &NormalizedDoi) -> Result<Option<AliasTarget>, ResolveError> {
        self.answer(alias, "primary", FixtureEntry::alias_target, |l| l.resolve_primary(alias))
    }
}

/// Collects evidence for one candidate, stopping as soon as the answers so
/// far settle its class.
pub fn gather_evidence(src: &dyn EvidenceSource, doi: &NormalizedDoi) -> Result<ResolutionEvidence, ResolveError> {
    let ra = src.lookup_ra(doi)?;
    let mut ev = ResolutionEvidence::ra_only(doi.clone(), ra);
    if ev.ra.outcome != RaOutcome::Crossref {
        return Ok(ev);
    }
    let trace = src.trace_redirects(doi)?;
    let settled = !trace.responded() || trace.is_defunct() || !trace.has_redirect();
    ev.redirect = Some(trace);
    if settled {
        return Ok(ev);
    }
    let metadata = src.fetch_metadata(doi)?;
    if metadata == MetadataResult::ResourceNotFound {
        match src.resolve_primary(doi)? {
            Some(target) if target.primary != *doi => {
                let primary_meta = src.fetch_metadata(&target.primary)?;
                ev.primary = Some(PrimaryEvidence {
                    doi: target.primary,
                    source: target.source,
                    metadata: primary_meta,
                });
            }
            _ => ev.primary_lookup_failed = true,
        }
    }
    ev.metadata = Some(metadata);
    Ok(ev)
}

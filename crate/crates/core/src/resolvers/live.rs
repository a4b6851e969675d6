//! Network-backed lookups: retry, per-host rate limiting, and caching around
//! a pluggable HTTP transport.

use std::collections::HashMap;
use std::sync::Arc;
use std::time::Duration;

use percent_encoding::{utf8_percent_encode, AsciiSet, CONTROLS};
use serde_json::Value;

use super::cache::ResponseCache;
use super::log::RequestLog;
use super::parse;
use super::types::{AliasSource, AliasTarget, Hop, MetadataResult, Method, RaOutcome, RaResult, RedirectTrace};
use crate::doi::NormalizedDoi;

/// Characters escaped when a DOI is placed in a URL path. `%` is left alone:
/// canonical DOIs already carry a literal percent as `%25`.
const DOI_PATH: &AsciiSet = &CONTROLS
    .add(b' ')
    .add(b'"')
    .add(b'#')
    .add(b'<')
    .add(b'>')
    .add(b'?')
    .add(b'`')
    .add(b'{')
    .add(b'}')
    .add(b'|')
    .add(b'\\')
    .add(b'^')
    .add(b'[')
    .add(b']');

pub fn encode_doi_path(doi: &NormalizedDoi) -> String {
    utf8_percent_encode(doi.as_str(), DOI_PATH).to_string()
}

pub const DEFAULT_RA_BASE: &str = "https://doi.org/doiRA";
pub const DEFAULT_RESOLVER_BASE: &str = "https://doi.org";
pub const DEFAULT_API_BASE: &str = "https://api.crossref.org";
pub const DEFAULT_MAX_REDIRECTS: usize = 10;

#[derive(Debug, Clone)]
pub struct HttpResponse {
    pub status: u16,
    pub location: Option<String>,
    pub body: Vec<u8>,
}

#[derive(Debug, Clone, thiserror::Error)]
#[error("transport error: {0}")]
pub struct TransportError(pub String);

/// Sends one request without following redirects.
pub trait Transport: Send + Sync {
    fn send(&self, method: Method, url: &str) -> Result<HttpResponse, TransportError>;
}

pub struct ReqwestTransport {
    client: reqwest::blocking::Client,
}

impl ReqwestTransport {
    pub fn new(user_agent: &str, timeout: Duration) -> Result<Self, TransportError> {
        let client = reqwest::blocking::Client::builder()
            .redirect(reqwest::redirect::Policy::none())
            .user_agent(user_agent)
            .timeout(timeout)
            .build()
            .map_err(|e| TransportError(e.to_string()))?;
        Ok(ReqwestTransport { client })
    }
}

impl Transport for ReqwestTransport {
    fn send(&self, method: Method, url: &str) -> Result<HttpResponse, TransportError> {
        let req = match method {
            Method::Head => self.client.head(url),
            Method::Get => self.client.get(url),
        };
        let resp = req.send().map_err(|e| TransportError(e.to_string()))?;
        let status = resp.status().as_u16();
        let location = resp
            .headers()
            .get(reqwest::header::LOCATION)
            .and_then(|v| v.to_str().ok())
            .map(str::to_owned);
        let body = match method {
            Method::Head => Vec::new(),
            Method::Get => resp.bytes().map_err(|e| TransportError(e.to_string()))?.to_vec(),
        };
        Ok(HttpResponse { status, location, body })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RetryPolicy {
    pub attempts: u32,
    pub initial_backoff: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy {
            attempts: 3,
            initial_backoff: Duration::from_secs(1),
        }
    }
}

#[derive(Debug, Clone)]
pub struct LiveConfig {
    pub ra_base: String,
    pub resolver_base: String,
    pub api_base: String,
    pub mailto: Option<String>,
    pub max_redirects: usize,
    pub retry: RetryPolicy,
}

impl Default for LiveConfig {
    fn default() -> Self {
        LiveConfig {
            ra_base: DEFAULT_RA_BASE.into(),
            resolver_base: DEFAULT_RESOLVER_BASE.into(),
            api_base: DEFAULT_API_BASE.into(),
            mailto: None,
            max_redirects: DEFAULT_MAX_REDIRECTS,
            retry: RetryPolicy::default(),
        }
    }
}

fn host_of(url: &str) -> String {
    reqwest::Url::parse(url)
        .ok()
        .and_then(|u| u.host_str().map(|h| match u.port() {
            Some(p) => format!("{h}:{p}"),
            None => h.to_owned(),
        }))
        .unwrap_or_default()
}

pub struct LiveResolver {
    transport: Arc<dyn Transport>,
    config: LiveConfig,
    limiter: super::RateLimiter,
    cache: Option<ResponseCache>,
    conflicts: HashMap<NormalizedDoi, NormalizedDoi>,
    http_log: RequestLog,
}

impl LiveResolver {
    pub fn new(transport: Arc<dyn Transport>, config: LiveConfig, rate_limit: f64) -> Self {
        LiveResolver {
            transport,
            config,
            limiter: super::RateLimiter::new(rate_limit),
            cache: None,
            conflicts: HashMap::new(),
            http_log: RequestLog::default(),
        }
    }

    pub fn with_cache(mut self, cache: ResponseCache) -> Self {
        self.cache = Some(cache);
        self
    }

    /// Alias → primary rows from a conflict report, consulted before the
    /// handle record.
    pub fn with_conflict_report(mut self, pairs: HashMap<NormalizedDoi, NormalizedDoi>) -> Self {
        self.conflicts = pairs;
        self
    }

    /// Every HTTP request sent, in order, with the target host.
    pub fn http_log(&self) -> &RequestLog {
        &self.http_log
    }

    fn send_once(&self, method: Method, url: &str) -> Result<HttpResponse, TransportError> {
        let host = host_of(url);
        self.limiter.acquire(&host);
        self.http_log.record(&host, url);
        self.transport.send(method, url)
    }

    /// Retries transport errors, 429, and 5xx with exponential backoff.
    fn send(&self, method: Method, url: &str) -> Result<HttpResponse, TransportError> {
        let attempts = self.config.retry.attempts.max(1);
        let mut backoff = self.config.retry.initial_backoff;
        let mut last = None;
        for attempt in 0..attempts {
            if attempt > 0 {
                std::thread::sleep(backoff);
                backoff *= 2;
            }
            match self.send_once(method, url) {
                Ok(resp) if resp.status != 429 && resp.status < 500 => return Ok(resp),
                other => {
                    log::debug!("attempt {} for {url} failed: {:?}", attempt + 1, other.as_ref().map(|r| r.status));
                    last = Some(other);
                }
            }
        }
        last.expect("at least one attempt")
    }

    fn cached<T, F>(&self, endpoint: &str, doi: &NormalizedDoi, keep: impl Fn(&T) -> bool, fetch: F) -> T
    where
        T: serde::Serialize + serde::de::DeserializeOwned,
        F: FnOnce() -> T,
    {
        if let Some(hit) = self.cache.as_ref().and_then(|c| c.get::<T>(endpoint, doi)) {
            return hit;
        }
        let value = fetch();
        if let Some(cache) = &self.cache {
            if keep(&value) {
                if let Err(e) = cache.put(endpoint, doi, &value) {
                    log::warn!("cache write failed for {doi}: {e}");
                }
            }
        }
        value
    }

    fn with_mailto(&self, url: String) -> String {
        match &self.config.mailto {
            Some(addr) => {
                let sep = if url.contains('?') { '&' } else { '?' };
                format!("{url}{sep}mailto={}", utf8_percent_encode(addr, percent_encoding::NON_ALPHANUMERIC))
            }
            None => url,
        }
    }

    pub fn lookup_ra(&self, doi: &NormalizedDoi) -> RaResult {
        self.cached(
            "ra",
            doi,
            |r: &RaResult| r.outcome != RaOutcome::Indeterminate,
            || {
                let url = format!("{}/{}", self.config.ra_base.trim_end_matches('/'), encode_doi_path(doi));
                let outcome = match self.send(Method::Get, &url) {
                    Ok(resp) if resp.status < 300 => serde_json::from_slice::<Value>(&resp.body)
                        .map(|v| parse::ra_outcome(&v))
                        .unwrap_or(RaOutcome::Indeterminate),
                    // the service answers unknown DOIs with the error body and a 4xx
                    Ok(resp) if resp.status < 500 => serde_json::from_slice::<Value>(&resp.body)
                        .map(|v| parse::ra_outcome(&v))
                        .unwrap_or(RaOutcome::Indeterminate),
                    _ => RaOutcome::Indeterminate,
                };
                RaResult {
                    outcome,
                    fetched_at: Some(chrono::Utc::now()),
                }
            },
        )
    }

    pub fn trace_redirects(&self, doi: &NormalizedDoi) -> RedirectTrace {
        self.cached(
            "redirect",
            doi,
            |t: &RedirectTrace| !t.hops.iter().any(|h| h.status == 0 || h.status >= 500),
            || self.walk_redirects(doi),
        )
    }

    fn walk_redirects(&self, doi: &NormalizedDoi) -> RedirectTrace {
        let mut url = format!("{}/{}", self.config.resolver_base.trim_end_matches('/'), encode_doi_path(doi));
        let mut method = Method::Head;
        let mut switched = false;
        let mut hops = Vec::new();
        let mut incomplete = false;
        let mut redirects = 0usize;
        loop {
            let mut result = self.send(method, &url);
            if let Ok(resp) = &result {
                if method == Method::Head && !switched && (400..500).contains(&resp.status) {
                    method = Method::Get;
                    switched = true;
                    result = self.send(method, &url);
                }
            }
            let resp = match result {
                Ok(resp) => resp,
                Err(e) => {
                    log::debug!("redirect trace for {doi} stopped: {e}");
                    hops.push(Hop { status: 0, location: None });
                    incomplete = true;
                    break;
                }
            };
            let is_3xx = (300..400).contains(&resp.status);
            let location = if is_3xx {
                resp.location.as_deref().map(|loc| {
                    reqwest::Url::parse(&url)
                        .and_then(|base| base.join(loc))
                        .map(|u| u.to_string())
                        .unwrap_or_else(|_| loc.to_owned())
                })
            } else {
                None
            };
            hops.push(Hop { status: resp.status, location: location.clone() });
            match (is_3xx, location) {
                // the tombstone page settles the class; never leave for its host
                (true, Some(next)) if super::types::is_deleted_doi_uri(&next) => break,
                (true, Some(next)) => {
                    redirects += 1;
                    if redirects > self.config.max_redirects {
                        incomplete = true;
                        break;
                    }
                    url = next;
                }
                (true, None) => {
                    incomplete = true;
                    break;
                }
                (false, _) => break,
            }
        }
        RedirectTrace::from_hops(hops, method, incomplete)
    }

    pub fn fetch_metadata(&self, doi: &NormalizedDoi) -> MetadataResult {
        self.cached(
            "metadata",
            doi,
            |m: &MetadataResult| !m.is_transient(),
            || {
                let url = self.with_mailto(format!(
                    "{}/works/{}",
                    self.config.api_base.trim_end_matches('/'),
                    encode_doi_path(doi)
                ));
                match self.send(Method::Get, &url) {
                    Ok(resp) => parse::metadata_from_http(resp.status, &resp.body),
                    Err(_) => MetadataResult::OtherError { code: 0 },
                }
            },
        )
    }

    pub fn resolve_primary(&self, alias: &NormalizedDoi) -> Option<AliasTarget> {
        if let Some(primary) = self.conflicts.get(alias) {
            return Some(AliasTarget {
                primary: primary.clone(),
                source: AliasSource::ConflictRecord,
            });
        }
        let primary: Option<NormalizedDoi> = self.cached(
            "handle",
            alias,
            |_| true,
            || {
                let url = format!(
                    "{}/api/handles/{}",
                    self.config.resolver_base.trim_end_matches('/'),
                    encode_doi_path(alias)
                );
                match self.send(Method::Get, &url) {
                    Ok(resp) if resp.status < 300 => serde_json::from_slice::<Value>(&resp.body)
                        .ok()
                        .and_then(|v| parse::handle_alias(&v)),
                    _ => None,
                }
            },
        );
        primary
            .filter(|p| p != alias)
            .map(|primary| AliasTarget { primary, source: AliasSource::Handle })
    }
}

/// Reads a conflict report: CSV with `alias,primary` columns (header optional).
pub fn read_conflict_report(path: &std::path::Path) -> Result<HashMap<NormalizedDoi, NormalizedDoi>, String> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_path(path)
        .map_err(|e| e.to_string())?;
    let mut out = HashMap::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| e.to_string())?;
        let (Some(a), Some(p)) = (rec.get(0), rec.get(1)) else {
            return Err(format!("{}: row {} needs two columns", path.display(), i + 1));
        };
        match (a.parse::<NormalizedDoi>(), p.parse::<NormalizedDoi>()) {
            (Ok(a), Ok(p)) => {
                out.insert(a, p);
            }
            _ if i == 0 => continue,
            _ => return Err(format!("{}: row {} is not a DOI pair", path.display(), i + 1)),
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn doi_path_encoding() {
        let doi: NormalizedDoi = "10.1002/(sici)1097-0258<1>3.0.co;2-#".parse().unwrap();
        assert_eq!(encode_doi_path(&doi), "10.1002/(sici)1097-0258%3C1%3E3.0.co;2-%23");
        let doi: NormalizedDoi = "10.1/50%25".parse().unwrap();
        assert_eq!(encode_doi_path(&doi), "10.1/50%25");
    }

    #[test]
    fn host_extraction() {
        assert_eq!(host_of("https://api.crossref.org/works/x"), "api.crossref.org");
        assert_eq!(host_of("http://127.0.0.1:8080/x"), "127.0.0.1:8080");
    }

    #[test]
    fn conflict_report_csv() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.csv");
        std::fs::write(&p, "alias,primary\n10.2523/X,10.2118/X\n").unwrap();
        let map = read_conflict_report(&p).unwrap();
        assert_eq!(map[&"10.2523/x".parse().unwrap()].as_str(), "10.2118/x");
    }
}

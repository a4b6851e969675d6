//! Deletion classes and the decision tree that assigns them.
//!
//! ```text
//! RA lookup ── does not exist ──────────────────────────── NonExisting
//!     ├─────── other agency ────────────────────────────── ExcludedNonCrossref
//!     └─ Crossref ── final URI is the deleted-DOI page ──── Defunct
//!                 ├─ no redirect ───────────────────────── NoRedirect
//!                 └─ redirected ── "delete" in title or
//!                                  container title of the
//!                                  DOI or its alias target ─ DeletedDescription
//!                               ├─ metadata not found ──── Alias
//!                               └─ anything else ───────── Other
//! ```
//!
//! Evidence that cannot support a decision (agency lookup failed, no HTTP
//! response at all, metadata service down) yields [`Unclassifiable`], which
//! is kept out of every count.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::doi::NormalizedDoi;
use crate::resolvers::{
    gather_evidence, AliasSource, EvidenceSource, MetadataResult, RaOutcome, ResolutionEvidence, ResolveError,
    WorkRecord,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeletionClass {
    NonExisting,
    Defunct,
    NoRedirect,
    Alias,
    DeletedDescription,
    Other,
    ExcludedNonCrossref,
}

impl DeletionClass {
    /// The six deleted groups, in table order.
    pub const DELETED: [DeletionClass; 6] = [
        DeletionClass::NonExisting,
        DeletionClass::Defunct,
        DeletionClass::NoRedirect,
        DeletionClass::Alias,
        DeletionClass::DeletedDescription,
        DeletionClass::Other,
    ];

    pub const ALL: [DeletionClass; 7] = [
        DeletionClass::NonExisting,
        DeletionClass::Defunct,
        DeletionClass::NoRedirect,
        DeletionClass::Alias,
        DeletionClass::DeletedDescription,
        DeletionClass::Other,
        DeletionClass::ExcludedNonCrossref,
    ];

    pub fn is_deleted(self) -> bool {
        self != DeletionClass::ExcludedNonCrossref
    }

    /// Group name as printed in reports.
    pub fn label(self) -> &'static str {
        match self {
            DeletionClass::NonExisting => "Non-existing DOIs",
            DeletionClass::Defunct => "Defunct DOIs",
            DeletionClass::NoRedirect => "DOIs without redirects",
            DeletionClass::Alias => "Alias DOIs",
            DeletionClass::DeletedDescription => "DOIs with deleted description on metadata",
            DeletionClass::Other => "Other DOIs",
            DeletionClass::ExcludedNonCrossref => "Non-Crossref DOIs (not deleted)",
        }
    }

    pub fn key(self) -> &'static str {
        match self {
            DeletionClass::NonExisting => "non_existing",
            DeletionClass::Defunct => "defunct",
            DeletionClass::NoRedirect => "no_redirect",
            DeletionClass::Alias => "alias",
            DeletionClass::DeletedDescription => "deleted_description",
            DeletionClass::Other => "other",
            DeletionClass::ExcludedNonCrossref => "excluded_non_crossref",
        }
    }
}

impl fmt::Display for DeletionClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, thiserror::Error)]
#[serde(rename_all = "snake_case")]
pub enum Unclassifiable {
    #[error("registration agency lookup was indeterminate")]
    RaIndeterminate,
    #[error("no HTTP response while tracing redirects")]
    TraceFailed,
    #[error("metadata service unavailable")]
    MetadataUnavailable,
    #[error("evidence incomplete for a Crossref DOI")]
    MissingEvidence,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatchedField {
    Title,
    ContainerTitle,
}

impl MatchedField {
    pub fn key(self) -> &'static str {
        match self {
            MatchedField::Title => "title",
            MatchedField::ContainerTitle => "container_title",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatchedIn {
    Own,
    AliasTarget,
}

impl MatchedIn {
    pub fn key(self) -> &'static str {
        match self {
            MatchedIn::Own => "own",
            MatchedIn::AliasTarget => "alias_target",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeleteMatch {
    pub field: MatchedField,
    pub matched_in: MatchedIn,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Anomaly {
    /// Classified Other although a normal metadata record came back.
    MetadataFound,
    /// Classified Other on a non-transient metadata error.
    MetadataError { code: u16 },
    /// Alias whose primary could not be determined.
    AliasWithoutPrimary,
    /// Redirect chain stopped early; classified by the last observed hop.
    TraceIncomplete,
}

impl Anomaly {
    pub fn key(&self) -> String {
        match self {
            Anomaly::MetadataFound => "metadata_found".into(),
            Anomaly::MetadataError { code } => format!("metadata_error_{code}"),
            Anomaly::AliasWithoutPrimary => "alias_without_primary".into(),
            Anomaly::TraceIncomplete => "trace_incomplete".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Classification {
    pub class: DeletionClass,
    pub matched: Option<DeleteMatch>,
    pub anomalies: Vec<Anomaly>,
}

fn delete_match(record: &WorkRecord, matched_in: MatchedIn) -> Option<DeleteMatch> {
    let fields = [
        (MatchedField::Title, record.title.as_deref()),
        (MatchedField::ContainerTitle, record.container_title.as_deref()),
    ];
    fields.into_iter().find_map(|(field, text)| {
        let text = text?;
        text.to_lowercase().contains("delete").then(|| DeleteMatch {
            field,
            matched_in,
            text: text.to_owned(),
        })
    })
}

/// Applies the decision tree to one DOI's evidence.
///
/// ```
/// use doi_audit::classifier::{classify, DeletionClass};
/// use doi_audit::resolvers::{RaOutcome, RaResult, ResolutionEvidence};
///
/// let doi = "10.1/gone".parse().unwrap();
/// let ev = ResolutionEvidence::ra_only(doi, RaResult::new(RaOutcome::DoesNotExist));
/// assert_eq!(classify(&ev).unwrap().class, DeletionClass::NonExisting);
/// ```
pub fn classify(ev: &ResolutionEvidence) -> Result<Classification, Unclassifiable> {
    let plain = |class| Ok(Classification { class, matched: None, anomalies: Vec::new() });
    match &ev.ra.outcome {
        RaOutcome::DoesNotExist => return plain(DeletionClass::NonExisting),
        RaOutcome::OtherRa(_) => return plain(DeletionClass::ExcludedNonCrossref),
        RaOutcome::Indeterminate => return Err(Unclassifiable::RaIndeterminate),
        RaOutcome::Crossref => {}
    }
    let trace = ev.redirect.as_ref().ok_or(Unclassifiable::MissingEvidence)?;
    if !trace.responded() {
        return Err(Unclassifiable::TraceFailed);
    }
    let mut anomalies = Vec::new();
    if trace.incomplete {
        anomalies.push(Anomaly::TraceIncomplete);
    }
    let done = |class, matched, anomalies| Ok(Classification { class, matched, anomalies });
    if trace.is_defunct() {
        return done(DeletionClass::Defunct, None, anomalies);
    }
    if !trace.has_redirect() {
        return done(DeletionClass::NoRedirect, None, anomalies);
    }
    let metadata = ev.metadata.as_ref().ok_or(Unclassifiable::MissingEvidence)?;
    match metadata {
        MetadataResult::Found { record } => match delete_match(record, MatchedIn::Own) {
            Some(m) => done(DeletionClass::DeletedDescription, Some(m), anomalies),
            None => {
                anomalies.push(Anomaly::MetadataFound);
                done(DeletionClass::Other, None, anomalies)
            }
        },
        MetadataResult::ResourceNotFound => {
            let target_match = ev
                .primary
                .as_ref()
                .and_then(|p| p.metadata.record())
                .and_then(|r| delete_match(r, MatchedIn::AliasTarget));
            match target_match {
                Some(m) => done(DeletionClass::DeletedDescription, Some(m), anomalies),
                None => {
                    if ev.primary.is_none() {
                        anomalies.push(Anomaly::AliasWithoutPrimary);
                    }
                    done(DeletionClass::Alias, None, anomalies)
                }
            }
        }
        m if m.is_transient() => Err(Unclassifiable::MetadataUnavailable),
        MetadataResult::OtherError { code } => {
            anomalies.push(Anomaly::MetadataError { code: *code });
            done(DeletionClass::Other, None, anomalies)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Assignment {
    pub outcome: Result<Classification, Unclassifiable>,
    pub evidence: ResolutionEvidence,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReviewItem {
    pub doi: NormalizedDoi,
    pub matched_field: MatchedField,
    pub matched_in: MatchedIn,
    pub matched_text: String,
    pub landing_uri: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrimarySummary {
    pub doi: NormalizedDoi,
    pub source: AliasSource,
    #[serde(flatten)]
    pub record: WorkRecord,
}

/// Compact per-DOI evidence carried in the classification output.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvidenceSummary {
    pub ra: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ra_name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub final_uri: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub method: Option<String>,
    #[serde(default)]
    pub hops: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metadata: Option<String>,
    /// Document type from the DOI's own record, else from its primary.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub doc_type: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub primary: Option<PrimarySummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matched: Option<DeleteMatch>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub anomalies: Vec<Anomaly>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unclassifiable: Option<Unclassifiable>,
}

/// One line of the classification JSON-lines output.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassificationRecord {
    pub doi: NormalizedDoi,
    /// `None` for unclassifiable candidates (serialized as `"unclassifiable"`).
    #[serde(with = "class_or_unclassifiable")]
    pub class: Option<DeletionClass>,
    pub evidence_summary: EvidenceSummary,
}

mod class_or_unclassifiable {
    use super::DeletionClass;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &Option<DeletionClass>, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(v.map(DeletionClass::key).unwrap_or("unclassifiable"))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<DeletionClass>, D::Error> {
        let s = String::deserialize(d)?;
        if s == "unclassifiable" {
            return Ok(None);
        }
        DeletionClass::ALL
            .into_iter()
            .find(|c| c.key() == s)
            .map(Some)
            .ok_or_else(|| serde::de::Error::custom(format!("unknown class {s:?}")))
    }
}

fn metadata_label(m: &MetadataResult) -> String {
    match m {
        MetadataResult::Found { .. } => "found".into(),
        MetadataResult::ResourceNotFound => "resource_not_found".into(),
        MetadataResult::OtherError { code } => format!("error_{code}"),
    }
}

impl Assignment {
    pub fn class(&self) -> Option<DeletionClass> {
        self.outcome.as_ref().ok().map(|c| c.class)
    }

    pub fn record(&self) -> ClassificationRecord {
        let ev = &self.evidence;
        let (ra, ra_name) = match &ev.ra.outcome {
            RaOutcome::Crossref => ("crossref", None),
            RaOutcome::OtherRa(name) => ("other_ra", Some(name.clone())),
            RaOutcome::DoesNotExist => ("does_not_exist", None),
            RaOutcome::Indeterminate => ("indeterminate", None),
        };
        let own_type = ev.metadata.as_ref().and_then(|m| m.record()).and_then(|r| r.doc_type.clone());
        let primary = ev.primary.as_ref().map(|p| PrimarySummary {
            doi: p.doi.clone(),
            source: p.source,
            record: p.metadata.record().cloned().unwrap_or_default(),
        });
        let primary_type = primary.as_ref().and_then(|p| p.record.doc_type.clone());
        let (matched, anomalies, unclassifiable) = match &self.outcome {
            Ok(c) => (c.matched.clone(), c.anomalies.clone(), None),
            Err(u) => (None, Vec::new(), Some(*u)),
        };
        ClassificationRecord {
            doi: ev.doi.clone(),
            class: self.class(),
            evidence_summary: EvidenceSummary {
                ra: ra.into(),
                ra_name,
                final_uri: ev.redirect.as_ref().and_then(|t| t.final_uri.clone()),
                method: ev.redirect.as_ref().map(|t| format!("{:?}", t.method_used).to_uppercase()),
                hops: ev.redirect.as_ref().map_or(0, |t| t.hops.len()),
                metadata: ev.metadata.as_ref().map(metadata_label),
                doc_type: own_type.or(primary_type),
                primary,
                matched,
                anomalies,
                unclassifiable,
            },
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ClassifiedSet {
    pub assignments: BTreeMap<NormalizedDoi, Assignment>,
    pub counts: BTreeMap<DeletionClass, u64>,
    pub unclassifiable: u64,
    pub review_queue: Vec<ReviewItem>,
}

#[derive(Debug, thiserror::Error)]
pub enum ClassifyError {
    #[error(transparent)]
    Resolve(#[from] ResolveError),
    #[error("duplicate candidate {0}")]
    DuplicateCandidate(String),
}

impl ClassifiedSet {
    /// Classifies already-gathered evidence.
    pub fn from_evidence(evidence: impl IntoIterator<Item = ResolutionEvidence>) -> Result<Self, ClassifyError> {
        let mut set = ClassifiedSet::default();
        for ev in evidence {
            let outcome = classify(&ev);
            let doi = ev.doi.clone();
            let prev = set.assignments.insert(doi.clone(), Assignment { outcome, evidence: ev });
            if prev.is_some() {
                return Err(ClassifyError::DuplicateCandidate(doi.into_string()));
            }
        }
        for (doi, a) in &set.assignments {
            match &a.outcome {
                Ok(c) => {
                    *set.counts.entry(c.class).or_default() += 1;
                    if let (DeletionClass::DeletedDescription, Some(m)) = (c.class, &c.matched) {
                        set.review_queue.push(ReviewItem {
                            doi: doi.clone(),
                            matched_field: m.field,
                            matched_in: m.matched_in,
                            matched_text: m.text.clone(),
                            landing_uri: a.evidence.redirect.as_ref().and_then(|t| t.final_uri.clone()),
                        });
                    }
                }
                Err(_) => set.unclassifiable += 1,
            }
        }
        Ok(set)
    }

    pub fn count(&self, class: DeletionClass) -> u64 {
        self.counts.get(&class).copied().unwrap_or(0)
    }

    pub fn candidates(&self) -> u64 {
        self.assignments.len() as u64
    }

    pub fn deleted_total(&self) -> u64 {
        DeletionClass::DELETED.iter().map(|c| self.count(*c)).sum()
    }

    /// Deleted + excluded + unclassifiable equals the candidate count.
    pub fn check_partition(&self) -> Result<(), String> {
        let sum = self.deleted_total() + self.count(DeletionClass::ExcludedNonCrossref) + self.unclassifiable;
        if sum != self.candidates() {
            return Err(format!("class counts sum to {sum}, candidates {}", self.candidates()));
        }
        Ok(())
    }

    /// Classification output records in DOI order.
    pub fn records(&self) -> Vec<ClassificationRecord> {
        self.assignments.values().map(Assignment::record).collect()
    }

    pub fn evidence(&self) -> impl Iterator<Item = &ResolutionEvidence> {
        self.assignments.values().map(|a| &a.evidence)
    }
}

/// Gathers evidence for every candidate on `workers` threads. Results are
/// returned in candidate order regardless of scheduling.
pub fn gather_all(
    candidates: &[NormalizedDoi],
    src: &dyn EvidenceSource,
    workers: usize,
) -> Result<Vec<ResolutionEvidence>, ResolveError> {
    let workers = workers.clamp(1, candidates.len().max(1));
    let next = AtomicUsize::new(0);
    let abort = AtomicBool::new(false);
    let first_error: Mutex<Option<(usize, ResolveError)>> = Mutex::new(None);
    let mut slots: Vec<Option<ResolutionEvidence>> = vec![None; candidates.len()];
    let results: Mutex<Vec<(usize, ResolutionEvidence)>> = Mutex::new(Vec::with_capacity(candidates.len()));
    std::thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| {
                let mut local = Vec::new();
                while !abort.load(Ordering::Relaxed) {
                    let i = next.fetch_add(1, Ordering::Relaxed);
                    let Some(doi) = candidates.get(i) else { break };
                    match gather_evidence(src, doi) {
                        Ok(ev) => local.push((i, ev)),
                        Err(e) => {
                            abort.store(true, Ordering::Relaxed);
                            let mut slot = first_error.lock().unwrap_or_else(|p| p.into_inner());
                            // keep the lowest-index failure so the error is deterministic
                            if slot.as_ref().is_none_or(|(j, _)| i < *j) {
                                *slot = Some((i, e));
                            }
                            break;
                        }
                    }
                }
                results.lock().unwrap_or_else(|p| p.into_inner()).extend(local);
            });
        }
    });
    if let Some((_, e)) = first_error.into_inner().unwrap_or_else(|p| p.into_inner()) {
        return Err(e);
    }
    for (i, ev) in results.into_inner().unwrap_or_else(|p| p.into_inner()) {
        slots[i] = Some(ev);
    }
    Ok(slots.into_iter().map(|s| s.expect("every candidate gathered")).collect())
}

/// Gathers evidence and classifies every candidate.
pub fn run_classification(
    candidates: impl IntoIterator<Item = NormalizedDoi>,
    src: &dyn EvidenceSource,
    workers: usize,
) -> Result<ClassifiedSet, ClassifyError> {
    let candidates: Vec<NormalizedDoi> = candidates.into_iter().collect();
    let evidence = gather_all(&candidates, src, workers)?;
    ClassifiedSet::from_evidence(evidence)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::resolvers::{Hop, Method, PrimaryEvidence, RaResult, RedirectTrace, DELETED_DOI_URI};

    fn doi(s: &str) -> NormalizedDoi {
        s.parse().unwrap()
    }

    fn crossref(trace: Vec<Hop>, metadata: Option<MetadataResult>) -> ResolutionEvidence {
        let mut ev = ResolutionEvidence::ra_only(doi("10.1/x"), RaResult::new(RaOutcome::Crossref));
        ev.redirect = Some(RedirectTrace::from_hops(trace, Method::Head, false));
        ev.metadata = metadata;
        ev
    }

    fn to(uri: &str) -> Vec<Hop> {
        vec![Hop { status: 302, location: Some(uri.into()) }, Hop { status: 200, location: None }]
    }

    fn found(title: &str, container: &str) -> MetadataResult {
        MetadataResult::Found {
            record: WorkRecord {
                doc_type: Some("journal-article".into()),
                title: Some(title.into()),
                container_title: Some(container.into()),
                ..Default::default()
            },
        }
    }

    #[test]
    fn ra_branches() {
        let ev = ResolutionEvidence::ra_only(doi("10.1/x"), RaResult::new(RaOutcome::DoesNotExist));
        assert_eq!(classify(&ev).unwrap().class, DeletionClass::NonExisting);
        let ev = ResolutionEvidence::ra_only(doi("10.1/x"), RaResult::new(RaOutcome::OtherRa("JaLC".into())));
        assert_eq!(classify(&ev).unwrap().class, DeletionClass::ExcludedNonCrossref);
        let ev = ResolutionEvidence::ra_only(doi("10.1/x"), RaResult::new(RaOutcome::Indeterminate));
        assert_eq!(classify(&ev), Err(Unclassifiable::RaIndeterminate));
    }

    #[test]
    fn redirect_branches() {
        assert_eq!(classify(&crossref(to(DELETED_DOI_URI), None)).unwrap().class, DeletionClass::Defunct);
        let ev = crossref(vec![Hop { status: 404, location: None }], None);
        assert_eq!(classify(&ev).unwrap().class, DeletionClass::NoRedirect);
        let ev = crossref(vec![Hop { status: 0, location: None }], None);
        assert_eq!(classify(&ev), Err(Unclassifiable::TraceFailed));
    }

    #[test]
    fn metadata_branches() {
        let ev = crossref(to("https://p/"), Some(MetadataResult::ResourceNotFound));
        let c = classify(&ev).unwrap();
        assert_eq!(c.class, DeletionClass::Alias);
        assert_eq!(c.anomalies, [Anomaly::AliasWithoutPrimary]);

        let ev = crossref(to("https://p/"), Some(found("Deleted article", "J")));
        let c = classify(&ev).unwrap();
        assert_eq!(c.class, DeletionClass::DeletedDescription);
        assert_eq!(c.matched.unwrap().field, MatchedField::Title);

        let ev = crossref(to("https://p/"), Some(found("Fine", "Journal of DELETED things")));
        assert_eq!(classify(&ev).unwrap().matched.unwrap().field, MatchedField::ContainerTitle);

        let ev = crossref(to("https://p/"), Some(found("Fine", "Journal")));
        let c = classify(&ev).unwrap();
        assert_eq!(c.class, DeletionClass::Other);
        assert_eq!(c.anomalies, [Anomaly::MetadataFound]);

        let ev = crossref(to("https://p/"), Some(MetadataResult::OtherError { code: 503 }));
        assert_eq!(classify(&ev), Err(Unclassifiable::MetadataUnavailable));
        let ev = crossref(to("https://p/"), Some(MetadataResult::OtherError { code: 400 }));
        assert_eq!(classify(&ev).unwrap().class, DeletionClass::Other);
    }

    #[test]
    fn deleted_description_beats_alias() {
        let mut ev = crossref(to("https://p/"), Some(MetadataResult::ResourceNotFound));
        ev.primary = Some(PrimaryEvidence {
            doi: doi("10.1/p"),
            source: AliasSource::ConflictRecord,
            metadata: found("This article has been deleted", "J"),
        });
        let c = classify(&ev).unwrap();
        assert_eq!(c.class, DeletionClass::DeletedDescription);
        assert_eq!(c.matched.unwrap().matched_in, MatchedIn::AliasTarget);
    }

    #[test]
    fn record_json_round_trip() {
        let ev = crossref(to("https://p/"), Some(found("A", "B")));
        let set = ClassifiedSet::from_evidence([ev]).unwrap();
        let rec = &set.records()[0];
        let json = serde_json::to_string(rec).unwrap();
        assert!(json.contains(r#""class":"other""#), "{json}");
        let back: ClassificationRecord = serde_json::from_str(&json).unwrap();
        assert_eq!(&back, rec);

        let ev = ResolutionEvidence::ra_only(doi("10.1/u"), RaResult::new(RaOutcome::Indeterminate));
        let set = ClassifiedSet::from_evidence([ev]).unwrap();
        let json = serde_json::to_string(&set.records()[0]).unwrap();
        assert!(json.contains(r#""class":"unclassifiable""#), "{json}");
        assert_eq!(set.unclassifiable, 1);
        set.check_partition().unwrap();
    }
}

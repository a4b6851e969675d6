//! End-to-end orchestration with resumable stages.
//!
//! Stages run in order: ingest, diff, resolve, classify, analyze, report.
//! Each completed stage leaves a checkpoint under `<out>/checkpoints/` keyed
//! by a hash of everything that stage's output depends on (its config
//! fields, input file fingerprints, and the previous stage's key). A stage
//! whose checkpoint key matches and whose outputs all exist is skipped and
//! its outputs are reloaded instead.
//!
//! Work directory layout:
//!
//! ```text
//! <out>/snapshots/<label>.{sorted.txt,prefixes.tsv,json}
//! <out>/diff/{only_in_a.txt,only_in_b.txt,diff.json}
//! <out>/evidence.jsonl      one ResolutionEvidence per candidate, DOI order
//! <out>/classified.jsonl    one ClassificationRecord per candidate
//! <out>/analytics.json      the report bundle
//! <out>/report/             one file per table per format
//! <out>/manifest.json       timestamps, config hash, stage log
//! ```

use std::collections::BTreeMap;
use std::fmt;
use std::io::{self, BufRead, BufReader};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;
use std::time::{Duration, Instant};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::classifier::{gather_all, ClassifiedSet};
use crate::doi::NormalizedDoi;
use crate::fsutil::{write_atomic, write_atomic_with};
use crate::report::{emit_report, DiffCensus, ReportBundle, ReportFormat};
use crate::resolvers::{
    read_conflict_report, FixtureStore, LiveConfig, LiveResolver, ReqwestTransport, ResolutionEvidence, ResolveError,
    Resolvers, ResponseCache, RetryPolicy, DEFAULT_API_BASE, DEFAULT_MAX_REDIRECTS, DEFAULT_RA_BASE,
    DEFAULT_RESOLVER_BASE,
};
use crate::snapshot::{diff_snapshots, ingest_snapshot, label_stem, DiffSets, IngestOptions, SnapshotHandle, DEFAULT_CHUNK_BUDGET};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Ingest,
    Diff,
    Resolve,
    Classify,
    Analyze,
    Report,
}

impl Stage {
    pub const ALL: [Stage; 6] = [Stage::Ingest, Stage::Diff, Stage::Resolve, Stage::Classify, Stage::Analyze, Stage::Report];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Ingest => "ingest",
            Stage::Diff => "diff",
            Stage::Resolve => "resolve",
            Stage::Classify => "classify",
            Stage::Analyze => "analyze",
            Stage::Report => "report",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Stage {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Stage::ALL.into_iter().find(|st| st.name() == s).ok_or_else(|| format!("unknown stage {s:?}"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub snapshot_a: PathBuf,
    pub snapshot_b: PathBuf,
    pub label_a: String,
    pub label_b: String,
    /// Directory of recorded resolver responses (`*.jsonl`).
    pub fixtures: Option<PathBuf>,
    pub offline: bool,
    pub cache_dir: Option<PathBuf>,
    /// CSV of `alias,primary` pairs consulted before the handle API.
    pub conflict_report: Option<PathBuf>,
    /// Requests per second per host.
    pub rate_limit: f64,
    pub concurrency: usize,
    pub retry_attempts: u32,
    pub retry_backoff_ms: u64,
    pub mailto: Option<String>,
    pub ra_base: String,
    pub resolver_base: String,
    pub api_base: String,
    pub max_redirects: usize,
    pub chunk_budget: usize,
    pub out: PathBuf,
    pub formats: Vec<ReportFormat>,
    pub top_k: usize,
}

impl RunConfig {
    pub fn new(snapshot_a: impl Into<PathBuf>, snapshot_b: impl Into<PathBuf>, out: impl Into<PathBuf>) -> Self {
        let retry = RetryPolicy::default();
        RunConfig {
            snapshot_a: snapshot_a.into(),
            snapshot_b: snapshot_b.into(),
            label_a: "A".into(),
            label_b: "B".into(),
            fixtures: None,
            offline: false,
            cache_dir: None,
            conflict_report: None,
            rate_limit: 5.0,
            concurrency: 4,
            retry_attempts: retry.attempts,
            retry_backoff_ms: retry.initial_backoff.as_millis() as u64,
            mailto: None,
            ra_base: DEFAULT_RA_BASE.into(),
            resolver_base: DEFAULT_RESOLVER_BASE.into(),
            api_base: DEFAULT_API_BASE.into(),
            max_redirects: DEFAULT_MAX_REDIRECTS,
            chunk_budget: DEFAULT_CHUNK_BUDGET,
            out: out.into(),
            formats: vec![ReportFormat::Csv, ReportFormat::Json, ReportFormat::Markdown],
            top_k: 10,
        }
    }

    /// Offline replay against a fixture directory.
    pub fn offline(mut self, fixtures: impl Into<PathBuf>) -> Self {
        self.fixtures = Some(fixtures.into());
        self.offline = true;
        self
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        let bad = |m: String| Err(PipelineError::config(m));
        if self.offline && self.fixtures.is_none() {
            return bad("--offline requires --fixtures".into());
        }
        if !(self.rate_limit.is_finite() && self.rate_limit > 0.0) {
            return bad(format!("rate limit must be a positive number, got {}", self.rate_limit));
        }
        if self.concurrency == 0 {
            return bad("concurrency must be at least 1".into());
        }
        if self.top_k == 0 {
            return bad("top-k must be at least 1".into());
        }
        if self.retry_attempts == 0 {
            return bad("retry attempts must be at least 1".into());
        }
        if self.formats.is_empty() {
            return bad("at least one report format is required".into());
        }
        if self.chunk_budget < 1 << 16 {
            return bad(format!("chunk budget {} is below the 64 KiB minimum", self.chunk_budget));
        }
        if label_stem(&self.label_a) == label_stem(&self.label_b) {
            return bad(format!("labels {:?} and {:?} map to the same file name", self.label_a, self.label_b));
        }
        Ok(())
    }

    /// SHA-256 of the configuration, excluding the output directory.
    pub fn config_hash(&self) -> String {
        let mut v = serde_json::to_value(self).expect("config serializes");
        if let Some(m) = v.as_object_mut() {
            m.remove("out");
        }
        hex::encode(Sha256::digest(v.to_string().as_bytes()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorKind {
    Config,
    Input,
    StageFailure,
}

/// Fatal pipeline error with a process exit code and a JSON rendering.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PipelineError {
    pub kind: ErrorKind,
    pub stage: Option<Stage>,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub doi: Option<String>,
}

impl PipelineError {
    pub fn config(message: impl Into<String>) -> Self {
        PipelineError { kind: ErrorKind::Config, stage: None, message: message.into(), doi: None }
    }

    pub fn input(stage: Stage, message: impl fmt::Display) -> Self {
        PipelineError { kind: ErrorKind::Input, stage: Some(stage), message: message.to_string(), doi: None }
    }

    pub fn stage(stage: Stage, message: impl fmt::Display) -> Self {
        PipelineError { kind: ErrorKind::StageFailure, stage: Some(stage), message: message.to_string(), doi: None }
    }

    pub fn exit_code(&self) -> i32 {
        match self.kind {
            ErrorKind::Config => 2,
            ErrorKind::Input => 3,
            ErrorKind::StageFailure => 4,
        }
    }

    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Wrapped<'a> {
            error: &'a PipelineError,
        }
        serde_json::to_string(&Wrapped { error: self }).expect("error serializes")
    }
}

impl fmt::Display for PipelineError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.stage {
            Some(s) => write!(f, "{s}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

impl std::error::Error for PipelineError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StageStatus {
    Ran,
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub stage: Stage,
    pub status: StageStatus,
    pub key: String,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub config_hash: String,
    pub started_at: DateTime<Utc>,
    pub finished_at: DateTime<Utc>,
    pub offline: bool,
    pub stages: Vec<StageRecord>,
    /// Evidence lookups issued during this invocation.
    pub evidence_requests: u64,
}

#[derive(Debug, Serialize, Deserialize)]
struct Checkpoint {
    stage: Stage,
    key: String,
    outputs: Vec<PathBuf>,
}

/// Outcome of [`Pipeline::run_through`].
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub stages: Vec<StageRecord>,
    pub diff: Option<DiffSets>,
    pub classified: Option<ClassifiedSet>,
    pub bundle: Option<ReportBundle>,
    pub report_files: Vec<PathBuf>,
}

pub struct Pipeline {
    cfg: RunConfig,
    started_at: DateTime<Utc>,
    records: Vec<StageRecord>,
    evidence_requests: u64,
    prev_key: String,
}

fn fingerprint(path: &Path) -> io::Result<serde_json::Value> {
    let meta = std::fs::metadata(path)?;
    let mtime = meta
        .modified()
        .ok()
        .and_then(|t| t.duration_since(std::time::UNIX_EPOCH).ok())
        .map_or(0, |d| d.as_nanos());
    Ok(serde_json::json!([path.to_string_lossy(), meta.len(), mtime.to_string()]))
}

fn dir_fingerprint(dir: &Path) -> io::Result<serde_json::Value> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "jsonl"))
        .collect();
    files.sort();
    files.iter().map(|p| fingerprint(p)).collect::<io::Result<Vec<_>>>().map(serde_json::Value::Array)
}

fn read_jsonl<T: serde::de::DeserializeOwned>(path: &Path) -> Result<Vec<T>, String> {
    let f = std::fs::File::open(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(f).lines().enumerate() {
        let line = line.map_err(|e| format!("{}: {e}", path.display()))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| format!("{}:{}: {e}", path.display(), i + 1))?);
    }
    Ok(out)
}

fn write_jsonl<T: Serialize>(path: &Path, items: impl IntoIterator<Item = T>) -> io::Result<()> {
    write_atomic_with(path, |w| {
        for item in items {
            serde_json::to_writer(&mut *w, &item).map_err(io::Error::other)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    })
}

impl Pipeline {
    pub fn new(cfg: RunConfig) -> Result<Self, PipelineError> {
        cfg.validate()?;
        Ok(Pipeline { cfg, started_at: Utc::now(), records: Vec::new(), evidence_requests: 0, prev_key: String::new() })
    }

    pub fn config(&self) -> &RunConfig {
        &self.cfg
    }

    fn out(&self, rel: &str) -> PathBuf {
        self.cfg.out.join(rel)
    }

    fn key_for(&self, stage: Stage, deps: serde_json::Value) -> String {
        let mut h = Sha256::new();
        h.update(self.prev_key.as_bytes());
        h.update([0]);
        h.update(stage.name().as_bytes());
        h.update([0]);
        h.update(deps.to_string().as_bytes());
        hex::encode(h.finalize())
    }

    fn checkpoint_path(&self, stage: Stage) -> PathBuf {
        self.out("checkpoints").join(format!("{stage}.json"))
    }

    fn is_done(&self, stage: Stage, key: &str) -> bool {
        let Ok(bytes) = std::fs::read(self.checkpoint_path(stage)) else { return false };
        let Ok(cp) = serde_json::from_slice::<Checkpoint>(&bytes) else { return false };
        cp.stage == stage && cp.key == key && cp.outputs.iter().all(|p| self.cfg.out.join(p).exists())
    }

    fn mark_done(&self, stage: Stage, key: &str, outputs: &[PathBuf]) -> Result<(), PipelineError> {
        let rel = outputs
            .iter()
            .map(|p| p.strip_prefix(&self.cfg.out).unwrap_or(p).to_path_buf())
            .collect();
        let cp = Checkpoint { stage, key: key.to_owned(), outputs: rel };
        let bytes = serde_json::to_vec_pretty(&cp).expect("checkpoint serializes");
        write_atomic(&self.checkpoint_path(stage), &bytes).map_err(|e| PipelineError::stage(stage, e))
    }

    /// Runs `body` unless the stage's checkpoint is current, in which case
    /// `reload` recovers its outputs.
    fn stage<T>(
        &mut self,
        stage: Stage,
        deps: serde_json::Value,
        run: impl FnOnce(&mut Self) -> Result<(T, Vec<PathBuf>), PipelineError>,
        reload: impl FnOnce(&mut Self) -> Result<T, PipelineError>,
    ) -> Result<T, PipelineError> {
        let key = self.key_for(stage, deps);
        let t0 = Instant::now();
        let (value, status) = if self.is_done(stage, &key) {
            log::info!("{stage}: checkpoint current, skipping");
            (reload(self)?, StageStatus::Skipped)
        } else {
            log::info!("{stage}: running");
            let _ = std::fs::remove_file(self.checkpoint_path(stage));
            let (value, outputs) = run(self)?;
            self.mark_done(stage, &key, &outputs)?;
            (value, StageStatus::Ran)
        };
        self.records.push(StageRecord { stage, status, key: key.clone(), seconds: t0.elapsed().as_secs_f64() });
        self.prev_key = key;
        Ok(value)
    }

    fn ingest(&mut self) -> Result<(SnapshotHandle, SnapshotHandle), PipelineError> {
        let st = Stage::Ingest;
        let fp = |p: &Path| fingerprint(p).map_err(|e| PipelineError::input(st, format!("{}: {e}", p.display())));
        let deps = serde_json::json!({
            "a": fp(&self.cfg.snapshot_a)?, "b": fp(&self.cfg.snapshot_b)?,
            "label_a": self.cfg.label_a, "label_b": self.cfg.label_b,
            "chunk_budget": self.cfg.chunk_budget,
        });
        let dir = self.out("snapshots");
        let handle_path = |label: &str| dir.join(format!("{}.json", label_stem(label)));
        let (ha, hb) = (handle_path(&self.cfg.label_a), handle_path(&self.cfg.label_b));
        self.stage(
            st,
            deps,
            |p| {
                let opts = IngestOptions { chunk_budget: p.cfg.chunk_budget };
                let a = ingest_snapshot(&p.cfg.snapshot_a, &p.cfg.label_a, &dir, &opts).map_err(|e| snapshot_error(st, e))?;
                let b = ingest_snapshot(&p.cfg.snapshot_b, &p.cfg.label_b, &dir, &opts).map_err(|e| snapshot_error(st, e))?;
                let mut outputs = vec![ha.clone(), hb.clone()];
                for h in [&a, &b] {
                    outputs.push(h.sorted_store.clone());
                    outputs.push(h.prefix_counts.clone());
                }
                Ok(((a, b), outputs))
            },
            |_| {
                let load = |p: &Path| SnapshotHandle::load(p).map_err(|e| PipelineError::stage(st, e));
                Ok((load(&ha)?, load(&hb)?))
            },
        )
    }

    fn diff(&mut self, a: &SnapshotHandle, b: &SnapshotHandle) -> Result<DiffSets, PipelineError> {
        let st = Stage::Diff;
        let dir = self.out("diff");
        let summary = dir.join("diff.json");
        self.stage(
            st,
            serde_json::Value::Null,
            |_| {
                let d = diff_snapshots(a, b, &dir).map_err(|e| snapshot_error(st, e))?;
                d.check_partition().map_err(|e| PipelineError::stage(st, e))?;
                let outputs = vec![summary.clone(), d.only_in_a.path.clone(), d.only_in_b.path.clone()];
                Ok((d, outputs))
            },
            |_| DiffSets::load(&summary).map_err(|e| PipelineError::stage(st, e)),
        )
    }

    fn build_resolvers(&self) -> Result<Resolvers, PipelineError> {
        let st = Stage::Resolve;
        let fixtures = match &self.cfg.fixtures {
            Some(dir) => Some(FixtureStore::load(dir).map_err(|e| PipelineError::input(st, e))?),
            None => None,
        };
        let resolvers = if self.cfg.offline {
            Resolvers::offline(fixtures.expect("validated: offline has fixtures"))
        } else {
            let ua = match &self.cfg.mailto {
                Some(m) => format!("doi-audit/{} (mailto:{m})", env!("CARGO_PKG_VERSION")),
                None => format!("doi-audit/{}", env!("CARGO_PKG_VERSION")),
            };
            let transport = ReqwestTransport::new(&ua, Duration::from_secs(30)).map_err(|e| PipelineError::config(e.0))?;
            let config = LiveConfig {
                ra_base: self.cfg.ra_base.clone(),
                resolver_base: self.cfg.resolver_base.clone(),
                api_base: self.cfg.api_base.clone(),
                mailto: self.cfg.mailto.clone(),
                max_redirects: self.cfg.max_redirects,
                retry: RetryPolicy {
                    attempts: self.cfg.retry_attempts,
                    initial_backoff: Duration::from_millis(self.cfg.retry_backoff_ms),
                },
            };
            let mut live = LiveResolver::new(Arc::new(transport), config, self.cfg.rate_limit);
            if let Some(dir) = &self.cfg.cache_dir {
                live = live.with_cache(ResponseCache::open(dir).map_err(|e| PipelineError::input(st, format!("{}: {e}", dir.display())))?);
            }
            if let Some(path) = &self.cfg.conflict_report {
                live = live.with_conflict_report(read_conflict_report(path).map_err(|e| PipelineError::input(st, e))?);
            }
            Resolvers::live(live, fixtures)
        };
        Ok(resolvers.with_max_redirects(self.cfg.max_redirects))
    }

    fn resolve(&mut self, diff: &DiffSets) -> Result<(), PipelineError> {
        let st = Stage::Resolve;
        let mut deps = serde_json::json!({
            "offline": self.cfg.offline,
            "ra_base": self.cfg.ra_base, "resolver_base": self.cfg.resolver_base, "api_base": self.cfg.api_base,
            "mailto": self.cfg.mailto, "max_redirects": self.cfg.max_redirects,
        });
        if let Some(dir) = &self.cfg.fixtures {
            deps["fixtures"] = dir_fingerprint(dir).map_err(|e| PipelineError::input(st, format!("{}: {e}", dir.display())))?;
        }
        if let Some(p) = &self.cfg.conflict_report {
            deps["conflict_report"] = fingerprint(p).map_err(|e| PipelineError::input(st, format!("{}: {e}", p.display())))?;
        }
        let path = self.out("evidence.jsonl");
        self.stage(
            st,
            deps,
            |p| {
                let resolvers = p.build_resolvers()?;
                let candidates: Vec<NormalizedDoi> = diff
                    .only_in_a
                    .iter()
                    .map_err(|e| PipelineError::stage(st, e))?
                    .collect::<Result<_, _>>()
                    .map_err(|e| PipelineError::stage(st, e))?;
                log::info!("resolve: {} candidates", candidates.len());
                let gathered = gather_all(&candidates, &resolvers, p.cfg.concurrency);
                p.evidence_requests += resolvers.request_log().len() as u64;
                let evidence = gathered.map_err(|e| resolve_error(st, e))?;
                write_jsonl(&path, &evidence).map_err(|e| PipelineError::stage(st, e))?;
                Ok(((), vec![path.clone()]))
            },
            |_| Ok(()),
        )
    }

    fn classify(&mut self) -> Result<ClassifiedSet, PipelineError> {
        let st = Stage::Classify;
        let evidence_path = self.out("evidence.jsonl");
        let load = move || -> Result<ClassifiedSet, PipelineError> {
            let evidence: Vec<ResolutionEvidence> = read_jsonl(&evidence_path).map_err(|e| PipelineError::input(st, e))?;
            let set = ClassifiedSet::from_evidence(evidence).map_err(|e| PipelineError::stage(st, e))?;
            set.check_partition().map_err(|e| PipelineError::stage(st, e))?;
            Ok(set)
        };
        let path = self.out("classified.jsonl");
        let load2 = load.clone();
        self.stage(
            st,
            serde_json::Value::Null,
            |_| {
                let set = load()?;
                write_jsonl(&path, set.records()).map_err(|e| PipelineError::stage(st, e))?;
                Ok((set, vec![path.clone()]))
            },
            |_| load2(),
        )
    }

    fn analyze(
        &mut self,
        a: &SnapshotHandle,
        b: &SnapshotHandle,
        diff: &DiffSets,
        classified: &ClassifiedSet,
    ) -> Result<ReportBundle, PipelineError> {
        let st = Stage::Analyze;
        let build = || -> Result<ReportBundle, PipelineError> {
            let baseline: BTreeMap<String, u64> = a.load_prefix_counts().map_err(|e| PipelineError::stage(st, e))?;
            let bundle = ReportBundle::build(DiffCensus::from(diff).with_ingest(a, b), classified, &baseline, self.cfg.top_k)
                .map_err(|e| PipelineError::stage(st, e))?;
            bundle.check_identities().map_err(|e| PipelineError::stage(st, e))?;
            Ok(bundle)
        };
        let bundle = build()?;
        let path = self.out("analytics.json");
        self.stage(
            st,
            serde_json::json!({ "top_k": self.cfg.top_k }),
            |_| {
                let mut bytes = serde_json::to_vec_pretty(&bundle).map_err(|e| PipelineError::stage(st, e))?;
                bytes.push(b'\n');
                write_atomic(&path, &bytes).map_err(|e| PipelineError::stage(st, e))?;
                Ok((bundle.clone(), vec![path.clone()]))
            },
            |_| Ok(bundle.clone()),
        )
    }

    fn report(&mut self, bundle: &ReportBundle) -> Result<Vec<PathBuf>, PipelineError> {
        let st = Stage::Report;
        let dir = self.out("report");
        let mut formats = self.cfg.formats.clone();
        formats.sort();
        formats.dedup();
        let expected: Vec<PathBuf> = {
            let names: Vec<&str> = bundle.tables().iter().map(|t| t.name).collect();
            let dir = &dir;
            formats
                .iter()
                .flat_map(|f| names.iter().map(move |n| dir.join(format!("{n}.{}", f.extension()))))
                .collect()
        };
        self.stage(
            st,
            serde_json::json!({ "formats": formats }),
            |_| {
                let written = emit_report(bundle, &dir, &formats).map_err(|e| PipelineError::stage(st, e))?;
                Ok((written.clone(), written))
            },
            |_| Ok(expected.clone()),
        )
    }

    /// Runs every stage up to and including `last`.
    pub fn run_through(&mut self, last: Stage) -> Result<RunOutput, PipelineError> {
        std::fs::create_dir_all(&self.cfg.out).map_err(|e| PipelineError::config(format!("{}: {e}", self.cfg.out.display())))?;
        let mut out = RunOutput { stages: Vec::new(), diff: None, classified: None, bundle: None, report_files: Vec::new() };
        let (a, b) = self.ingest()?;
        if last > Stage::Ingest {
            let diff = self.diff(&a, &b)?;
            if last > Stage::Diff {
                self.resolve(&diff)?;
            }
            if last > Stage::Resolve {
                let classified = self.classify()?;
                if last > Stage::Classify {
                    let bundle = self.analyze(&a, &b, &diff, &classified)?;
                    if last > Stage::Analyze {
                        out.report_files = self.report(&bundle)?;
                        self.write_manifest()?;
                    }
                    out.bundle = Some(bundle);
                }
                out.classified = Some(classified);
            }
            out.diff = Some(diff);
        }
        out.stages = self.records.clone();
        Ok(out)
    }

    fn write_manifest(&self) -> Result<(), PipelineError> {
        let m = Manifest {
            tool: "doi-audit".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            config_hash: self.cfg.config_hash(),
            started_at: self.started_at,
            finished_at: Utc::now(),
            offline: self.cfg.offline,
            stages: self.records.clone(),
            evidence_requests: self.evidence_requests,
        };
        let bytes = serde_json::to_vec_pretty(&m).expect("manifest serializes");
        write_atomic(&self.out("manifest.json"), &bytes).map_err(|e| PipelineError::stage(Stage::Report, e))
    }
}

fn snapshot_error(stage: Stage, e: crate::snapshot::SnapshotError) -> PipelineError {
    match e {
        crate::snapshot::SnapshotError::Io { .. } if stage == Stage::Ingest => PipelineError::input(stage, e),
        other => PipelineError::stage(stage, other),
    }
}

fn resolve_error(stage: Stage, e: ResolveError) -> PipelineError {
    let ResolveError::FixtureMiss { doi, .. } = &e;
    PipelineError { doi: Some(doi.clone()), ..PipelineError::stage(stage, &e) }
}

/// Validates `cfg` and runs the full pipeline.
pub fn run_pipeline(cfg: RunConfig) -> Result<RunOutput, PipelineError> {
    Pipeline::new(cfg)?.run_through(Stage::Report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        let base = RunConfig::new("a", "b", "out");
        assert!(base.validate().is_ok());
        let mut c = base.clone();
        c.offline = true;
        assert_eq!(c.validate().unwrap_err().exit_code(), 2);
        let mut c = base.clone();
        c.rate_limit = 0.0;
        assert!(c.validate().is_err());
        let mut c = base.clone();
        c.concurrency = 0;
        assert!(c.validate().is_err());
        let mut c = base.clone();
        c.label_b = "A".into();
        assert!(c.validate().is_err());
    }

    #[test]
    fn config_hash_ignores_out_dir() {
        let a = RunConfig::new("a", "b", "out1");
        let b = RunConfig::new("a", "b", "out2");
        assert_eq!(a.config_hash(), b.config_hash());
        let mut c = a.clone();
        c.top_k = 3;
        assert_ne!(a.config_hash(), c.config_hash());
    }

    #[test]
    fn error_json() {
        let e = PipelineError { doi: Some("10.1/x".into()), ..PipelineError::stage(Stage::Resolve, "miss") };
        assert_eq!(
            e.to_json(),
            r#"{"error":{"kind":"stage_failure","stage":"resolve","message":"miss","doi":"10.1/x"}}"#
        );
        assert_eq!(e.exit_code(), 4);
        assert_eq!(PipelineError::input(Stage::Ingest, "x").exit_code(), 3);
    }

    #[test]
    fn missing_snapshot_is_an_input_error() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = RunConfig::new(dir.path().join("nope-a"), dir.path().join("nope-b"), dir.path().join("out"));
        let err = run_pipeline(cfg).unwrap_err();
        assert_eq!((err.kind, err.stage), (ErrorKind::Input, Some(Stage::Ingest)));
    }
}

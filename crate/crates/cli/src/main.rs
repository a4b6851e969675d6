use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use doi_audit::pipeline::{Pipeline, PipelineError, RunConfig, Stage, StageStatus};
use doi_audit::report::ReportFormat;
use doi_audit::resolvers::{DEFAULT_API_BASE, DEFAULT_MAX_REDIRECTS, DEFAULT_RA_BASE, DEFAULT_RESOLVER_BASE};
use doi_audit::synth::{write_snapshot_pair, SynthSpec};

/// Find and analyze DOIs that disappeared between two registry snapshots.
#[derive(Parser)]
#[command(name = "doi-audit", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Normalize, deduplicate, and sort both snapshots.
    Ingest(RunArgs),
    /// Compute the difference and product sets.
    Diff(RunArgs),
    /// Gather resolver evidence for every candidate.
    Resolve(RunArgs),
    /// Assign a deletion class to every candidate.
    Classify(RunArgs),
    /// Compute the statistics tables.
    Analyze(RunArgs),
    /// Write the report files.
    Report(RunArgs),
    /// Run every stage end to end.
    Run(RunArgs),
    /// Generate a seeded synthetic snapshot pair.
    Synth(SynthArgs),
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    snapshot_a: PathBuf,
    #[arg(long)]
    snapshot_b: PathBuf,
    #[arg(long, default_value = "A")]
    label_a: String,
    #[arg(long, default_value = "B")]
    label_b: String,
    /// Directory of recorded resolver responses.
    #[arg(long)]
    fixtures: Option<PathBuf>,
    /// Never contact live services; every lookup must be recorded.
    #[arg(long)]
    offline: bool,
    #[arg(long, env = "DOI_AUDIT_CACHE")]
    cache_dir: Option<PathBuf>,
    /// CSV of alias,primary pairs consulted before the handle API.
    #[arg(long)]
    conflict_report: Option<PathBuf>,
    /// Requests per second per host.
    #[arg(long, default_value_t = 5.0)]
    rate_limit: f64,
    #[arg(long, default_value_t = 4)]
    concurrency: usize,
    #[arg(long, default_value_t = 3)]
    retry_attempts: u32,
    #[arg(long, default_value_t = 1000)]
    retry_backoff_ms: u64,
    /// Contact address for the metadata API's polite pool.
    #[arg(long)]
    mailto: Option<String>,
    #[arg(long, env = "DOI_RA_BASE", default_value = DEFAULT_RA_BASE)]
    ra_base: String,
    #[arg(long, env = "DOI_RESOLVER_BASE", default_value = DEFAULT_RESOLVER_BASE)]
    resolver_base: String,
    #[arg(long, env = "CROSSREF_API_BASE", default_value = DEFAULT_API_BASE)]
    api_base: String,
    #[arg(long, default_value_t = DEFAULT_MAX_REDIRECTS)]
    max_redirects: usize,
    /// Memory budget per external-sort chunk, in MiB.
    #[arg(long, default_value_t = 256)]
    chunk_budget_mib: usize,
    /// Work directory shared by all stages.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "csv,json,markdown")]
    format: Vec<ReportFormat>,
    #[arg(long, default_value_t = 10)]
    top_k: usize,
}

impl RunArgs {
    fn into_config(self) -> RunConfig {
        let mut cfg = RunConfig::new(self.snapshot_a, self.snapshot_b, self.out);
        cfg.label_a = self.label_a;
        cfg.label_b = self.label_b;
        cfg.fixtures = self.fixtures;
        cfg.offline = self.offline;
        cfg.cache_dir = self.cache_dir;
        cfg.conflict_report = self.conflict_report;
        cfg.rate_limit = self.rate_limit;
        cfg.concurrency = self.concurrency;
        cfg.retry_attempts = self.retry_attempts;
        cfg.retry_backoff_ms = self.retry_backoff_ms;
        cfg.mailto = self.mailto;
        cfg.ra_base = self.ra_base;
        cfg.resolver_base = self.resolver_base;
        cfg.api_base = self.api_base;
        cfg.max_redirects = self.max_redirects;
        cfg.chunk_budget = self.chunk_budget_mib.saturating_mul(1 << 20);
        cfg.formats = self.format;
        cfg.top_k = self.top_k;
        cfg
    }
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Unique identifiers in snapshot A.
    #[arg(long, default_value_t = 1000)]
    size: u64,
    #[arg(long, default_value_t = 10)]
    removed: u64,
    #[arg(long, default_value_t = 10)]
    added: u64,
    #[arg(long, default_value_t = 50)]
    prefixes: u32,
    /// Probability of an extra case or percent-encoding variant per line.
    #[arg(long, default_value_t = 0.0)]
    variant_rate: f64,
    /// Writes snapshot_a.txt, snapshot_b.txt and synth.json here.
    #[arg(long)]
    out: PathBuf,
}

fn run_stage(args: RunArgs, last: Stage) -> Result<(), (PipelineError, Option<PathBuf>)> {
    let cfg = args.into_config();
    let out = cfg.out.clone();
    let fail = |e: PipelineError| (e, Some(out.clone()));
    let mut pipeline = Pipeline::new(cfg).map_err(fail)?;
    let result = pipeline.run_through(last).map_err(fail)?;
    let _ = std::fs::remove_file(out.join("error.json"));
    let stages: Vec<serde_json::Value> = result
        .stages
        .iter()
        .map(|r| {
            let status = if r.status == StageStatus::Ran { "ran" } else { "skipped" };
            serde_json::json!({ "stage": r.stage.name(), "status": status })
        })
        .collect();
    let mut summary = serde_json::json!({ "out": out, "stages": stages });
    if let Some(d) = &result.diff {
        summary["candidates"] = d.only_in_a.count.into();
    }
    if let Some(c) = &result.classified {
        summary["deleted"] = c.deleted_total().into();
        summary["unclassifiable"] = c.unclassifiable.into();
    }
    println!("{summary}");
    Ok(())
}

fn synth(args: SynthArgs) -> Result<(), (PipelineError, Option<PathBuf>)> {
    let spec = SynthSpec {
        seed: args.seed,
        size_a: args.size,
        removed: args.removed,
        added: args.added,
        prefixes: args.prefixes,
        variant_rate: args.variant_rate,
    };
    if spec.removed > spec.size_a || !(0.0..=1.0).contains(&spec.variant_rate) {
        return Err((PipelineError::config("removed must not exceed size and variant-rate must be in [0, 1]"), None));
    }
    let io_err = |e: std::io::Error| (PipelineError::config(format!("{}: {e}", args.out.display())), None);
    std::fs::create_dir_all(&args.out).map_err(io_err)?;
    let summary = write_snapshot_pair(&spec, &args.out.join("snapshot_a.txt"), &args.out.join("snapshot_b.txt")).map_err(io_err)?;
    let json = serde_json::json!({ "spec": spec, "summary": summary });
    std::fs::write(args.out.join("synth.json"), format!("{json:#}\n")).map_err(io_err)?;
    println!("{json}");
    Ok(())
}

fn report_error(e: &PipelineError, out: Option<&Path>) {
    let json = e.to_json();
    eprintln!("{json}");
    if let Some(dir) = out {
        if std::fs::create_dir_all(dir).is_ok() {
            let _ = std::fs::write(dir.join("error.json"), format!("{json}\n"));
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Ingest(a) => run_stage(a, Stage::Ingest),
        Command::Diff(a) => run_stage(a, Stage::Diff),
        Command::Resolve(a) => run_stage(a, Stage::Resolve),
        Command::Classify(a) => run_stage(a, Stage::Classify),
        Command::Analyze(a) => run_stage(a, Stage::Analyze),
        Command::Report(a) | Command::Run(a) => run_stage(a, Stage::Report),
        Command::Synth(a) => synth(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err((e, out)) => {
            report_error(&e, out.as_deref());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

//! `gridscreen` — deterministic batch front end for contingency screening.
//!
//! ```text
//!   analyze       full pipeline: seeds → subgraphs → GBC groups → validation
//!   lodf          line outage distribution factors + bridge flags
//!   metrics       per-branch PF / NLODF / M and the seed ranking
//!   subgraph      (d, sl) search regions around each seed branch
//!   brute-force   validate every x-subset of in-service branches
//!   solve         one power flow (with optional outage) + violation summary
//! ```
//!
//! Every subcommand reads one case and emits CSV or JSON. With `--out DIR`
//! the report lands in that directory next to a `manifest.json` holding the
//! configuration echo, the SHA-256 of the case file, and per-stage timings;
//! without `--out` the report streams to stdout and no manifest is written.
//! Report bytes depend only on the inputs — never on wall clock or
//! `--threads` — so repeated runs diff clean; all timing detail stays in
//! the manifest.
//!
//! Exit codes: 0 success, 1 violations found (soften with `--no-fail`),
//! 2 bad input or flags.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use sha2::{Digest, Sha256};

use gridscreen_core::graph::is_connected;
use gridscreen_core::report::{to_csv, to_json, RunManifest, StageTimings, SweepPoint};
use gridscreen_core::{
    apply_outage, brute_force_contingencies, build_grid_graph, build_subgraph, classify,
    compute_lodf, compute_metrics, default_reserve_requirement, parse_case, rank_branches,
    run_screening, solve_ac, solve_dc, validate_outage, ContingencyRecord, NetworkCase,
    ScreeningConfig, ValidationMethod,
};

/// Built-in demo case: three buses in a triangle, slack at bus 1, loads at
/// buses 2 and 3. Available as `--case triangle3` without a file on disk.
const TRIANGLE3: &str = "\
function mpc = triangle3
mpc.baseMVA = 100;
mpc.bus = [
\t1\t3\t0\t0\t0\t0\t1\t1\t0\t138\t1\t1.1\t0.9;
\t2\t1\t50\t10\t0\t0\t1\t1\t0\t138\t1\t1.1\t0.9;
\t3\t1\t30\t5\t0\t0\t1\t1\t0\t138\t1\t1.1\t0.9;
];
mpc.gen = [
\t1\t80\t0\t60\t-60\t1\t100\t1\t120\t0;
];
mpc.branch = [
\t1\t2\t0.01\t0.1\t0.02\t100\t0\t0\t0\t0\t1\t-360\t360;
\t2\t3\t0.01\t0.1\t0.02\t100\t0\t0\t0\t0\t1\t-360\t360;
\t1\t3\t0.02\t0.2\t0.04\t100\t0\t0\t0\t0\t1\t-360\t360;
];
";

#[derive(Debug, Parser)]
#[command(name = "gridscreen", version, about = "Contingency screening toolkit")]
struct Cli {
    /// Worker threads for parallel stages (default: all cores). Outputs
    /// are identical regardless of this setting.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Screen for critical outage sets and validate each candidate
    Analyze(AnalyzeArgs),
    /// Dump the LODF matrix and bridge flags
    Lodf(LodfArgs),
    /// Dump per-branch impact metrics and the seed ranking
    Metrics(MetricsArgs),
    /// Dump the (d, sl) search subgraph built around each seed branch
    Subgraph(SubgraphArgs),
    /// Validate every x-subset of in-service branches (exhaustive)
    BruteForce(BruteForceArgs),
    /// Solve one operating point, optionally with an outage, and classify it
    Solve(SolveArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    /// Full AC power flow: voltages, losses, reactive limits.
    Ac,
    /// Linear DC flows only: fast, no voltage or convergence signal.
    Dc,
}

impl Method {
    fn to_core(self) -> ValidationMethod {
        match self {
            Method::Ac => ValidationMethod::Ac,
            Method::Dc => ValidationMethod::Dc,
        }
    }
    fn label(self) -> &'static str {
        match self {
            Method::Ac => "ac",
            Method::Dc => "dc",
        }
    }
}

/// Inclusive contingency-order range, parsed from `A..B` (or `A..=B`).
#[derive(Debug, Clone, Copy)]
struct Span {
    lo: usize,
    hi: usize,
}

impl std::str::FromStr for Span {
    type Err = String;
    fn from_str(s: &str) -> Result<Span, String> {
        let (a, b) = s.split_once("..").ok_or("expected a range of the form A..B")?;
        let b = b.strip_prefix('=').unwrap_or(b);
        let lo: usize = a.trim().parse().map_err(|_| format!("bad range start {a:?}"))?;
        let hi: usize = b.trim().parse().map_err(|_| format!("bad range end {b:?}"))?;
        if lo < 1 {
            return Err("sweep must start at x ≥ 1".into());
        }
        if hi < lo {
            return Err(format!("empty range {lo}..{hi}"));
        }
        Ok(Span { lo, hi })
    }
}

#[derive(Debug, Args)]
struct CaseArg {
    /// Case file path, fixture name (resolved as fixtures/<NAME>.m), or
    /// the built-in demo case `triangle3`
    #[arg(long)]
    case: String,
}

#[derive(Debug, Args)]
struct EmitArgs {
    /// Report format
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    output: OutputFormat,

    /// Directory for the report and its manifest (default: report to
    /// stdout, no manifest)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    case: CaseArg,

    /// Contingency order: branches per candidate outage set
    #[arg(long, default_value_t = 1)]
    x: usize,

    /// Hop radius d for recruiting high-metric branches around a seed
    #[arg(long, default_value_t = 4)]
    distance: usize,

    /// Node-expansion hop radius sl; must be ≥ --distance
    #[arg(long, default_value_t = 4)]
    search_level: usize,

    /// Share of in-service branches used as seeds, percent
    #[arg(long, default_value_t = 5.0)]
    top_percent: f64,

    /// Spinning-reserve requirement, MW (default: largest online unit)
    #[arg(long)]
    reserve_req: Option<f64>,

    /// Candidate validation method
    #[arg(long, value_enum, default_value_t = Method::Ac)]
    method: Method,

    /// Cap the number of emitted candidate sets
    #[arg(long)]
    seed_limit: Option<usize>,

    /// Time the screening stages for every x in the inclusive range A..B
    /// and write the per-x durations to the manifest (skips validation
    /// and the report)
    #[arg(long, value_name = "A..B")]
    sweep_x: Option<Span>,

    /// Exit 0 even when the report contains violations
    #[arg(long)]
    no_fail: bool,

    #[command(flatten)]
    emit: EmitArgs,
}

#[derive(Debug, Args)]
struct LodfArgs {
    #[command(flatten)]
    case: CaseArg,

    #[command(flatten)]
    emit: EmitArgs,
}

#[derive(Debug, Args)]
struct MetricsArgs {
    #[command(flatten)]
    case: CaseArg,

    /// Share of in-service branches marked as seeds, percent
    #[arg(long, default_value_t = 5.0)]
    top_percent: f64,

    #[command(flatten)]
    emit: EmitArgs,
}

#[derive(Debug, Args)]
struct SubgraphArgs {
    #[command(flatten)]
    case: CaseArg,

    /// Hop radius d for recruiting high-metric branches around a seed
    #[arg(long, default_value_t = 4)]
    distance: usize,

    /// Node-expansion hop radius sl; must be ≥ --distance
    #[arg(long, default_value_t = 4)]
    search_level: usize,

    /// Share of in-service branches used as seeds, percent
    #[arg(long, default_value_t = 5.0)]
    top_percent: f64,

    /// Dump only the first N seeds (by metric rank)
    #[arg(long)]
    seed_limit: Option<usize>,

    #[command(flatten)]
    emit: EmitArgs,
}

#[derive(Debug, Args)]
struct BruteForceArgs {
    #[command(flatten)]
    case: CaseArg,

    /// Contingency order: branches per outage set
    #[arg(long, default_value_t = 1)]
    x: usize,

    /// Spinning-reserve requirement, MW (default: largest online unit)
    #[arg(long)]
    reserve_req: Option<f64>,

    /// Disable the DC prescreen (AC-validate every subset)
    #[arg(long)]
    no_prescreen: bool,

    /// Exit 0 even when violating sets are found
    #[arg(long)]
    no_fail: bool,

    #[command(flatten)]
    emit: EmitArgs,
}

#[derive(Debug, Args)]
struct SolveArgs {
    #[command(flatten)]
    case: CaseArg,

    /// Branches to outage, as report-style bus pairs: "[136,133],[135,133]"
    #[arg(long)]
    outage: Option<String>,

    /// Spinning-reserve requirement, MW (default: largest online unit)
    #[arg(long)]
    reserve_req: Option<f64>,

    /// Power-flow model
    #[arg(long, value_enum, default_value_t = Method::Ac)]
    method: Method,

    /// Exit 0 even when the solution has violations
    #[arg(long)]
    no_fail: bool,

    #[command(flatten)]
    emit: EmitArgs,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot size thread pool: {e}");
            return ExitCode::from(2);
        }
    }
    let run = match cli.command {
        Command::Analyze(a) => cmd_analyze(a, cli.threads),
        Command::Lodf(a) => cmd_lodf(a, cli.threads),
        Command::Metrics(a) => cmd_metrics(a, cli.threads),
        Command::Subgraph(a) => cmd_subgraph(a, cli.threads),
        Command::BruteForce(a) => cmd_brute_force(a, cli.threads),
        Command::Solve(a) => cmd_solve(a, cli.threads),
    };
    match run {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

// ---------------------------------------------------------------------
// Case loading and shared plumbing
// ---------------------------------------------------------------------

/// Loaded case plus the provenance the manifest wants.
struct LoadedCase {
    case: NetworkCase,
    /// Path as resolved (or `builtin:<name>`).
    path: String,
    /// SHA-256 of the raw case text.
    sha256: String,
}

fn load_case(spec: &str) -> Result<LoadedCase> {
    let mut tried = Vec::new();
    let candidates = [
        PathBuf::from(spec),
        PathBuf::from(format!("{spec}.m")),
        Path::new("fixtures").join(format!("{spec}.m")),
        Path::new("fixtures").join(spec),
    ];
    let mut found: Option<(String, String)> = None;
    for p in &candidates {
        if p.is_file() {
            let text = fs::read_to_string(p)
                .with_context(|| format!("cannot read case file {}", p.display()))?;
            found = Some((p.display().to_string(), text));
            break;
        }
        tried.push(p.display().to_string());
    }
    let (path, text) = match found {
        Some(hit) => hit,
        None if spec == "triangle3" => ("builtin:triangle3".to_string(), TRIANGLE3.to_string()),
        None => bail!("cannot find case {spec:?} (tried {})", tried.join(", ")),
    };
    let case = parse_case(&text).with_context(|| format!("cannot parse case {path}"))?;
    let sha256 = hex(&Sha256::digest(text.as_bytes()));
    Ok(LoadedCase { case, path, sha256 })
}

fn hex(bytes: &[u8]) -> String {
    let mut s = String::with_capacity(bytes.len() * 2);
    for b in bytes {
        write!(s, "{b:02x}").expect("writing to a String cannot fail");
    }
    s
}

fn pair_of(case: &NetworkCase, k: usize) -> (i64, i64) {
    (case.branches[k].from, case.branches[k].to)
}

fn pair_label(case: &NetworkCase, k: usize) -> String {
    let (f, t) = pair_of(case, k);
    format!("\"[{f},{t}]\"")
}

/// CSV cell for one float: shortest round-trip form, `inf` for sentinels.
fn cell(v: f64) -> String {
    if v.is_finite() {
        format!("{v}")
    } else {
        "inf".to_string()
    }
}

/// JSON value for one float: sentinels become null.
fn jnum(v: f64) -> serde_json::Value {
    serde_json::Number::from_f64(v).map_or(serde_json::Value::Null, serde_json::Value::Number)
}

const MANIFEST_FILE: &str = "manifest.json";

fn manifest_for(
    loaded: &LoadedCase,
    config: serde_json::Value,
    stages: StageTimings,
    sweep: Option<Vec<SweepPoint>>,
    records_written: usize,
) -> RunManifest {
    RunManifest {
        tool: "gridscreen".to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        case_path: loaded.path.clone(),
        case_sha256: loaded.sha256.clone(),
        config,
        stages,
        sweep,
        records_written,
    }
}

fn write_artifact(dir: &Path, name: &str, body: &str) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    let path = dir.join(name);
    fs::write(&path, body).with_context(|| format!("cannot write {}", path.display()))?;
    eprintln!("wrote {}", path.display());
    Ok(())
}

fn manifest_json(m: &RunManifest) -> String {
    let mut s = serde_json::to_string_pretty(m).expect("manifest serialization cannot fail");
    s.push('\n');
    s
}

/// Emits contingency records in the chosen format, plus the manifest when
/// writing to a directory.
fn emit_records(
    emit: &EmitArgs,
    stem: &str,
    records: &[ContingencyRecord],
    manifest: &RunManifest,
) -> Result<()> {
    match &emit.out {
        Some(dir) => {
            let (name, body) = match emit.output {
                OutputFormat::Csv => (format!("{stem}.csv"), to_csv(records, Some(MANIFEST_FILE))),
                OutputFormat::Json => {
                    (format!("{stem}.json"), to_json(records, Some(MANIFEST_FILE)))
                }
            };
            write_artifact(dir, &name, &body)?;
            write_artifact(dir, MANIFEST_FILE, &manifest_json(manifest))?;
        }
        None => {
            let body = match emit.output {
                OutputFormat::Csv => to_csv(records, None),
                OutputFormat::Json => to_json(records, None),
            };
            print!("{body}");
        }
    }
    Ok(())
}

/// Emits a custom table (non-record dump) the same way.
fn emit_table(
    emit: &EmitArgs,
    stem: &str,
    csv_body: String,
    json_doc: serde_json::Value,
    manifest: &RunManifest,
) -> Result<()> {
    match &emit.out {
        Some(dir) => match emit.output {
            OutputFormat::Csv => {
                let body = format!("# manifest: {MANIFEST_FILE}\n{csv_body}");
                write_artifact(dir, &format!("{stem}.csv"), &body)?;
                write_artifact(dir, MANIFEST_FILE, &manifest_json(manifest))?;
            }
            OutputFormat::Json => {
                let mut doc = json_doc;
                doc["manifest"] = serde_json::Value::String(MANIFEST_FILE.to_string());
                let mut body =
                    serde_json::to_string_pretty(&doc).expect("JSON dump cannot fail");
                body.push('\n');
                write_artifact(dir, &format!("{stem}.json"), &body)?;
                write_artifact(dir, MANIFEST_FILE, &manifest_json(manifest))?;
            }
        },
        None => match emit.output {
            OutputFormat::Csv => print!("{csv_body}"),
            OutputFormat::Json => {
                let mut body =
                    serde_json::to_string_pretty(&json_doc).expect("JSON dump cannot fail");
                body.push('\n');
                println!("{body}");
            }
        },
    }
    Ok(())
}

fn violation_exit(records: &[ContingencyRecord], no_fail: bool) -> u8 {
    if !no_fail && records.iter().any(|r| r.report.is_violating()) {
        1
    } else {
        0
    }
}

// ---------------------------------------------------------------------
// analyze
// ---------------------------------------------------------------------

fn cmd_analyze(a: AnalyzeArgs, threads: Option<usize>) -> Result<u8> {
    let loaded = load_case(&a.case.case)?;
    let case = &loaded.case;
    let req = a.reserve_req.unwrap_or_else(|| default_reserve_requirement(case));

    if let Some(span) = a.sweep_x {
        return sweep_x(&a, &loaded, span, threads);
    }

    let cfg = ScreeningConfig {
        x: a.x,
        d: a.distance,
        sl: a.search_level,
        a_percent: a.top_percent,
        max_candidates: a.seed_limit.unwrap_or(usize::MAX),
    };
    let screened = run_screening(case, &cfg).map_err(|e| anyhow!("{e}"))?;

    let t = Instant::now();
    let method = a.method.to_core();
    let records: Vec<ContingencyRecord> = {
        use rayon::prelude::*;
        screened
            .candidates
            .par_iter()
            .map(|cand| {
                let indices = cand.sorted_branches();
                let pairs = indices.iter().map(|&k| pair_of(case, k)).collect();
                let report = validate_outage(case, &indices, method, Some(req));
                ContingencyRecord::new(indices, pairs, report, Some(cand.final_score()), None)
            })
            .collect()
    };
    let mut stages = screened.timings;
    stages.validation_ms = t.elapsed().as_secs_f64() * 1e3;

    let config = serde_json::json!({
        "command": "analyze",
        "case": loaded.path,
        "x": a.x,
        "distance": a.distance,
        "search_level": a.search_level,
        "top_percent": a.top_percent,
        "reserve_req_mw": req,
        "method": a.method.label(),
        "output": match a.emit.output { OutputFormat::Csv => "csv", OutputFormat::Json => "json" },
        "seed_limit": a.seed_limit,
        "threads": threads,
    });
    let manifest = manifest_for(&loaded, config, stages, None, records.len());
    emit_records(&a.emit, "report", &records, &manifest)?;

    let violating = records.iter().filter(|r| r.report.is_violating()).count();
    eprintln!(
        "analyze: {} seeds → {} candidate sets ({} skipped); {} violating",
        screened.seeds.len(),
        records.len(),
        screened.skipped_seeds.len(),
        violating
    );
    Ok(violation_exit(&records, a.no_fail))
}

/// `--sweep-x A..B`: time the screening stages per x; no validation, no
/// report — the manifest (with its `sweep` table) is the artifact.
fn sweep_x(a: &AnalyzeArgs, loaded: &LoadedCase, span: Span, threads: Option<usize>) -> Result<u8> {
    let mut points = Vec::new();
    let mut total = StageTimings::default();
    for x in span.lo..=span.hi {
        let cfg = ScreeningConfig {
            x,
            d: a.distance,
            sl: a.search_level,
            a_percent: a.top_percent,
            max_candidates: a.seed_limit.unwrap_or(usize::MAX),
        };
        let screened = run_screening(&loaded.case, &cfg).map_err(|e| anyhow!("{e}"))?;
        total.metrics_ms += screened.timings.metrics_ms;
        total.subgraph_ms += screened.timings.subgraph_ms;
        total.gbc_ms += screened.timings.gbc_ms;
        points.push(SweepPoint { x, stages: screened.timings });
    }
    let config = serde_json::json!({
        "command": "analyze",
        "case": loaded.path,
        "sweep_x": format!("{}..{}", span.lo, span.hi),
        "distance": a.distance,
        "search_level": a.search_level,
        "top_percent": a.top_percent,
        "seed_limit": a.seed_limit,
        "threads": threads,
    });
    let manifest = manifest_for(loaded, config, total, Some(points), 0);
    match &a.emit.out {
        Some(dir) => write_artifact(dir, MANIFEST_FILE, &manifest_json(&manifest))?,
        None => print!("{}", manifest_json(&manifest)),
    }
    Ok(0)
}

// ---------------------------------------------------------------------
// lodf / metrics / subgraph dumps
// ---------------------------------------------------------------------

fn cmd_lodf(a: LodfArgs, threads: Option<usize>) -> Result<u8> {
    let loaded = load_case(&a.case.case)?;
    let case = &loaded.case;
    let t = Instant::now();
    let dc = solve_dc(case).map_err(|e| anyhow!("{e}"))?;
    let sens = compute_lodf(case, &dc).map_err(|e| anyhow!("{e}"))?;
    let stages = StageTimings { metrics_ms: t.elapsed().as_secs_f64() * 1e3, ..Default::default() };

    let m = case.branches.len();
    let mut csv = String::from("branch,pair,bridge");
    for k in 0..m {
        write!(csv, ",{}", pair_label(case, k)).unwrap();
    }
    csv.push('\n');
    for l in 0..m {
        write!(csv, "{l},{},{}", pair_label(case, l), sens.bridge[l]).unwrap();
        for k in 0..m {
            write!(csv, ",{}", cell(sens.lodf[(l, k)])).unwrap();
        }
        csv.push('\n');
    }

    let rows: Vec<serde_json::Value> = (0..m)
        .map(|l| {
            serde_json::json!({
                "branch": l,
                "pair": pair_of(case, l),
                "bridge": sens.bridge[l],
                "lodf": (0..m).map(|k| jnum(sens.lodf[(l, k)])).collect::<Vec<_>>(),
            })
        })
        .collect();
    let doc = serde_json::json!({ "case": loaded.path, "branches": rows });

    let config = serde_json::json!({ "command": "lodf", "case": loaded.path, "threads": threads });
    let manifest = manifest_for(&loaded, config, stages, None, m);
    emit_table(&a.emit, "lodf", csv, doc, &manifest)?;
    Ok(0)
}

fn cmd_metrics(a: MetricsArgs, threads: Option<usize>) -> Result<u8> {
    let loaded = load_case(&a.case.case)?;
    let case = &loaded.case;
    let t = Instant::now();
    let dc = solve_dc(case).map_err(|e| anyhow!("{e}"))?;
    let sens = compute_lodf(case, &dc).map_err(|e| anyhow!("{e}"))?;
    let metrics = compute_metrics(case, &sens);
    let seeds = rank_branches(&metrics, a.top_percent);
    let stages = StageTimings { metrics_ms: t.elapsed().as_secs_f64() * 1e3, ..Default::default() };

    let rank_of = |k: usize| seeds.iter().position(|&s| s == k).map(|p| p + 1);
    let mut csv = String::from("branch,pair,live,pf_mw,nlodf,m_mw,seed_rank\n");
    for k in 0..case.branches.len() {
        writeln!(
            csv,
            "{k},{},{},{},{},{},{}",
            pair_label(case, k),
            metrics.live[k],
            cell(metrics.pf[k]),
            cell(metrics.nlodf[k]),
            cell(metrics.m[k]),
            rank_of(k).map(|r| r.to_string()).unwrap_or_default(),
        )
        .unwrap();
    }

    let rows: Vec<serde_json::Value> = (0..case.branches.len())
        .map(|k| {
            serde_json::json!({
                "branch": k,
                "pair": pair_of(case, k),
                "live": metrics.live[k],
                "pf_mw": jnum(metrics.pf[k]),
                "nlodf": jnum(metrics.nlodf[k]),
                "m_mw": jnum(metrics.m[k]),
                "seed_rank": rank_of(k),
            })
        })
        .collect();
    let doc = serde_json::json!({ "case": loaded.path, "branches": rows });

    let config = serde_json::json!({
        "command": "metrics",
        "case": loaded.path,
        "top_percent": a.top_percent,
        "threads": threads,
    });
    let manifest = manifest_for(&loaded, config, stages, None, case.branches.len());
    emit_table(&a.emit, "metrics", csv, doc, &manifest)?;
    Ok(0)
}

fn cmd_subgraph(a: SubgraphArgs, threads: Option<usize>) -> Result<u8> {
    let cfg = ScreeningConfig {
        x: 1,
        d: a.distance,
        sl: a.search_level,
        a_percent: a.top_percent,
        max_candidates: usize::MAX,
    };
    cfg.validate().map_err(|e| anyhow!("{e}"))?;
    let loaded = load_case(&a.case.case)?;
    let case = &loaded.case;

    let t = Instant::now();
    let dc = solve_dc(case).map_err(|e| anyhow!("{e}"))?;
    let sens = compute_lodf(case, &dc).map_err(|e| anyhow!("{e}"))?;
    let metrics = compute_metrics(case, &sens);
    let mut seeds = rank_branches(&metrics, a.top_percent);
    let metrics_ms = t.elapsed().as_secs_f64() * 1e3;
    if let Some(limit) = a.seed_limit {
        seeds.truncate(limit);
    }

    let t = Instant::now();
    let graph = build_grid_graph(case, &metrics);
    let subs: Vec<_> = {
        use rayon::prelude::*;
        seeds
            .par_iter()
            .map(|&seed| build_subgraph(&graph, seed, &seeds, a.distance, a.search_level))
            .collect()
    };
    let stages = StageTimings {
        metrics_ms,
        subgraph_ms: t.elapsed().as_secs_f64() * 1e3,
        ..Default::default()
    };

    let mut csv = String::from("seed,pair,distance,search_level,desired,nodes,edges,connected\n");
    for sub in &subs {
        writeln!(
            csv,
            "{},{},{},{},{},{},{},{}",
            sub.seed,
            pair_label(case, sub.seed),
            a.distance,
            a.search_level,
            sub.desired.len(),
            sub.node_set.len(),
            sub.edge_set.len(),
            is_connected(&graph, sub),
        )
        .unwrap();
    }

    let rows: Vec<serde_json::Value> = subs
        .iter()
        .map(|sub| {
            serde_json::json!({
                "seed": sub.seed,
                "pair": pair_of(case, sub.seed),
                "desired": sub.desired,
                "nodes": sub.node_set.iter().map(|&n| case.buses[n].id).collect::<Vec<_>>(),
                "edges": sub.edge_set,
                "connected": is_connected(&graph, sub),
            })
        })
        .collect();
    let doc = serde_json::json!({
        "case": loaded.path,
        "distance": a.distance,
        "search_level": a.search_level,
        "subgraphs": rows,
    });

    let config = serde_json::json!({
        "command": "subgraph",
        "case": loaded.path,
        "distance": a.distance,
        "search_level": a.search_level,
        "top_percent": a.top_percent,
        "seed_limit": a.seed_limit,
        "threads": threads,
    });
    let manifest = manifest_for(&loaded, config, stages, None, subs.len());
    emit_table(&a.emit, "subgraphs", csv, doc, &manifest)?;
    Ok(0)
}

// ---------------------------------------------------------------------
// brute-force
// ---------------------------------------------------------------------

fn cmd_brute_force(a: BruteForceArgs, threads: Option<usize>) -> Result<u8> {
    if a.x < 1 {
        bail!("x must be ≥ 1");
    }
    let loaded = load_case(&a.case.case)?;
    let case = &loaded.case;
    let req = a.reserve_req.unwrap_or_else(|| default_reserve_requirement(case));

    let t = Instant::now();
    let result = brute_force_contingencies(case, a.x, !a.no_prescreen, Some(req));
    let stages =
        StageTimings { validation_ms: t.elapsed().as_secs_f64() * 1e3, ..Default::default() };

    let config = serde_json::json!({
        "command": "brute-force",
        "case": loaded.path,
        "x": a.x,
        "reserve_req_mw": req,
        "prescreen": !a.no_prescreen,
        "threads": threads,
    });
    let manifest = manifest_for(&loaded, config, stages, None, result.records.len());
    emit_records(&a.emit, "brute_force", &result.records, &manifest)?;

    eprintln!(
        "brute-force: {} subsets enumerated, {} prescreened out, {} violating",
        result.enumerated_count,
        result.screened_out.len(),
        result.records.len()
    );
    Ok(violation_exit(&result.records, a.no_fail))
}

// ---------------------------------------------------------------------
// solve
// ---------------------------------------------------------------------

/// Parses a report-style branch cell: `[136,133],[135,133]` (quotes and
/// whitespace tolerated), resolving each bus pair to a distinct in-service
/// branch of the case.
fn parse_outage(case: &NetworkCase, text: &str) -> Result<Vec<usize>> {
    let mut pairs = Vec::new();
    let cleaned: String =
        text.chars().filter(|c| !c.is_whitespace() && *c != '"' && *c != '\'').collect();
    let mut rest = cleaned.as_str();
    while !rest.is_empty() {
        rest = rest.strip_prefix(',').unwrap_or(rest);
        let Some(open) = rest.strip_prefix('[') else {
            bail!("bad outage syntax near {rest:?}: expected [from,to]");
        };
        let Some((body, tail)) = open.split_once(']') else {
            bail!("bad outage syntax: unclosed bracket in {text:?}");
        };
        let Some((f, t)) = body.split_once(',') else {
            bail!("bad outage pair [{body}]: expected two bus ids");
        };
        let f: i64 = f.parse().with_context(|| format!("bad bus id {f:?}"))?;
        let t: i64 = t.parse().with_context(|| format!("bad bus id {t:?}"))?;
        pairs.push((f, t));
        rest = tail;
    }
    if pairs.is_empty() {
        bail!("empty outage list {text:?}");
    }

    let mut picked = Vec::with_capacity(pairs.len());
    for (f, t) in pairs {
        let hit = case
            .branches
            .iter()
            .enumerate()
            .find(|(k, br)| {
                br.status
                    && !picked.contains(k)
                    && ((br.from == f && br.to == t) || (br.from == t && br.to == f))
            })
            .map(|(k, _)| k);
        match hit {
            Some(k) => picked.push(k),
            None => bail!("no in-service branch [{f},{t}] left to outage"),
        }
    }
    Ok(picked)
}

fn cmd_solve(a: SolveArgs, threads: Option<usize>) -> Result<u8> {
    let loaded = load_case(&a.case.case)?;
    let case = &loaded.case;
    let req = a.reserve_req.unwrap_or_else(|| default_reserve_requirement(case));
    let indices = match &a.outage {
        Some(text) => parse_outage(case, text)?,
        None => Vec::new(),
    };
    let pairs: Vec<(i64, i64)> = indices.iter().map(|&k| pair_of(case, k)).collect();

    let t = Instant::now();
    let report = match a.method {
        Method::Ac => {
            let applied = apply_outage(case, &indices);
            let sols: Vec<_> = applied.islands.iter().map(|isl| solve_ac(&isl.case)).collect();
            for (isl, sol) in applied.islands.iter().zip(&sols) {
                let tag = if sol.converged { "converged" } else { "DID NOT CONVERGE" };
                eprintln!(
                    "island of {} buses: {tag} in {} iterations, max mismatch {:.3e}",
                    isl.case.buses.len(),
                    sol.iterations,
                    sol.max_mismatch
                );
            }
            classify(&applied, &sols, req)
        }
        Method::Dc => validate_outage(case, &indices, ValidationMethod::Dc, Some(req)),
    };
    let stages =
        StageTimings { validation_ms: t.elapsed().as_secs_f64() * 1e3, ..Default::default() };

    if report.is_violating() {
        let kinds: Vec<String> = [
            (report.overflow > 0).then(|| format!("overflow {}", report.overflow)),
            (report.undervoltage > 0).then(|| format!("undervoltage {}", report.undervoltage)),
            (report.overvoltage > 0).then(|| format!("overvoltage {}", report.overvoltage)),
            report.reserve_limit.then(|| {
                format!(
                    "reserve limit ({:.1} MW margin < {:.1} MW required)",
                    report.reserve_margin_mw, report.reserve_req_mw
                )
            }),
            report.unsolved.then(|| "unsolved".to_string()),
            (report.islanded_load_mw > 1e-9)
                .then(|| format!("{:.1} MW load islanded", report.islanded_load_mw)),
        ]
        .into_iter()
        .flatten()
        .collect();
        eprintln!("solve: violations: {}", kinds.join(", "));
    } else {
        eprintln!("solve: zero violations");
    }

    let record = ContingencyRecord::new(indices, pairs, report, None, None);
    let config = serde_json::json!({
        "command": "solve",
        "case": loaded.path,
        "outage": a.outage,
        "reserve_req_mw": req,
        "method": a.method.label(),
        "threads": threads,
    });
    let manifest = manifest_for(&loaded, config, stages, None, 1);
    let records = [record];
    emit_records(&a.emit, "solve", &records, &manifest)?;
    Ok(violation_exit(&records, a.no_fail))
}

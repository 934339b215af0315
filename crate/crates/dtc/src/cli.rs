//! Command-line front end: `ingest`, `synth`, `exact`, `run`, `sweep`.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use dtc_core::oracle::exact_at_positions;
use dtc_core::stream::synthesize_fully_dynamic;

use crate::harness::{run_stream, sweep, ClusterConfig, ExecutionMode, SweepCell};
use crate::io::{parse_edge_list_path, read_stream_path, write_stream_path};
use crate::report::{write_metrics_csv, write_sidecar, MetricsRow};

/// PRNG identity recorded in run metadata.
const PRNG_IDENTITY: &str = "splitmix64";

#[derive(Debug, Parser)]
#[command(name = "dtc", version, about = "Streaming triangle counting over a simulated worker cluster")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AlgoArg {
    /// Adaptive sampling-ratio estimator (insertion-only streams).
    Ar,
    /// Random-pairing estimator (fully dynamic streams).
    Fd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Sequential,
    Parallel,
}

impl From<ModeArg> for ExecutionMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Sequential => ExecutionMode::Sequential,
            ModeArg::Parallel => ExecutionMode::Parallel,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Clean a raw edge list into a canonical insertion-only stream.
    Ingest {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
    },
    /// Synthesize a fully dynamic stream by scheduling deletions for a
    /// fraction of the edges.
    Synth {
        #[arg(long)]
        input: PathBuf,
        /// Fraction of edges to delete, in [0, 1].
        #[arg(long)]
        delta: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        output: PathBuf,
    },
    /// Exact global and per-node triangle counts of a stream, as CSV.
    Exact {
        #[arg(long)]
        input: PathBuf,
        /// Output CSV; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// One estimator run, scored against the exact oracle.
    Run {
        #[arg(long)]
        algo: AlgoArg,
        #[arg(long, default_value_t = 1)]
        workers: u32,
        /// Per-worker reservoir capacity k.
        #[arg(long)]
        budget: u64,
        /// Sampling-ratio threshold (ar only).
        #[arg(long, default_value_t = 0.2)]
        ratio: f64,
        /// Total per-worker edge-slot budget (ar only; default 64*k).
        #[arg(long)]
        total_budget: Option<u64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0)]
        hash_seed: u64,
        #[arg(long)]
        input: PathBuf,
        /// Also snapshot every M events (adds one CSV row per query point).
        #[arg(long)]
        query_every: Option<u64>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = ModeArg::Parallel)]
        mode: ModeArg,
    },
    /// A grid of configurations, each repeated over seeded runs.
    Sweep {
        /// Cell grid, e.g. "algo=ar;workers=1,4,16;budget=500;ratio=0.2,0.08".
        #[arg(long)]
        grid: String,
        #[arg(long, default_value_t = 100)]
        runs: u32,
        /// Base seed; run i of every cell uses seed + i.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0)]
        hash_seed: u64,
        #[arg(long)]
        input: PathBuf,
        /// Synthesize a fully dynamic stream with this deletion fraction
        /// before running (input must be insertion-only).
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = ModeArg::Parallel)]
        mode: ModeArg,
    },
}

pub fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Ingest { input, output } => cmd_ingest(&input, &output),
        Command::Synth { input, delta, seed, output } => cmd_synth(&input, delta, seed, &output),
        Command::Exact { input, out } => cmd_exact(&input, out.as_deref()),
        Command::Run {
            algo,
            workers,
            budget,
            ratio,
            total_budget,
            seed,
            hash_seed,
            input,
            query_every,
            out,
            mode,
        } => cmd_run(RunArgs {
            algo,
            workers,
            budget,
            ratio,
            total_budget,
            seed,
            hash_seed,
            input,
            query_every,
            out,
            mode,
        }),
        Command::Sweep { grid, runs, seed, hash_seed, input, delta, out, mode } => {
            cmd_sweep(&grid, runs, seed, hash_seed, &input, delta, &out, mode)
        }
    }
}

fn cmd_ingest(input: &Path, output: &Path) -> Result<()> {
    let (stream, report) =
        parse_edge_list_path(input).with_context(|| format!("ingesting {}", input.display()))?;
    write_stream_path(output, &stream)
        .with_context(|| format!("writing {}", output.display()))?;
    println!(
        "ingested {} edges over {} nodes; {}",
        stream.len(),
        stream.node_count(),
        report
    );
    println!("wrote {}", output.display());
    Ok(())
}

fn cmd_synth(input: &Path, delta: f64, seed: u64, output: &Path) -> Result<()> {
    let stream = read_stream_path(input)?;
    if !stream.is_insertion_only() {
        bail!("synth input must be an insertion-only stream");
    }
    let dynamic = synthesize_fully_dynamic(&stream, delta, seed)?;
    write_stream_path(output, &dynamic)?;
    println!(
        "synthesized {} events ({} insertions, {} deletions)",
        dynamic.len(),
        dynamic.insertion_count(),
        dynamic.deletion_count()
    );
    println!("wrote {}", output.display());
    Ok(())
}

fn cmd_exact(input: &Path, out: Option<&Path>) -> Result<()> {
    let stream = read_stream_path(input)?;
    let counts = exact_at_positions(&stream, &[stream.len() as u64])?
        .pop()
        .expect("one snapshot requested");
    let mut body = String::from("scope,node,count\n");
    body.push_str(&format!("global,,{}\n", counts.global));
    for (node, local) in &counts.locals {
        body.push_str(&format!("local,{node},{local}\n"));
    }
    match out {
        Some(path) => {
            let mut f = BufWriter::new(File::create(path)?);
            f.write_all(body.as_bytes())?;
            f.flush()?;
            println!("global triangles: {}", counts.global);
            println!("wrote {}", path.display());
        }
        None => print!("{body}"),
    }
    Ok(())
}

struct RunArgs {
    algo: AlgoArg,
    workers: u32,
    budget: u64,
    ratio: f64,
    total_budget: Option<u64>,
    seed: u64,
    hash_seed: u64,
    input: PathBuf,
    query_every: Option<u64>,
    out: PathBuf,
    mode: ModeArg,
}

fn cmd_run(args: RunArgs) -> Result<()> {
    let stream = read_stream_path(&args.input)?;
    let config = match args.algo {
        AlgoArg::Ar => {
            ClusterConfig::adaptive_ratio(args.workers, args.budget, args.ratio, args.total_budget)
        }
        AlgoArg::Fd => ClusterConfig::fully_dynamic(args.workers, args.budget),
    }
    .with_seed(args.seed)
    .with_hash_seed(args.hash_seed);

    let mut query_points = Vec::new();
    if let Some(every) = args.query_every {
        if every == 0 {
            bail!("--query-every must be positive");
        }
        let mut p = every;
        while p < stream.len() as u64 {
            query_points.push(p);
            p += every;
        }
    }

    let result = run_stream(&config, &stream, &query_points, args.mode.into())?;
    let positions: Vec<u64> = result.snapshots.iter().map(|s| s.position).collect();
    let exacts = exact_at_positions(&stream, &positions)?;
    let wall_ms = result.wall.as_millis() as u64;

    let rows: Vec<MetricsRow> = result
        .snapshots
        .iter()
        .zip(&exacts)
        .map(|(snapshot, exact)| {
            let report = dtc_core::metrics::evaluate_runs(exact, std::slice::from_ref(snapshot));
            MetricsRow {
                position: Some(snapshot.position),
                algo: config.algo_name(),
                workers: config.workers,
                budget: config.budget,
                ratio: config.ratio_threshold(),
                delta: None,
                seed_base: config.seed,
                runs: 1,
                global_error: report.mean_global_error,
                global_variance: report.global_variance,
                local_error: report.mean_local_error,
                pearson: report.mean_pearson,
                wall_ms,
            }
        })
        .collect();
    write_metrics_csv(&args.out, &rows, true)?;

    let mut meta = config_metadata("run", &config, &args.input, stream.len());
    meta.push(("runs", "1".into()));
    meta.push(("mode", mode_name(args.mode).into()));
    meta.push((
        "query_every",
        args.query_every.map(|q| q.to_string()).unwrap_or_default(),
    ));
    meta.push((
        "budget_exhaustion_events",
        result.budget_exhaustion_events().to_string(),
    ));
    meta.push(("wall_ms", wall_ms.to_string()));
    write_sidecar(&args.out, &meta)?;

    println!("wrote {} rows to {}", rows.len(), args.out.display());
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_sweep(
    grid: &str,
    runs: u32,
    seed: u64,
    hash_seed: u64,
    input: &Path,
    delta: Option<f64>,
    out: &Path,
    mode: ModeArg,
) -> Result<()> {
    let mut stream = read_stream_path(input)?;
    if let Some(delta) = delta {
        if !stream.is_insertion_only() {
            bail!("--delta synthesis needs an insertion-only input stream");
        }
        stream = synthesize_fully_dynamic(&stream, delta, seed)?;
    }
    let configs: Vec<ClusterConfig> = parse_grid(grid)?
        .into_iter()
        .map(|c| c.with_seed(seed).with_hash_seed(hash_seed))
        .collect();

    let cells = sweep(&configs, &stream, runs, mode.into())?;
    let rows: Vec<MetricsRow> = cells.iter().map(|cell| cell_row(cell, delta)).collect();
    write_metrics_csv(out, &rows, false)?;

    let mut meta: Vec<(&str, String)> = vec![
        ("tool", "dtc".into()),
        ("command", "sweep".into()),
        ("prng", PRNG_IDENTITY.into()),
        ("grid", grid.into()),
        ("cells", cells.len().to_string()),
        ("runs", runs.to_string()),
        ("seed_base", seed.to_string()),
        ("hash_seed", hash_seed.to_string()),
        ("input", input.display().to_string()),
        ("stream_events", stream.len().to_string()),
        ("delta", delta.map(|d| d.to_string()).unwrap_or_default()),
        ("mode", mode_name(mode).into()),
        (
            "budget_exhaustion_events",
            cells.iter().map(|c| c.budget_exhaustion_events).sum::<u64>().to_string(),
        ),
        (
            "wall_ms_total",
            cells.iter().map(|c| c.wall_total.as_millis() as u64).sum::<u64>().to_string(),
        ),
    ];
    meta.retain(|(_, v)| !v.is_empty());
    write_sidecar(out, &meta)?;

    println!("wrote {} rows to {}", rows.len(), out.display());
    Ok(())
}

fn cell_row(cell: &SweepCell, delta: Option<f64>) -> MetricsRow {
    MetricsRow {
        position: None,
        algo: cell.config.algo_name(),
        workers: cell.config.workers,
        budget: cell.config.budget,
        ratio: cell.config.ratio_threshold(),
        delta,
        seed_base: cell.config.seed,
        runs: cell.report.runs,
        global_error: cell.report.mean_global_error,
        global_variance: cell.report.global_variance,
        local_error: cell.report.mean_local_error,
        pearson: cell.report.mean_pearson,
        wall_ms: cell.wall_total.as_millis() as u64,
    }
}

fn mode_name(mode: ModeArg) -> &'static str {
    match mode {
        ModeArg::Sequential => "sequential",
        ModeArg::Parallel => "parallel",
    }
}

fn config_metadata(
    command: &str,
    config: &ClusterConfig,
    input: &Path,
    events: usize,
) -> Vec<(&'static str, String)> {
    let mut meta: Vec<(&'static str, String)> = vec![
        ("tool", "dtc".into()),
        ("command", command.to_string()),
        ("prng", PRNG_IDENTITY.into()),
        ("algo", config.algo_name().into()),
        ("workers", config.workers.to_string()),
        ("budget", config.budget.to_string()),
        ("seed", config.seed.to_string()),
        ("hash_seed", config.hash_seed.to_string()),
        ("input", input.display().to_string()),
        ("stream_events", events.to_string()),
    ];
    if let Some(r) = config.ratio_threshold() {
        meta.push(("ratio", r.to_string()));
    }
    if let Some(s) = config.total_budget() {
        meta.push(("total_budget", s.to_string()));
    }
    meta
}

/// Grid spec: semicolon-separated `key=v1,v2,...` dimensions. Keys: `algo`
/// (ar|fd), `workers`, `budget`, `ratio` (ar only), `total-budget` (ar
/// only). Cells are the cartesian product; fd cells take no ratio/budget-
/// threshold dimensions.
pub fn parse_grid(spec: &str) -> Result<Vec<ClusterConfig>> {
    let spec = spec.trim();
    if spec.is_empty() {
        bail!("empty sweep grid");
    }
    let mut algos: Vec<AlgoArg> = Vec::new();
    let mut workers: Vec<u32> = Vec::new();
    let mut budgets: Vec<u64> = Vec::new();
    let mut ratios: Vec<f64> = Vec::new();
    let mut totals: Vec<u64> = Vec::new();
    for part in spec.split(';') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        let (key, values) = part
            .split_once('=')
            .with_context(|| format!("grid dimension {part:?} is not key=values"))?;
        let values = values.trim();
        if values.is_empty() {
            bail!("grid dimension {key:?} has no values");
        }
        match key.trim() {
            "algo" => {
                for v in values.split(',') {
                    algos.push(match v.trim() {
                        "ar" => AlgoArg::Ar,
                        "fd" => AlgoArg::Fd,
                        other => bail!("unknown algorithm {other:?} (expected ar or fd)"),
                    });
                }
            }
            "workers" | "W" => {
                for v in values.split(',') {
                    workers.push(v.trim().parse().with_context(|| format!("workers value {v:?}"))?);
                }
            }
            "budget" | "k" => {
                for v in values.split(',') {
                    budgets.push(v.trim().parse().with_context(|| format!("budget value {v:?}"))?);
                }
            }
            "ratio" | "R" => {
                for v in values.split(',') {
                    ratios.push(v.trim().parse().with_context(|| format!("ratio value {v:?}"))?);
                }
            }
            "total-budget" | "total_budget" => {
                for v in values.split(',') {
                    totals.push(
                        v.trim().parse().with_context(|| format!("total-budget value {v:?}"))?,
                    );
                }
            }
            other => bail!("unknown grid dimension {other:?}"),
        }
    }
    if algos.is_empty() {
        bail!("grid needs an algo dimension");
    }
    if workers.is_empty() {
        bail!("grid needs a workers dimension");
    }
    if budgets.is_empty() {
        bail!("grid needs a budget dimension");
    }
    if algos.iter().all(|a| *a == AlgoArg::Fd) && !ratios.is_empty() {
        bail!("ratio only applies to the ar algorithm");
    }

    let mut cells = Vec::new();
    for &algo in &algos {
        let (ratio_dim, total_dim): (Vec<Option<f64>>, Vec<Option<u64>>) = match algo {
            AlgoArg::Fd => (vec![None], vec![None]),
            AlgoArg::Ar => (
                if ratios.is_empty() { vec![Some(0.2)] } else { ratios.iter().map(|&r| Some(r)).collect() },
                if totals.is_empty() { vec![None] } else { totals.iter().map(|&t| Some(t)).collect() },
            ),
        };
        for &w in &workers {
            for &k in &budgets {
                for &ratio in &ratio_dim {
                    for &total in &total_dim {
                        cells.push(match algo {
                            AlgoArg::Ar => ClusterConfig::adaptive_ratio(
                                w,
                                k,
                                ratio.expect("ar cells carry a ratio"),
                                total,
                            ),
                            AlgoArg::Fd => ClusterConfig::fully_dynamic(w, k),
                        });
                    }
                }
            }
        }
    }
    Ok(cells)
}

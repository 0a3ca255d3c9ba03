//! `rhga` command line: solve single instances and run benchmark sweeps.

mod report;

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;

use rhga_core::driver::{rhga_run, MetricMode, RunResult, SolverConfig, Variant};
use rhga_core::instance::{parse_bks_catalog, Instance};
use rhga_core::oracle::exact_dp;

use report::{aggregate, gap_percent, rows_to_csv, RunRow};

/// Best-known lengths for the 138-instance benchmark set, compiled in as
/// the default catalog.
const BUNDLED_BKS: &str = include_str!("../data/bks.txt");

#[derive(Parser)]
#[command(name = "rhga", version, about = "Hybrid genetic TSP solver")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Solve one TSPLIB instance and emit a JSON result
    Solve(SolveArgs),
    /// Run a (instances x variants x seeds) benchmark sweep
    Bench(BenchArgs),
}

#[derive(Args, Clone)]
struct SolveArgs {
    /// TSPLIB .tsp file
    #[arg(long)]
    instance: PathBuf,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// rhga | eax | alpha-eax | fixq-eax | q-eax | q-eax-special |
    /// eax-lkh | alpha-eax-lkh | fixq-eax-lkh | rhga-k
    #[arg(long, default_value = "rhga")]
    variant: String,
    /// Candidate metric override (distance | alpha | fixed-q | adaptive-q)
    #[arg(long)]
    metric: Option<String>,
    #[arg(long, default_value_t = 300)]
    npop: usize,
    #[arg(long, default_value_t = 30)]
    nch: usize,
    #[arg(long, default_value_t = 5)]
    kmax: usize,
    #[arg(long, default_value_t = 0.1)]
    lambda: f64,
    #[arg(long, default_value_t = 0.9)]
    gamma: f64,
    /// Generations before the stalled-special case fires: a number or "auto"
    #[arg(long, default_value = "auto")]
    mgen: String,
    /// Stop at a known optimum: a number, "bks", or "none"
    #[arg(long, default_value = "none")]
    opt: String,
    /// Wall-clock limit in seconds
    #[arg(long)]
    time_limit: Option<f64>,
    /// Write the best tour in TSPLIB TOUR format
    #[arg(long)]
    tour_out: Option<PathBuf>,
    /// Write the JSON result here as well as to stdout
    #[arg(long)]
    json_out: Option<PathBuf>,
    /// Dump the final candidate table, one "i j q" per line
    #[arg(long)]
    qdump: Option<PathBuf>,
    /// Solve exactly by dynamic programming (n <= 18) instead
    #[arg(long)]
    oracle: bool,
    /// Best-known-solution catalog ("name length" per line); defaults to
    /// the bundled benchmark catalog
    #[arg(long)]
    bks: Option<PathBuf>,
    /// Special-individual count for rhga-k
    #[arg(long, default_value_t = 1)]
    special_count: usize,
}

#[derive(Args, Clone)]
struct BenchArgs {
    /// Manifest: one instance path per line, optional "path bks_override";
    /// relative paths resolve against the manifest's directory
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long, default_value_t = 10)]
    runs: usize,
    /// Comma-separated variant list
    #[arg(long, default_value = "rhga")]
    variants: String,
    /// Output directory for rows.jsonl, rows.csv, and report.json
    #[arg(long)]
    out: PathBuf,
    /// Parallel (instance, variant, seed) cells
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Base seed; run r uses seed base + r
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 300)]
    npop: usize,
    #[arg(long, default_value_t = 30)]
    nch: usize,
    #[arg(long, default_value_t = 5)]
    kmax: usize,
    #[arg(long, default_value_t = 0.1)]
    lambda: f64,
    #[arg(long, default_value_t = 0.9)]
    gamma: f64,
    #[arg(long, default_value = "auto")]
    mgen: String,
    /// "bks" stops each run at the catalog value; "none" runs to stage end
    #[arg(long, default_value = "none")]
    opt: String,
    #[arg(long)]
    time_limit: Option<f64>,
    #[arg(long)]
    bks: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.cmd {
        Cmd::Solve(a) => solve(a),
        Cmd::Bench(a) => bench(a),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn load_catalog(path: &Option<PathBuf>) -> Result<HashMap<String, i64>> {
    let text = match path {
        Some(p) => fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?,
        None => BUNDLED_BKS.to_string(),
    };
    parse_bks_catalog(&text).map_err(|e| anyhow!("bad BKS catalog: {e}"))
}

fn load_instance(path: &Path, catalog: &HashMap<String, i64>) -> Result<Instance> {
    let text =
        fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut inst = Instance::parse_tsplib(&text)
        .map_err(|e| anyhow!("parsing {}: {e}", path.display()))?;
    if inst.name.is_empty() {
        inst.name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
    }
    inst.attach_bks(catalog);
    Ok(inst)
}

fn parse_mgen(s: &str) -> Result<Option<usize>> {
    if s.eq_ignore_ascii_case("auto") {
        Ok(None)
    } else {
        Ok(Some(s.parse::<usize>().context("bad --mgen")?))
    }
}

fn parse_opt(s: &str, inst: &Instance) -> Result<Option<i64>> {
    match s.to_ascii_lowercase().as_str() {
        "none" => Ok(None),
        "bks" => match inst.bks {
            Some(b) => Ok(Some(b)),
            None => bail!("--opt bks requested but no BKS known for {}", inst.name),
        },
        other => Ok(Some(other.parse::<i64>().context("bad --opt")?)),
    }
}

#[derive(Serialize)]
struct SolveOutput<'a> {
    instance: &'a str,
    variant: &'a str,
    seed: u64,
    best_length: i64,
    gap_percent: Option<f64>,
    generations: u64,
    q_lkh_calls: u64,
    wall_time_s: f64,
    trace: &'a [(u64, i64)],
}

fn solve(args: SolveArgs) -> Result<ExitCode> {
    let catalog = load_catalog(&args.bks)?;
    let inst = load_instance(&args.instance, &catalog)?;

    let (result, variant_name): (RunResult, String) = if args.oracle {
        let r = exact_dp(&inst).map_err(|e| anyhow!("{e}"))?;
        let tour = r.optimal_tour;
        (
            RunResult {
                best_order: tour.order().to_vec(),
                best_length: r.optimal_length,
                generations: 0,
                wall_time_s: 0.0,
                q_lkh_calls: 0,
                trace: vec![(0, r.optimal_length)],
                time_limit_hit: false,
                q_table: None,
            },
            "oracle".to_string(),
        )
    } else {
        let variant = Variant::parse(&args.variant)
            .ok_or_else(|| anyhow!("unknown variant: {}", args.variant))?;
        let metric_mode = match &args.metric {
            Some(m) => {
                Some(MetricMode::parse(m).ok_or_else(|| anyhow!("unknown metric: {m}"))?)
            }
            None => None,
        };
        let cfg = SolverConfig {
            n_pop: args.npop,
            n_ch: args.nch,
            k_max: args.kmax,
            lambda: args.lambda,
            gamma: args.gamma,
            m_gen: parse_mgen(&args.mgen)?,
            opt: parse_opt(&args.opt, &inst)?,
            variant,
            special_count: args.special_count,
            metric_mode,
            seed: args.seed,
            time_limit: args.time_limit.map(Duration::from_secs_f64),
            ..SolverConfig::default()
        };
        let r = rhga_run(&inst, &cfg).map_err(|e| anyhow!("{e}"))?;
        (r, args.variant.clone())
    };

    let out = SolveOutput {
        instance: &inst.name,
        variant: &variant_name,
        seed: args.seed,
        best_length: result.best_length,
        gap_percent: gap_percent(result.best_length, inst.bks),
        generations: result.generations,
        q_lkh_calls: result.q_lkh_calls,
        wall_time_s: result.wall_time_s,
        trace: &result.trace,
    };
    let json = serde_json::to_string_pretty(&out)?;
    println!("{json}");
    if let Some(p) = &args.json_out {
        fs::write(p, &json).with_context(|| format!("writing {}", p.display()))?;
    }
    if let Some(p) = &args.tour_out {
        let tour = result.best_tour(&inst);
        let text = inst.write_tour(&tour).map_err(|e| anyhow!("{e}"))?;
        fs::write(p, text).with_context(|| format!("writing {}", p.display()))?;
    }
    if let Some(p) = &args.qdump {
        match &result.q_table {
            Some(qt) => fs::write(p, qt.dump())
                .with_context(|| format!("writing {}", p.display()))?,
            None => bail!("--qdump has no table to dump in oracle mode"),
        }
    }
    Ok(ExitCode::SUCCESS)
}

struct Cell {
    manifest_idx: usize,
    variant_idx: usize,
    run_idx: usize,
}

fn bench(args: BenchArgs) -> Result<ExitCode> {
    let catalog = load_catalog(&args.bks)?;
    let manifest_dir = args
        .manifest
        .parent()
        .map(Path::to_path_buf)
        .unwrap_or_default();
    let manifest_text = fs::read_to_string(&args.manifest)
        .with_context(|| format!("reading {}", args.manifest.display()))?;

    let variants: Vec<String> = args
        .variants
        .split(',')
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .collect();
    for v in &variants {
        Variant::parse(v).ok_or_else(|| anyhow!("unknown variant: {v}"))?;
    }
    if variants.is_empty() {
        bail!("--variants must name at least one variant");
    }

    // load manifest instances, skipping unreadable ones with a warning
    let mut instances: Vec<Instance> = Vec::new();
    let mut manifest_entries: Vec<(String, Option<i64>)> = Vec::new();
    for line in manifest_text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split_whitespace();
        let raw_path = parts.next().unwrap();
        let override_bks: Option<i64> = parts.next().and_then(|s| s.parse().ok());
        let path = {
            let p = PathBuf::from(raw_path);
            if p.is_absolute() {
                p
            } else {
                manifest_dir.join(p)
            }
        };
        match load_instance(&path, &catalog) {
            Ok(mut inst) => {
                if let Some(b) = override_bks {
                    inst.bks = Some(b);
                }
                manifest_entries.push((inst.name.clone(), inst.bks));
                instances.push(inst);
            }
            Err(e) => eprintln!("warning: skipping {raw_path}: {e}"),
        }
    }
    if instances.is_empty() {
        bail!("no readable instances in manifest");
    }

    let cells: Vec<Cell> = (0..instances.len())
        .flat_map(|mi| {
            let variants_len = variants.len();
            let runs = args.runs;
            (0..variants_len).flat_map(move |vi| {
                (0..runs).map(move |ri| Cell {
                    manifest_idx: mi,
                    variant_idx: vi,
                    run_idx: ri,
                })
            })
        })
        .collect();

    let run_cell = |cell: &Cell| -> Result<RunRow> {
        let inst = &instances[cell.manifest_idx];
        let variant_name = &variants[cell.variant_idx];
        let variant = Variant::parse(variant_name).unwrap();
        let cfg = SolverConfig {
            n_pop: args.npop,
            n_ch: args.nch,
            k_max: args.kmax,
            lambda: args.lambda,
            gamma: args.gamma,
            m_gen: parse_mgen(&args.mgen)?,
            opt: parse_opt(&args.opt, inst)?,
            variant,
            seed: args.seed + cell.run_idx as u64,
            time_limit: args.time_limit.map(Duration::from_secs_f64),
            ..SolverConfig::default()
        };
        let r = rhga_run(inst, &cfg).map_err(|e| anyhow!("{e}"))?;
        Ok(RunRow {
            instance: inst.name.clone(),
            variant: variant_name.clone(),
            seed: cfg.seed,
            best_length: r.best_length,
            gap_percent: gap_percent(r.best_length, inst.bks),
            generations: r.generations,
            q_lkh_calls: r.q_lkh_calls,
            wall_time_s: r.wall_time_s,
        })
    };

    // cells are independent; results land in manifest order regardless of
    // scheduling
    let rows: Vec<RunRow> = if args.jobs > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(args.jobs)
            .build()
            .context("building thread pool")?;
        pool.install(|| cells.par_iter().map(run_cell).collect::<Result<Vec<_>>>())?
    } else {
        cells.iter().map(run_cell).collect::<Result<Vec<_>>>()?
    };

    let report = aggregate(&rows, &manifest_entries, &variants);

    fs::create_dir_all(&args.out)
        .with_context(|| format!("creating {}", args.out.display()))?;
    let jsonl: String = rows
        .iter()
        .map(|r| serde_json::to_string(r).map(|s| s + "\n"))
        .collect::<std::result::Result<String, _>>()?;
    fs::write(args.out.join("rows.jsonl"), jsonl)?;
    fs::write(args.out.join("rows.csv"), rows_to_csv(&rows))?;
    fs::write(
        args.out.join("report.json"),
        serde_json::to_string_pretty(&report)?,
    )?;
    println!(
        "{} rows over {} instances x {} variants x {} runs -> {}",
        rows.len(),
        instances.len(),
        variants.len(),
        args.runs,
        args.out.display()
    );
    Ok(ExitCode::SUCCESS)
}

//! `mpam` command-line front end.
//!
//! Exit codes: 0 success, 2 invalid input, 3 infeasible plan (the partial
//! plan is still written).

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use mpam::compare::{compare, CompareOptions, CSV_HEADER};
use mpam::config::RunConfig;
use mpam::geo::{load_map, DigitalMap};
use mpam::planner::{plan, Method, PlanResult};
use mpam::render::render_svg;
use mpam::synth::{generate, GenSpec};

#[derive(Parser)]
#[command(
    name = "mpam",
    version,
    about = "Base station placement by constrained k-medoids"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    /// Re-cluster the whole map with k + 1
    #[value(name = "1")]
    One,
    /// Split only violating clusters
    #[value(name = "2")]
    Two,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::One => Method::GlobalRecluster,
            MethodArg::Two => Method::LocalSplit,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Plan base stations for one map.
    Plan {
        #[arg(long)]
        map: PathBuf,
        #[arg(long)]
        config: PathBuf,
        /// Adjustment method; falls back to planner.method in the config.
        #[arg(long)]
        method: Option<MethodArg>,
        /// Fixed cell range in km, bypassing the link budget and Hata model.
        #[arg(long)]
        cell_range_km: Option<f64>,
        #[arg(long, default_value = "plan.json")]
        out: PathBuf,
        /// Also render the plan as SVG.
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Compare both methods and fixed-k PAM over maps and cell ranges.
    Compare {
        #[arg(long = "map", alias = "maps", required = true, num_args = 1.., value_delimiter = ',')]
        maps: Vec<PathBuf>,
        #[arg(long)]
        config: PathBuf,
        /// Comma-separated cell ranges in km.
        #[arg(long)]
        cell_ranges: String,
        /// k for the plain PAM baseline; radio-derived initial k when absent.
        #[arg(long)]
        baseline_k: Option<usize>,
        /// Runs per timing; the median is reported.
        #[arg(long, default_value_t = 1)]
        repeat: usize,
        /// Run rows concurrently (runtimes then include contention).
        #[arg(long)]
        parallel: bool,
        #[arg(long, default_value = "table.csv")]
        out: PathBuf,
    },
    /// Generate a seeded synthetic map.
    GenMap {
        #[arg(long, allow_negative_numbers = true)]
        nodes: i64,
        #[arg(long, allow_negative_numbers = true)]
        area_m2: f64,
        #[arg(long, allow_negative_numbers = true)]
        subscribers: i64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Place nodes in this many Gaussian clumps instead of uniformly.
        #[arg(long)]
        clumps: Option<usize>,
        #[arg(long)]
        name: Option<String>,
        #[arg(long, default_value = "map.json")]
        out: PathBuf,
    },
    /// Render an existing plan as SVG.
    Render {
        #[arg(long)]
        plan: PathBuf,
        #[arg(long)]
        map: PathBuf,
        #[arg(long, default_value = "plan.svg")]
        out: PathBuf,
    },
}

enum Outcome {
    Done,
    Infeasible,
}

fn read_map(path: &Path) -> Result<DigitalMap> {
    let f = File::open(path).with_context(|| format!("opening map {}", path.display()))?;
    load_map(BufReader::new(f)).with_context(|| format!("map {}", path.display()))
}

fn read_config(path: &Path) -> Result<RunConfig> {
    let f = File::open(path).with_context(|| format!("opening config {}", path.display()))?;
    RunConfig::load(BufReader::new(f)).with_context(|| format!("config {}", path.display()))
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w =
        BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

fn parse_ranges(s: &str) -> Result<Vec<f64>> {
    let ranges = s
        .split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| {
            let r: f64 = t
                .parse()
                .map_err(|_| anyhow!("cell range {t:?} is not a number"))?;
            if !(r > 0.0 && r.is_finite()) {
                bail!("cell range {r} must be positive");
            }
            Ok(r)
        })
        .collect::<Result<Vec<_>>>()?;
    if ranges.is_empty() {
        bail!("--cell-ranges is empty");
    }
    Ok(ranges)
}

fn run_plan(
    map: &Path,
    config: &Path,
    method: Option<MethodArg>,
    cell_range_km: Option<f64>,
    out: &Path,
    svg: Option<&Path>,
) -> Result<Outcome> {
    let map = read_map(map)?;
    let cfg = read_config(config)?;
    let method = method
        .map(Method::from)
        .or(cfg.planner.method)
        .ok_or_else(|| anyhow!("--method is required (or set planner.method in the config)"))?;
    let ctx = cfg.context(map, method, cell_range_km)?;
    for w in &ctx.coverage.warnings {
        eprintln!("warning: {w}");
    }
    let result = plan(&ctx);
    for d in &result.diagnostics {
        eprintln!("note: {d}");
    }
    write_json(out, &result)?;
    if let Some(path) = svg {
        std::fs::write(path, render_svg(&result, &ctx.map))
            .with_context(|| format!("writing {}", path.display()))?;
    }
    eprintln!(
        "{}: k={} feasible={} ({:.1} ms)",
        result.method.label(),
        result.final_k,
        result.feasible,
        result.elapsed_ms
    );
    Ok(if result.feasible {
        Outcome::Done
    } else {
        Outcome::Infeasible
    })
}

fn run_compare(
    maps: &[PathBuf],
    config: &Path,
    cell_ranges: &str,
    baseline_k: Option<usize>,
    repeat: usize,
    parallel: bool,
    out: &Path,
) -> Result<Outcome> {
    let ranges = parse_ranges(cell_ranges)?;
    if repeat == 0 {
        bail!("--repeat must be at least 1");
    }
    let cfg = read_config(config)?;
    let maps = maps
        .iter()
        .map(|p| read_map(p))
        .collect::<Result<Vec<_>>>()?;
    let rows = compare(
        &maps,
        &cfg,
        &CompareOptions {
            cell_ranges_km: ranges,
            baseline_k,
            repeat,
            parallel,
        },
    );
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(out)
        .with_context(|| format!("creating {}", out.display()))?;
    w.write_record(CSV_HEADER)?;
    for row in &rows {
        w.serialize(row)?;
    }
    w.flush()?;
    for row in rows.iter().filter(|r| r.status != "ok") {
        eprintln!("{} @ {} km: {}", row.dataset, row.cell_range_km, row.status);
    }
    Ok(Outcome::Done)
}

fn run_gen_map(
    nodes: i64,
    area_m2: f64,
    subscribers: i64,
    seed: u64,
    clumps: Option<usize>,
    name: Option<String>,
    out: &Path,
) -> Result<Outcome> {
    if nodes < 1 {
        bail!("--nodes must be at least 1, got {nodes}");
    }
    if !(area_m2 > 0.0 && area_m2.is_finite()) {
        bail!("--area-m2 must be positive, got {area_m2}");
    }
    if subscribers < 0 {
        bail!("--subscribers must be non-negative, got {subscribers}");
    }
    let spec = GenSpec {
        name: name.unwrap_or_else(|| format!("synthetic-{nodes}-seed{seed}")),
        nodes: nodes as usize,
        area_m2,
        subscribers: subscribers as u64,
        seed,
        clumps,
    };
    let map = generate(&spec)?;
    write_json(out, &map.to_file())?;
    Ok(Outcome::Done)
}

fn run_render(plan_path: &Path, map: &Path, out: &Path) -> Result<Outcome> {
    let map = read_map(map)?;
    let f =
        File::open(plan_path).with_context(|| format!("opening plan {}", plan_path.display()))?;
    let result: PlanResult = serde_json::from_reader(BufReader::new(f))
        .with_context(|| format!("plan {}", plan_path.display()))?;
    std::fs::write(out, render_svg(&result, &map))
        .with_context(|| format!("writing {}", out.display()))?;
    Ok(Outcome::Done)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Plan {
            map,
            config,
            method,
            cell_range_km,
            out,
            svg,
        } => run_plan(&map, &config, method, cell_range_km, &out, svg.as_deref()),
        Command::Compare {
            maps,
            config,
            cell_ranges,
            baseline_k,
            repeat,
            parallel,
            out,
        } => run_compare(
            &maps,
            &config,
            &cell_ranges,
            baseline_k,
            repeat,
            parallel,
            &out,
        ),
        Command::GenMap {
            nodes,
            area_m2,
            subscribers,
            seed,
            clumps,
            name,
            out,
        } => run_gen_map(nodes, area_m2, subscribers, seed, clumps, name, &out),
        Command::Render { plan, map, out } => run_render(&plan, &map, &out),
    };
    match outcome {
        Ok(Outcome::Done) => ExitCode::SUCCESS,
        Ok(Outcome::Infeasible) => ExitCode::from(3),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

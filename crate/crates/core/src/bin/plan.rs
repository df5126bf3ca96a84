use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use samplan::bench::{self, file_header, render_svg, ExperimentConfig};
use samplan::graph::{shortest_path, GraphDump, RoadmapGraph};
use samplan::planners::{plan, Schedule};
use samplan::rgg::{self, ModelFamily, ParamScale, SweepConfig};
use samplan::RngStream;

#[derive(Parser)]
#[command(name = "plan", version, about = "Sampling-based motion planning experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a Monte Carlo experiment described by a JSON config.
    Run(RunArgs),
    /// Run the planner embedded in a scenario file once.
    Solve(SolveArgs),
    /// Estimate random geometric graph connectivity over a parameter grid.
    RggSweep(SweepArgs),
    /// Render a graph dump over a planar scenario as SVG.
    Render(RenderArgs),
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides the config's "output").
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; 0 uses every core.
    #[arg(long)]
    threads: Option<usize>,
    /// Write elapsed times as 0 so repeated runs are byte-identical.
    #[arg(long)]
    no_timing: bool,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    scenario: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    /// Iteration budget (overrides the scenario's planner "n").
    #[arg(long)]
    n: Option<usize>,
}

#[derive(Args)]
struct SweepArgs {
    /// rdisc, knearest or onlinenn.
    #[arg(long)]
    model: String,
    #[arg(long, default_value_t = 2)]
    d: usize,
    #[arg(long)]
    n: usize,
    /// Comma-separated parameter grid.
    #[arg(long, value_delimiter = ',', default_value = "1")]
    params: Vec<f64>,
    /// absolute, rc (multiples of the connectivity radius), lambda (n r^d) or logn (k / ln n).
    #[arg(long, default_value = "absolute")]
    scale: String,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    /// Draw a Poisson(n) number of points.
    #[arg(long)]
    poissonized: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0)]
    threads: usize,
    /// CSV output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RenderArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    scenario: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

fn main() {
    if let Err(e) = real_main() {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

fn real_main() -> Result<()> {
    match Cli::parse().command {
        Command::Run(a) => run(a),
        Command::Solve(a) => solve(a),
        Command::RggSweep(a) => sweep(a),
        Command::Render(a) => render(a),
    }
}

fn run(a: RunArgs) -> Result<()> {
    let mut config = ExperimentConfig::load(&a.config)?;
    if let Some(seed) = a.seed {
        config.seed = seed;
    }
    if let Some(t) = a.threads {
        config.threads = t;
    }
    if a.no_timing {
        config.timing = false;
    }
    let out = a
        .out
        .or_else(|| config.output.clone())
        .context("no output directory: pass --out or set \"output\" in the config")?;
    let result = bench::run_experiment(&config, &out)?;
    for label in config.labels() {
        if let Some(last) = result.report.series(&label).last() {
            let norm = last
                .normalized_mean
                .map(|v| format!(" (x{v:.4} of optimum)"))
                .unwrap_or_default();
            println!(
                "{label}: n={} mean cost {:.6}{norm}, solved {}/{}",
                last.iteration, last.mean_cost, last.finite_count, last.trials
            );
        }
    }
    for f in &result.files {
        println!("wrote {}", f.display());
    }
    Ok(())
}

fn solve(a: SolveArgs) -> Result<()> {
    let file = bench::load_scenario_file(&a.scenario)?;
    let Some(mut spec) = file.planner else {
        bail!("{} has no \"planner\" object", a.scenario.display());
    };
    if let Some(seed) = a.seed {
        spec.seed = seed;
    }
    if let Some(n) = a.n {
        spec.n = n;
    }
    let scenario = file.scenario;
    let out = plan(
        &scenario,
        &spec,
        &mut RngStream::new(spec.seed),
        &Schedule::log_spaced(spec.n, bench::DEFAULT_CHECKPOINTS),
    )?;
    fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;

    let graph_path = a.out.join("graph.json");
    fs::write(&graph_path, serde_json::to_string(&out.graph.to_dump())?)
        .with_context(|| format!("writing {}", graph_path.display()))?;

    let trace_path = a.out.join("trace.csv");
    let mut csv = Vec::new();
    writeln!(csv, "{}", file_header(spec.seed))?;
    writeln!(csv, "iteration,best_cost,elapsed_s,collision_checks")?;
    for p in &out.trace.points {
        writeln!(
            csv,
            "{},{},{},{}",
            p.iteration, p.best_cost, p.elapsed_s, p.collision_checks
        )?;
    }
    fs::write(&trace_path, csv).with_context(|| format!("writing {}", trace_path.display()))?;

    let best = best_path(&out.graph, &scenario);
    println!(
        "{}: {} vertices, {} edges, best cost {}",
        spec.label(),
        out.graph.vertex_count(),
        out.graph.edge_count(),
        best.as_ref().map_or(f64::INFINITY, |q| q.cost)
    );
    if scenario.dim() == 2 {
        let svg_path = a.out.join("graph.svg");
        let svg = render_svg(&out.graph, &scenario, best.as_ref().and_then(|q| q.path.as_ref()))?;
        fs::write(&svg_path, svg).with_context(|| format!("writing {}", svg_path.display()))?;
        println!("wrote {}", svg_path.display());
    }
    println!("wrote {}\nwrote {}", graph_path.display(), trace_path.display());
    Ok(())
}

fn best_path(g: &RoadmapGraph, scenario: &samplan::Scenario) -> Option<samplan::QueryResult> {
    if g.vertex_count() == 0 {
        return None;
    }
    shortest_path(g, 0, |p| scenario.in_goal(p.coords()))
        .ok()
        .filter(|q| q.is_found())
}

fn sweep(a: SweepArgs) -> Result<()> {
    let config = SweepConfig {
        family: a.model.parse::<ModelFamily>()?,
        d: a.d,
        n: a.n,
        params: a.params,
        scale: a.scale.parse::<ParamScale>()?,
        trials: a.trials,
        poissonized: a.poissonized,
        seed: a.seed,
        threads: a.threads,
    };
    let rows = rgg::sweep(&config)?;
    let mut text = format!("{}\n{}\n", file_header(a.seed), rgg::SWEEP_CSV_HEADER);
    for r in &rows {
        text.push_str(&r.csv_line());
        text.push('\n');
    }
    match a.out {
        Some(path) => write_file(&path, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn render(a: RenderArgs) -> Result<()> {
    let scenario = bench::load_scenario_file(&a.scenario)?.scenario;
    let text = fs::read_to_string(&a.graph).with_context(|| format!("reading {}", a.graph.display()))?;
    let dump: GraphDump = bench::parse_json(&text, &a.graph)?;
    let g = RoadmapGraph::from_dump(&dump)?;
    let best = best_path(&g, &scenario);
    let svg = render_svg(&g, &scenario, best.as_ref().and_then(|q| q.path.as_ref()))?;
    write_file(&a.out, &svg)
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

//! Monte Carlo experiments: trials × planners on one scenario, per-trial and
//! aggregate CSV output, and SVG snapshots.
//!
//! Trial `t` of a paired experiment runs every planner on stream `t` of the
//! base seed, so all planners see the same sample sequence. Unpaired
//! experiments give each (trial, planner) pair its own stream. Results do not
//! depend on the thread count.

mod svg;

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::mpsc;

use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use svg::{render_svg, RenderError};

use crate::geometry::{Aabb, CostRegion, GeometryError, Point, Scenario};
use crate::graph::shortest_path;
use crate::planners::{log_spaced, plan, PlanError, PlannerSpec, RunTrace, Schedule};
use crate::presets;
use crate::sampling::RngStream;

/// Default number of logarithmically spaced checkpoints.
pub const DEFAULT_CHECKPOINTS: usize = 20;

pub const TRIALS_CSV_HEADER: &str = "planner,trial,iteration,best_cost,elapsed_s,collision_checks";
pub const AGGREGATE_CSV_HEADER: &str =
    "planner,iteration,trials,finite_count,mean_cost,variance,normalized_mean,mean_elapsed_s,runtime_ratio";

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}:{column}: {message}\n{context}")]
    Parse {
        path: PathBuf,
        line: usize,
        column: usize,
        message: String,
        context: String,
    },
    #[error("invalid experiment: {0}")]
    Config(String),
    #[error("planner {planner}, trial {trial}: {source}")]
    Plan {
        planner: String,
        trial: usize,
        #[source]
        source: PlanError,
    },
    #[error(transparent)]
    Render(#[from] RenderError),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> BenchError + '_ {
    move |source| BenchError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Parses JSON, reporting errors with the offending line and a caret.
pub fn parse_json<T: DeserializeOwned>(text: &str, path: &Path) -> Result<T, BenchError> {
    serde_json::from_str(text).map_err(|e| {
        let (line, column) = (e.line(), e.column());
        let src = text.lines().nth(line.saturating_sub(1)).unwrap_or("");
        let context = format!("{line:>5} | {src}\n      | {}^", " ".repeat(column.saturating_sub(1)));
        let message = e.to_string();
        let message = match message.rfind(" at line ") {
            Some(i) => message[..i].to_string(),
            None => message,
        };
        BenchError::Parse {
            path: path.to_path_buf(),
            line,
            column,
            message,
            context,
        }
    })
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, BenchError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    parse_json(&text, path)
}

/// A scenario file: the scenario plus optional metadata and planner.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "ScenarioFileDoc", into = "ScenarioFileDoc")]
pub struct ScenarioFile {
    pub name: Option<String>,
    pub scenario: Scenario,
    pub optimal_cost: Option<f64>,
    pub planner: Option<PlannerSpec>,
}

// Fields are listed rather than flattened so that parse errors inside them
// keep their line and column.
#[derive(Serialize, Deserialize)]
struct ScenarioFileDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    name: Option<String>,
    d: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    obstacles: Vec<Aabb>,
    x_init: Point,
    goal: Aabb,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    cost_regions: Vec<CostRegion>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    optimal_cost: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    planner: Option<PlannerSpec>,
}

impl TryFrom<ScenarioFileDoc> for ScenarioFile {
    type Error = GeometryError;

    fn try_from(doc: ScenarioFileDoc) -> Result<Self, Self::Error> {
        Ok(Self {
            name: doc.name,
            scenario: Scenario::new(doc.d, doc.obstacles, doc.x_init, doc.goal, doc.cost_regions)?,
            optimal_cost: doc.optimal_cost,
            planner: doc.planner,
        })
    }
}

impl From<ScenarioFile> for ScenarioFileDoc {
    fn from(f: ScenarioFile) -> Self {
        let s = f.scenario;
        Self {
            name: f.name,
            d: s.dim(),
            obstacles: s.obstacles().to_vec(),
            x_init: s.x_init().clone(),
            goal: s.goal().clone(),
            cost_regions: s.cost_regions().to_vec(),
            optimal_cost: f.optimal_cost,
            planner: f.planner,
        }
    }
}

pub fn load_scenario_file(path: &Path) -> Result<ScenarioFile, BenchError> {
    read_json(path)
}

/// Where an experiment's scenario comes from.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScenarioSource {
    /// A scenario file, relative to the experiment config.
    Path(PathBuf),
    /// A built-in scenario by name.
    Preset {
        preset: String,
    },
    Inline(Box<Scenario>),
}

/// A planner in an experiment, with an optional display name.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PlannerEntry {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(flatten)]
    pub spec: PlannerSpec,
}

impl PlannerEntry {
    pub fn label(&self) -> String {
        self.name.clone().unwrap_or_else(|| self.spec.label())
    }
}

impl From<PlannerSpec> for PlannerEntry {
    fn from(spec: PlannerSpec) -> Self {
        Self { name: None, spec }
    }
}

fn default_trials() -> usize {
    1
}

fn default_true() -> bool {
    true
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub scenario: ScenarioSource,
    pub planners: Vec<PlannerEntry>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    /// Iterations at which traces are recorded; defaults to
    /// [`DEFAULT_CHECKPOINTS`] log-spaced values per planner.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub checkpoints: Option<Vec<usize>>,
    #[serde(default = "default_true")]
    pub paired_seeds: bool,
    #[serde(default)]
    pub seed: u64,
    /// Worker threads; 0 uses every core.
    #[serde(default)]
    pub threads: usize,
    /// When false, elapsed times are written as 0 so repeated runs produce
    /// byte-identical files.
    #[serde(default = "default_true")]
    pub timing: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub optimal_cost: Option<f64>,
    /// Label of the planner runtime ratios are taken against (default: first).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub baseline: Option<String>,
    /// Iterations at which trial 0 of every planner is rendered to SVG.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub snapshots: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(scenario: Scenario, planners: Vec<PlannerEntry>, trials: usize) -> Self {
        Self {
            scenario: ScenarioSource::Inline(Box::new(scenario)),
            planners,
            trials,
            checkpoints: None,
            paired_seeds: true,
            seed: 0,
            threads: 0,
            timing: true,
            optimal_cost: None,
            baseline: None,
            snapshots: Vec::new(),
            output: None,
        }
    }

    pub fn load(path: &Path) -> Result<Self, BenchError> {
        let mut config: Self = read_json(path)?;
        if let ScenarioSource::Path(p) = &config.scenario {
            if p.is_relative() {
                let base = path.parent().unwrap_or(Path::new("."));
                config.scenario = ScenarioSource::Path(base.join(p));
            }
        }
        Ok(config)
    }

    /// The scenario and its optimal cost, if known from the config, the
    /// scenario file, or the preset.
    pub fn resolve_scenario(&self) -> Result<(Scenario, Option<f64>), BenchError> {
        let (scenario, known) = match &self.scenario {
            ScenarioSource::Path(p) => {
                let file = load_scenario_file(p)?;
                (file.scenario, file.optimal_cost)
            }
            ScenarioSource::Preset { preset } => {
                let p = presets::by_name(preset).ok_or_else(|| {
                    BenchError::Config(format!(
                        "unknown preset {preset:?}; known presets: {}",
                        presets::NAMES.join(", ")
                    ))
                })?;
                (p.scenario, p.optimal_cost)
            }
            ScenarioSource::Inline(s) => ((**s).clone(), None),
        };
        Ok((scenario, self.optimal_cost.or(known)))
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        if self.trials == 0 {
            return Err(BenchError::Config("trials must be at least 1".into()));
        }
        if self.planners.is_empty() {
            return Err(BenchError::Config("no planners listed".into()));
        }
        let labels = self.labels();
        for (i, l) in labels.iter().enumerate() {
            if labels[..i].contains(l) {
                return Err(BenchError::Config(format!(
                    "duplicate planner label {l:?}; set distinct \"name\" fields"
                )));
            }
        }
        for e in &self.planners {
            e.spec
                .validate()
                .map_err(|err| BenchError::Config(format!("{}: {err}", e.label())))?;
        }
        if let Some(b) = &self.baseline {
            if !labels.contains(b) {
                return Err(BenchError::Config(format!("baseline {b:?} is not a planner label")));
            }
        }
        if let Some(cps) = &self.checkpoints {
            let max_n = self.planners.iter().map(|e| e.spec.n).max().unwrap_or(0);
            if let Some(bad) = cps.iter().find(|&&c| c < 1 || c > max_n) {
                return Err(BenchError::Config(format!("checkpoint {bad} outside [1, {max_n}]")));
            }
        }
        Ok(())
    }

    pub fn labels(&self) -> Vec<String> {
        self.planners.iter().map(PlannerEntry::label).collect()
    }

    fn schedule_for(&self, spec: &PlannerSpec) -> Schedule {
        match &self.checkpoints {
            Some(cps) => Schedule::At(cps.clone()),
            None => Schedule::At(log_spaced(spec.n, DEFAULT_CHECKPOINTS)),
        }
    }

    fn stream_for(&self, trial: usize, planner: usize) -> RngStream {
        let stream = if self.paired_seeds {
            trial as u64
        } else {
            (trial * self.planners.len() + planner) as u64
        };
        RngStream::derive(self.seed, stream)
    }
}

/// One planner's trace in one trial.
#[derive(Clone, Debug)]
pub struct TrialRecord {
    pub trial: usize,
    pub planner: usize,
    pub label: String,
    pub trace: RunTrace,
}

impl TrialRecord {
    fn csv_lines(&self, out: &mut impl Write) -> std::io::Result<()> {
        for p in &self.trace.points {
            writeln!(
                out,
                "{},{},{},{},{},{}",
                self.label, self.trial, p.iteration, p.best_cost, p.elapsed_s, p.collision_checks
            )?;
        }
        Ok(())
    }
}

/// Runs one trial of every planner.
pub fn run_trial(scenario: &Scenario, config: &ExperimentConfig, trial: usize) -> Result<Vec<TrialRecord>, BenchError> {
    config
        .planners
        .iter()
        .enumerate()
        .map(|(i, entry)| {
            let mut rng = config.stream_for(trial, i);
            let out = plan(scenario, &entry.spec, &mut rng, &config.schedule_for(&entry.spec)).map_err(|source| {
                BenchError::Plan {
                    planner: entry.label(),
                    trial,
                    source,
                }
            })?;
            let mut trace = out.trace;
            if !config.timing {
                for p in &mut trace.points {
                    p.elapsed_s = 0.0;
                }
            }
            Ok(TrialRecord {
                trial,
                planner: i,
                label: entry.label(),
                trace,
            })
        })
        .collect()
}

/// Runs every trial in parallel and returns the records ordered by trial,
/// then planner. `on_trial` sees each trial's records as soon as it finishes.
pub fn run_trials(
    scenario: &Scenario,
    config: &ExperimentConfig,
    on_trial: impl Fn(usize, &[TrialRecord]) + Sync,
) -> Result<Vec<TrialRecord>, BenchError> {
    config.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.threads)
        .build()
        .map_err(|e| BenchError::Config(format!("thread pool: {e}")))?;
    let per_trial: Vec<Vec<TrialRecord>> = pool.install(|| {
        (0..config.trials)
            .into_par_iter()
            .map(|t| {
                let records = run_trial(scenario, config, t)?;
                on_trial(t, &records);
                Ok(records)
            })
            .collect::<Result<_, BenchError>>()
    })?;
    Ok(per_trial.into_iter().flatten().collect())
}

/// Statistics of one planner at one checkpoint.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AggregateRow {
    pub planner: String,
    pub iteration: usize,
    pub trials: usize,
    /// Trials that had found a solution by this iteration.
    pub finite_count: usize,
    /// Mean over the finite costs; NaN when there are none.
    pub mean_cost: f64,
    /// Sample variance over the finite costs; 0 with fewer than two.
    pub variance: f64,
    pub normalized_mean: Option<f64>,
    pub mean_elapsed_s: f64,
    /// Mean elapsed time over the baseline planner's at the same iteration.
    pub runtime_ratio: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AggregateReport {
    pub optimal_cost: Option<f64>,
    pub baseline: String,
    pub rows: Vec<AggregateRow>,
}

impl AggregateReport {
    /// Aggregates `records` per planner label (in `labels` order) and iteration.
    pub fn from_records(
        records: &[TrialRecord],
        labels: &[String],
        optimal_cost: Option<f64>,
        baseline: Option<&str>,
    ) -> Self {
        let baseline = baseline
            .map(str::to_string)
            .or_else(|| labels.first().cloned())
            .unwrap_or_default();
        let mut rows = Vec::new();
        for label in labels {
            let mut by_iter: BTreeMap<usize, Vec<(f64, f64)>> = BTreeMap::new();
            let mut mine: Vec<&TrialRecord> = records.iter().filter(|r| &r.label == label).collect();
            mine.sort_by_key(|r| r.trial);
            for r in mine {
                for p in &r.trace.points {
                    by_iter.entry(p.iteration).or_default().push((p.best_cost, p.elapsed_s));
                }
            }
            for (iteration, vals) in by_iter {
                let finite: Vec<f64> = vals.iter().map(|v| v.0).filter(|c| c.is_finite()).collect();
                let (mean, variance) = mean_and_variance(&finite);
                let mean_elapsed = vals.iter().map(|v| v.1).sum::<f64>() / vals.len() as f64;
                rows.push(AggregateRow {
                    planner: label.clone(),
                    iteration,
                    trials: vals.len(),
                    finite_count: finite.len(),
                    mean_cost: mean,
                    variance,
                    normalized_mean: optimal_cost.map(|c| mean / c),
                    mean_elapsed_s: mean_elapsed,
                    runtime_ratio: None,
                });
            }
        }
        let base: BTreeMap<usize, f64> = rows
            .iter()
            .filter(|r| r.planner == baseline)
            .map(|r| (r.iteration, r.mean_elapsed_s))
            .collect();
        for r in &mut rows {
            r.runtime_ratio = base
                .get(&r.iteration)
                .filter(|&&b| b > 0.0)
                .map(|b| r.mean_elapsed_s / b);
        }
        Self {
            optimal_cost,
            baseline,
            rows,
        }
    }

    pub fn row(&self, planner: &str, iteration: usize) -> Option<&AggregateRow> {
        self.rows
            .iter()
            .find(|r| r.planner == planner && r.iteration == iteration)
    }

    pub fn series(&self, planner: &str) -> Vec<&AggregateRow> {
        self.rows.iter().filter(|r| r.planner == planner).collect()
    }

    pub fn write_csv(&self, out: &mut impl Write) -> std::io::Result<()> {
        writeln!(out, "{AGGREGATE_CSV_HEADER}")?;
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                r.planner,
                r.iteration,
                r.trials,
                r.finite_count,
                r.mean_cost,
                r.variance,
                opt(r.normalized_mean),
                r.mean_elapsed_s,
                opt(r.runtime_ratio)
            )?;
        }
        Ok(())
    }
}

/// Mean and sample variance; `(NaN, 0)` for no values.
pub fn mean_and_variance(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, 0.0);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var)
}

/// First line of every output file.
pub fn file_header(seed: u64) -> String {
    format!("# samplan {} seed={seed}", env!("CARGO_PKG_VERSION"))
}

/// What [`run_experiment`] produced.
#[derive(Debug)]
pub struct ExperimentOutput {
    pub report: AggregateReport,
    pub records: Vec<TrialRecord>,
    pub files: Vec<PathBuf>,
}

/// Runs the experiment and writes `trials.csv`, `aggregate.csv` and the
/// requested SVG snapshots into `out_dir`. Per-trial rows are appended in
/// trial order as trials complete, so an interrupted run leaves a valid
/// prefix behind.
pub fn run_experiment(config: &ExperimentConfig, out_dir: &Path) -> Result<ExperimentOutput, BenchError> {
    config.validate()?;
    let (scenario, optimal) = config.resolve_scenario()?;
    fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;
    let trials_path = out_dir.join("trials.csv");
    let file = File::create(&trials_path).map_err(io_err(&trials_path))?;
    let mut writer = BufWriter::new(file);
    let header = file_header(config.seed);
    writeln!(writer, "{header}\n{TRIALS_CSV_HEADER}")
        .and_then(|_| writer.flush())
        .map_err(io_err(&trials_path))?;

    let (tx, rx) = mpsc::channel::<(usize, Vec<TrialRecord>)>();
    let records = std::thread::scope(|scope| {
        let path = trials_path.clone();
        let sink = scope.spawn(move || -> Result<(), BenchError> {
            let mut pending = BTreeMap::new();
            let mut next = 0;
            for (t, recs) in rx {
                pending.insert(t, recs);
                while let Some(recs) = pending.remove(&next) {
                    for r in &recs {
                        r.csv_lines(&mut writer).map_err(io_err(&path))?;
                    }
                    writer.flush().map_err(io_err(&path))?;
                    next += 1;
                }
            }
            Ok(())
        });
        let tx = std::sync::Mutex::new(tx);
        let result = run_trials(&scenario, config, |t, recs| {
            let _ = tx.lock().expect("sender lock").send((t, recs.to_vec()));
        });
        drop(tx);
        let written = sink.join().expect("writer thread panicked");
        let records = result?;
        written.map(|_| records)
    })?;

    let labels = config.labels();
    let report = AggregateReport::from_records(&records, &labels, optimal, config.baseline.as_deref());
    let agg_path = out_dir.join("aggregate.csv");
    let mut agg = BufWriter::new(File::create(&agg_path).map_err(io_err(&agg_path))?);
    writeln!(agg, "{header}")
        .and_then(|_| report.write_csv(&mut agg))
        .and_then(|_| agg.flush())
        .map_err(io_err(&agg_path))?;

    let mut files = vec![trials_path, agg_path];
    if !config.snapshots.is_empty() && scenario.dim() == 2 {
        let dir = out_dir.join("snapshots");
        fs::create_dir_all(&dir).map_err(io_err(&dir))?;
        for (i, entry) in config.planners.iter().enumerate() {
            for &m in &config.snapshots {
                if m > entry.spec.n {
                    continue;
                }
                let svg = snapshot(&scenario, config, i, m)?;
                let name = format!("{}_trial0_n{m}.svg", sanitize(&entry.label()));
                let path = dir.join(name);
                fs::write(&path, svg).map_err(io_err(&path))?;
                files.push(path);
            }
        }
    }
    Ok(ExperimentOutput { report, records, files })
}

/// Trial 0 of planner `i` rerun with budget `m`; incremental planners and
/// batch sample prefixes make this the state at iteration `m`.
fn snapshot(scenario: &Scenario, config: &ExperimentConfig, i: usize, m: usize) -> Result<String, BenchError> {
    let entry = &config.planners[i];
    let mut spec = entry.spec.clone();
    spec.n = m;
    let mut rng = config.stream_for(0, i);
    let out = plan(scenario, &spec, &mut rng, &Schedule::At(vec![m])).map_err(|source| BenchError::Plan {
        planner: entry.label(),
        trial: 0,
        source,
    })?;
    let best = if out.graph.vertex_count() > 0 {
        shortest_path(&out.graph, 0, |p| scenario.in_goal(p.coords()))
            .expect("root exists")
            .path
    } else {
        None
    };
    Ok(render_svg(&out.graph, scenario, best.as_ref())?)
}

fn sanitize(label: &str) -> String {
    label
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' { c } else { '_' })
        .collect()
}

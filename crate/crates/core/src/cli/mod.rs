//! `replan` command-line surface.
//!
//! Exit codes: 0 on success, 2 for usage or validation errors, 3 when a
//! computation produces a non-finite value.

pub mod svg;

use std::fs::{File, OpenOptions};
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use crate::analytic::{self, CompletionStats, Objective, SweepPoint, SystemConfig};
use crate::distribution::ServiceDistribution;
use crate::monte_carlo::{self, Execution, SimulationSpec, SimulationSummary};
use crate::replication::{AssignmentPlan, BatchingPlan, DatasetSpec, PlanFile};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Model(#[from] crate::error::Error),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Numerical(_) => 3,
            _ => 2,
        }
    }
}

type CliResult<T = ()> = Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(
    name = "replan",
    version,
    about = "Plan data replication for master-worker jobs with stragglers"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closed-form completion-time mean and variance for one batch count.
    Analyze(AnalyzeArgs),
    /// Closed-form statistics over every feasible batch count.
    Sweep(SweepArgs),
    /// Best batch count for the chosen objective.
    Optimize(OptimizeArgs),
    /// Monte Carlo estimate for a balanced or file-supplied plan.
    Simulate(SimulateArgs),
    /// Compare plans under common random numbers.
    Compare(CompareArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DistKind {
    /// Exponential(mu)
    Exp,
    /// Shifted exponential(mu, delta)
    Sexp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Default)]
pub enum OutputFormat {
    #[default]
    Csv,
    /// CSV plus an SVG chart next to it
    Svg,
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    /// Number of workers W
    #[arg(long)]
    pub workers: Option<usize>,
    /// Number of data samples D (defaults to W)
    #[arg(long)]
    pub samples: Option<usize>,
    /// Per-sample service-time family
    #[arg(long, value_enum)]
    pub dist: DistKind,
    /// Service rate; repeat in `sweep` for several curves
    #[arg(long, required = true)]
    pub mu: Vec<f64>,
    /// Shift (minimum service time) for `sexp`; repeat in `sweep`
    #[arg(long)]
    pub delta: Vec<f64>,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub batches: usize,
    /// Append a CSV row (B, mean, variance, mu, delta)
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// CSV destination; stdout when omitted
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t)]
    pub format: OutputFormat,
}

#[derive(Debug, Args)]
pub struct OptimizeArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, value_enum, default_value = "mean")]
    pub objective: Objective,
    /// Sweep CSV destination
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimArgs {
    #[arg(long, default_value_t = 100_000)]
    pub trials: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Run trials on one thread (output is identical either way)
    #[arg(long)]
    pub serial: bool,
}

impl SimArgs {
    fn execution(&self) -> Execution {
        if self.serial {
            Execution::Serial
        } else {
            Execution::Parallel
        }
    }
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub sim: SimArgs,
    /// Balanced plan with this many batches
    #[arg(long, conflicts_with = "plan_file")]
    pub batches: Option<usize>,
    /// JSON plan: {"num_samples", "batches", "worker_to_batch"}
    #[arg(long)]
    pub plan_file: Option<PathBuf>,
    /// Append a CSV row (B, trials, seed, mean, variance, std_error)
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub sim: SimArgs,
    /// Plan files to compare; give at least two
    #[arg(long = "plan-file")]
    pub plan_files: Vec<PathBuf>,
    /// Per-plan CSV; pairwise differences go to `<stem>.pairs.csv`
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl ModelArgs {
    fn build(&self, rate: f64, shift: Option<f64>) -> CliResult<ServiceDistribution> {
        match (self.dist, shift) {
            (DistKind::Exp, None) => Ok(ServiceDistribution::exponential(rate)?),
            (DistKind::Exp, Some(_)) => Err(CliError::Usage(
                "--delta is only meaningful with --dist sexp".into(),
            )),
            (DistKind::Sexp, Some(d)) => Ok(ServiceDistribution::shifted_exponential(rate, d)?),
            (DistKind::Sexp, None) => Err(CliError::Usage("--dist sexp requires --delta".into())),
        }
    }

    /// Service laws paired from `--mu`/`--delta`; a single value broadcasts.
    pub fn distributions(&self) -> CliResult<Vec<ServiceDistribution>> {
        let (m, d) = (self.mu.len(), self.delta.len());
        if d == 0 {
            return self.mu.iter().map(|&mu| self.build(mu, None)).collect();
        }
        let n = m.max(d);
        if !(m == n || m == 1) || !(d == n || d == 1) {
            return Err(CliError::Usage(format!(
                "cannot pair {m} --mu values with {d} --delta values"
            )));
        }
        (0..n)
            .map(|i| {
                let mu = self.mu[if m == 1 { 0 } else { i }];
                let delta = self.delta[if d == 1 { 0 } else { i }];
                self.build(mu, Some(delta))
            })
            .collect()
    }

    pub fn distribution(&self) -> CliResult<ServiceDistribution> {
        let mut all = self.distributions()?;
        if all.len() != 1 {
            return Err(CliError::Usage(
                "this command takes a single --mu/--delta pair".into(),
            ));
        }
        Ok(all.remove(0))
    }

    pub fn sizes(&self) -> CliResult<(usize, usize)> {
        let w = self
            .workers
            .ok_or_else(|| CliError::Usage("--workers is required".into()))?;
        let d = self.samples.unwrap_or(w);
        if w == 0 || d == 0 {
            return Err(CliError::Usage(
                "--workers and --samples must be positive".into(),
            ));
        }
        Ok((d, w))
    }
}

fn finite(what: &str, values: &[f64]) -> CliResult {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(CliError::Numerical(format!(
            "{what} is not finite: {values:?}"
        )))
    }
}

fn check_stats(stats: &CompletionStats) -> CliResult {
    finite("completion statistics", &[stats.mean, stats.variance])
}

fn check_summary(s: &SimulationSummary) -> CliResult {
    finite("simulation summary", &[s.mean, s.variance, s.std_error])
}

/// Opens `path` for appending; returns whether a header is still needed.
fn open_append(path: &Path) -> CliResult<(File, bool)> {
    let file = OpenOptions::new().create(true).append(true).open(path)?;
    let empty = file.metadata()?.len() == 0;
    Ok((file, empty))
}

fn sweep_header() -> [&'static str; 5] {
    ["B", "mean", "variance", "mu", "delta"]
}

fn sweep_record(b: usize, stats: &CompletionStats, dist: &ServiceDistribution) -> [String; 5] {
    [
        b.to_string(),
        stats.mean.to_string(),
        stats.variance.to_string(),
        dist.rate().to_string(),
        dist.shift().to_string(),
    ]
}

fn write_sweep_csv<W: Write>(
    sink: W,
    curves: &[(ServiceDistribution, Vec<SweepPoint>)],
) -> CliResult {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(sweep_header())?;
    for (dist, points) in curves {
        for p in points {
            w.write_record(sweep_record(p.num_batches, &p.stats, dist))?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn run(cli: Cli, out: &mut dyn Write) -> CliResult {
    match cli.command {
        Command::Analyze(args) => analyze(args, out),
        Command::Sweep(args) => sweep(args, out),
        Command::Optimize(args) => optimize(args, out),
        Command::Simulate(args) => simulate(args, out),
        Command::Compare(args) => compare(args, out),
    }
}

fn analyze(args: AnalyzeArgs, out: &mut dyn Write) -> CliResult {
    let (d, w) = args.model.sizes()?;
    let dist = args.model.distribution()?;
    let config = SystemConfig::new(d, w, dist, args.batches)?;
    let stats = analytic::completion_stats_balanced(&config)?;
    check_stats(&stats)?;
    writeln!(out, "D={d} W={w} B={} {dist}", args.batches)?;
    writeln!(out, "mean: {}", stats.mean)?;
    writeln!(out, "variance: {}", stats.variance)?;
    if let Some(path) = args.out {
        let (file, header) = open_append(&path)?;
        let mut csv = csv::Writer::from_writer(file);
        if header {
            csv.write_record(sweep_header())?;
        }
        csv.write_record(sweep_record(args.batches, &stats, &dist))?;
        csv.flush()?;
    }
    Ok(())
}

fn sweep(args: SweepArgs, out: &mut dyn Write) -> CliResult {
    let (d, w) = args.model.sizes()?;
    let mut curves = Vec::new();
    for dist in args.model.distributions()? {
        let points = analytic::sweep(d, w, dist)?;
        for p in &points {
            check_stats(&p.stats)?;
        }
        curves.push((dist, points));
    }
    let Some(path) = args.out else {
        if args.format == OutputFormat::Svg {
            return Err(CliError::Usage("--format svg requires --out".into()));
        }
        return write_sweep_csv(out, &curves);
    };
    write_sweep_csv(File::create(&path)?, &curves)?;
    for (dist, points) in &curves {
        let best = points
            .iter()
            .reduce(|a, b| if b.stats.mean < a.stats.mean { b } else { a })
            .expect("B=1 is always feasible");
        writeln!(
            out,
            "{dist}: argmin_B={} mean={}",
            best.num_batches, best.stats.mean
        )?;
    }
    writeln!(out, "wrote {}", path.display())?;
    if args.format == OutputFormat::Svg {
        let series: Vec<svg::Series> = curves
            .iter()
            .map(|(dist, points)| svg::Series {
                label: dist.to_string(),
                points: points
                    .iter()
                    .map(|p| (p.num_batches as f64, p.stats.mean))
                    .collect(),
            })
            .collect();
        let chart = svg::line_chart(
            &series,
            &format!("Expected completion time (D={d}, W={w})"),
            "number of batches B",
            "expected completion time",
        );
        let svg_path = path.with_extension("svg");
        std::fs::write(&svg_path, chart)?;
        writeln!(out, "wrote {}", svg_path.display())?;
    }
    Ok(())
}

fn optimize(args: OptimizeArgs, out: &mut dyn Write) -> CliResult {
    let (d, w) = args.model.sizes()?;
    let dist = args.model.distribution()?;
    let opt = analytic::optimize_redundancy(d, w, dist, args.objective)?;
    for p in &opt.sweep {
        check_stats(&p.stats)?;
    }
    writeln!(out, "D={d} W={w} {dist} objective={:?}", args.objective)?;
    writeln!(out, "best_B: {}", opt.best_batches)?;
    writeln!(out, "best_value: {}", opt.best_value)?;
    match args.out {
        Some(path) => {
            write_sweep_csv(File::create(&path)?, &[(dist, opt.sweep)])?;
            writeln!(out, "wrote {}", path.display())?;
        }
        None => write_sweep_csv(&mut *out, &[(dist, opt.sweep)])?,
    }
    Ok(())
}

fn load_plan(path: &Path) -> CliResult<(BatchingPlan, AssignmentPlan)> {
    Ok(PlanFile::load(path)?.into_plans()?)
}

fn simulate(args: SimulateArgs, out: &mut dyn Write) -> CliResult {
    let dist = args.model.distribution()?;
    let (batching, assignment) = match (&args.plan_file, args.batches) {
        (Some(path), _) => load_plan(path)?,
        (None, Some(b)) => {
            let (d, w) = args.model.sizes()?;
            let batching = BatchingPlan::non_overlapping(DatasetSpec::new(d)?, b)?;
            let assignment = AssignmentPlan::balanced(&batching, w)?;
            (batching, assignment)
        }
        (None, None) => {
            return Err(CliError::Usage(
                "simulate needs --batches or --plan-file".into(),
            ))
        }
    };
    let num_batches = batching.num_batches();
    let spec = SimulationSpec::new(batching, assignment, dist, args.sim.trials, args.sim.seed)?;
    let summary = monte_carlo::simulate_completion_with(&spec, args.sim.execution())?;
    check_summary(&summary)?;
    writeln!(
        out,
        "D={} W={} B={num_batches} {dist}",
        spec.batching.num_samples(),
        spec.assignment.num_workers()
    )?;
    writeln!(out, "trials: {}", summary.trials)?;
    writeln!(out, "seed: {}", summary.seed)?;
    writeln!(out, "mean: {}", summary.mean)?;
    writeln!(out, "variance: {}", summary.variance)?;
    writeln!(out, "std_error: {}", summary.std_error)?;
    if let Some(path) = args.out {
        let (file, header) = open_append(&path)?;
        let mut csv = csv::Writer::from_writer(file);
        if header {
            csv.write_record(["B", "trials", "seed", "mean", "variance", "std_error"])?;
        }
        csv.write_record([
            num_batches.to_string(),
            summary.trials.to_string(),
            summary.seed.to_string(),
            summary.mean.to_string(),
            summary.variance.to_string(),
            summary.std_error.to_string(),
        ])?;
        csv.flush()?;
    }
    Ok(())
}

fn compare(args: CompareArgs, out: &mut dyn Write) -> CliResult {
    if args.plan_files.len() < 2 {
        return Err(CliError::Usage(format!(
            "compare needs at least 2 --plan-file arguments, got {}",
            args.plan_files.len()
        )));
    }
    let dist = args.model.distribution()?;
    let specs = args
        .plan_files
        .iter()
        .map(|path| {
            let (batching, assignment) = load_plan(path)?;
            Ok(SimulationSpec::new(
                batching,
                assignment,
                dist,
                args.sim.trials,
                args.sim.seed,
            )?)
        })
        .collect::<CliResult<Vec<_>>>()?;
    let cmp = monte_carlo::compare_policies_with(&specs, args.sim.seed, args.sim.execution())?;
    for s in &cmp.summaries {
        check_summary(s)?;
    }
    let ids: Vec<String> = args
        .plan_files
        .iter()
        .map(|p| p.display().to_string())
        .collect();
    let best = cmp.best();

    writeln!(
        out,
        "{dist} trials={} seed={}",
        args.sim.trials, args.sim.seed
    )?;
    writeln!(out, "plan_id,mean,std_error,best")?;
    for (i, s) in cmp.summaries.iter().enumerate() {
        let flag = if i == best { "*" } else { "" };
        writeln!(out, "{},{},{},{flag}", ids[i], s.mean, s.std_error)?;
    }
    writeln!(out, "plan_a,plan_b,diff,ci_lo,ci_hi")?;
    for p in &cmp.pairs {
        writeln!(
            out,
            "{},{},{},{},{}",
            ids[p.a], ids[p.b], p.mean_diff, p.ci_lo, p.ci_hi
        )?;
    }
    writeln!(out, "empirical minimizer: {}", ids[best])?;

    if let Some(path) = args.out {
        let mut plans = csv::Writer::from_path(&path)?;
        plans.write_record(["plan_id", "mean", "std_error"])?;
        for (i, s) in cmp.summaries.iter().enumerate() {
            plans.write_record([ids[i].clone(), s.mean.to_string(), s.std_error.to_string()])?;
        }
        plans.flush()?;
        let pairs_path = path.with_extension("pairs.csv");
        let mut pairs = csv::Writer::from_path(&pairs_path)?;
        pairs.write_record(["plan_a", "plan_b", "diff", "ci_lo", "ci_hi"])?;
        for p in &cmp.pairs {
            pairs.write_record([
                ids[p.a].clone(),
                ids[p.b].clone(),
                p.mean_diff.to_string(),
                p.ci_lo.to_string(),
                p.ci_hi.to_string(),
            ])?;
        }
        pairs.flush()?;
    }
    Ok(())
}

//! Scenario runner behind the `ace` binary.
//!
//! Exit codes: 0 success, 1 usage or I/O error, 2 infeasible model.

pub mod config;
pub mod output;
pub mod scenario;

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use ace_core::baselines::{accuracy_only_plan, fixed_rate_plan};
use ace_core::exact::{solve_offline_exact_with, ExactConfig, DEFAULT_SEARCH_LIMIT};
use ace_core::heuristic::aps_offline;
use ace_core::schema::{load_instance, SchemaError};
use ace_core::sim::sweep::{sweep_ab_with, sweep_csv, SolverChoice};
use ace_core::sim::{ScenarioResult, ScenarioSummary, SimError};
use ace_core::{
    accuracy_term, check_feasibility, cost_term, objective_value, InstanceError, ProblemInstance, SamplingPlan, SolveError,
    Violation,
};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use thiserror::Error;

use config::ScenarioConfig;
use output::{to_json, write_atomic};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Schema(#[from] SchemaError),
    #[error(transparent)]
    Instance(#[from] InstanceError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("plan is infeasible: {0}")]
    Infeasible(String),
    /// A failure that still produced output for stdout.
    #[error("{source}")]
    Reported { stdout: String, source: Box<CliError> },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Infeasible(_) => 2,
            CliError::Solve(e) if e.is_infeasibility() => 2,
            CliError::Reported { source, .. } => source.exit_code(),
            _ => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "ace", version, about = "Plan and evaluate flow sampling across SDN switches")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve one instance file and write the plan with its feasibility report.
    Solve(SolveArgs),
    /// Re-solve an instance across a list of a:b weightings.
    Sweep(SweepArgs),
    /// Replay APS, fixed-rate, Payless-style and SOD-style plans on identical traffic.
    Compare(CompareArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SolverArg {
    Exact,
    Aps,
    Fixed,
    AccuracyOnly,
}

impl SolverArg {
    fn name(self) -> &'static str {
        match self {
            SolverArg::Exact => "exact",
            SolverArg::Aps => "aps",
            SolverArg::Fixed => "fixed",
            SolverArg::AccuracyOnly => "accuracy-only",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepSolverArg {
    Auto,
    Exact,
    Aps,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[arg(long)]
    pub instance: PathBuf,
    #[arg(long, value_enum)]
    pub solver: SolverArg,
    /// Largest search space the exact solver will attempt.
    #[arg(long)]
    pub search_limit: Option<f64>,
    /// Rate of the fixed solver; defaults to the largest offered rate.
    #[arg(long)]
    pub fixed_rate: Option<f64>,
    /// Directory for plan.json; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Flags shared by the scenario commands. Each overrides the config file.
#[derive(Debug, Default, Args)]
pub struct ScenarioArgs {
    /// TOML scenario file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub topology: Option<String>,
    #[arg(long)]
    pub pairs: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Number of consecutive seeds starting at --seed.
    #[arg(long)]
    pub seeds: Option<u64>,
    #[arg(long)]
    pub loss: Option<f64>,
    #[arg(long)]
    pub horizon: Option<usize>,
    /// Comma-separated a:b weightings.
    #[arg(long)]
    pub ratios: Option<String>,
}

impl ScenarioArgs {
    /// Config file (or defaults) with flags applied, plus the directory
    /// relative paths in the config resolve against.
    pub fn resolve(&self) -> Result<(ScenarioConfig, Option<PathBuf>), CliError> {
        let (mut cfg, base) = match &self.config {
            Some(p) => (ScenarioConfig::load(p)?, p.parent().map(Path::to_path_buf)),
            None => (ScenarioConfig::default(), None),
        };
        if let Some(t) = &self.topology {
            cfg.topology = t.clone();
        }
        if let Some(v) = self.pairs {
            cfg.pairs = v;
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = self.seeds {
            cfg.seeds = v;
        }
        if let Some(v) = self.loss {
            cfg.loss = v;
        }
        if let Some(v) = self.horizon {
            cfg.horizon = v;
        }
        if let Some(v) = &self.ratios {
            cfg.ratios = v.clone();
        }
        cfg.validate()?;
        // flags name files relative to the working directory
        let base = if self.topology.is_some() { None } else { base };
        Ok((cfg, base))
    }
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Instance file; without it a random scenario is generated.
    #[arg(long)]
    pub instance: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "auto")]
    pub solver: SweepSolverArg,
    #[arg(long)]
    pub search_limit: Option<f64>,
    /// Directory for sweep.csv; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub scenario: ScenarioArgs,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// Directory for compare.csv and summary.json; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write each run's per-link series under <out>/series/.
    #[arg(long, requires = "out")]
    pub series: bool,
    #[command(flatten)]
    pub scenario: ScenarioArgs,
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit code; everything user-facing goes to the writers.
pub fn main_with<I, T>(args: I, stdout: &mut dyn std::io::Write, stderr: &mut dyn std::io::Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let rendered = e.render().to_string();
            let _ = if code == 0 {
                write!(stdout, "{rendered}")
            } else {
                write!(stderr, "{rendered}")
            };
            return code;
        }
    };
    match run(&cli.command) {
        Ok(text) => {
            let _ = stdout.write_all(text.as_bytes());
            0
        }
        Err(e) => {
            if let CliError::Reported { stdout: text, .. } = &e {
                let _ = stdout.write_all(text.as_bytes());
            }
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

/// Runs a command, returning what it prints on success.
pub fn run(command: &Command) -> Result<String, CliError> {
    match command {
        Command::Solve(a) => cmd_solve(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Compare(a) => cmd_compare(a),
    }
}

#[derive(Debug, Serialize)]
pub struct FlowSamples {
    pub flow: usize,
    pub switches: Vec<usize>,
    pub rate: f64,
}

#[derive(Debug, Serialize)]
pub struct SolveReport {
    pub solver: &'static str,
    pub feasible: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub objective: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub accuracy_term: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cost_term: Option<f64>,
    pub samples: Vec<FlowSamples>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub plan: Option<SamplingPlan>,
    pub violations: Vec<Violation>,
}

fn exact_config(limit: Option<f64>) -> ExactConfig {
    ExactConfig {
        search_limit: limit.unwrap_or(DEFAULT_SEARCH_LIMIT),
    }
}

fn solve_plan(inst: &ProblemInstance, args: &SolveArgs) -> Result<SamplingPlan, CliError> {
    Ok(match args.solver {
        SolverArg::Exact => solve_offline_exact_with(inst, &exact_config(args.search_limit))?.plan,
        SolverArg::Aps => aps_offline(inst)?,
        SolverArg::AccuracyOnly => accuracy_only_plan(inst)?,
        SolverArg::Fixed => {
            let rate = args
                .fixed_rate
                .unwrap_or_else(|| inst.flows().iter().map(|f| f.offered_rate).fold(0.0, f64::max));
            fixed_rate_plan(inst, rate)?.plan
        }
    })
}

pub fn cmd_solve(args: &SolveArgs) -> Result<String, CliError> {
    let inst = load_instance(&args.instance)?;
    let (report, failure) = match solve_plan(&inst, args) {
        Ok(plan) => {
            let violations = check_feasibility(&plan, &inst)?;
            let samples = inst
                .flows()
                .iter()
                .map(|f| FlowSamples {
                    flow: f.id.0,
                    switches: plan.switches_of(f.id).map(|s| s.0).collect(),
                    rate: plan.rate[f.id.0],
                })
                .collect();
            let failure = (!violations.is_empty()).then(|| CliError::Infeasible(format!("{} violation(s)", violations.len())));
            let report = SolveReport {
                solver: args.solver.name(),
                feasible: violations.is_empty(),
                error: None,
                objective: Some(objective_value(&plan, &inst)?),
                accuracy_term: Some(accuracy_term(&plan, &inst)?),
                cost_term: Some(cost_term(&plan, &inst)?),
                samples,
                plan: Some(plan),
                violations,
            };
            (report, failure)
        }
        Err(CliError::Solve(e)) if e.is_infeasibility() => {
            let report = SolveReport {
                solver: args.solver.name(),
                feasible: false,
                error: Some(e.to_string()),
                objective: None,
                accuracy_term: None,
                cost_term: None,
                samples: Vec::new(),
                plan: None,
                violations: match &e {
                    SolveError::InfeasibleBase(v) => v.clone(),
                    _ => Vec::new(),
                },
            };
            (report, Some(CliError::Solve(e)))
        }
        Err(e) => return Err(e),
    };
    let json = to_json(&report);
    let printed = match &args.out {
        Some(dir) => {
            write_atomic(&dir.join("plan.json"), &json)?;
            format!("{} plan written to {}\n", args.solver.name(), dir.join("plan.json").display())
        }
        None => json,
    };
    match failure {
        Some(e) => Err(CliError::Reported {
            stdout: printed,
            source: Box::new(e),
        }),
        None => Ok(printed),
    }
}

pub fn cmd_sweep(args: &SweepArgs) -> Result<String, CliError> {
    let (cfg, base) = args.scenario.resolve()?;
    let ratios = cfg.ratio_list()?;
    let inst = match &args.instance {
        Some(p) => load_instance(p)?,
        None => {
            let topo = scenario::topology(&cfg, base.as_deref())?;
            scenario::instance(&cfg, &topo, cfg.seed)?
        }
    };
    let choice = match args.solver {
        SweepSolverArg::Auto => SolverChoice::Auto,
        SweepSolverArg::Exact => SolverChoice::Exact,
        SweepSolverArg::Aps => SolverChoice::Aps,
    };
    let rows = sweep_ab_with(&inst, &ratios, choice, &exact_config(args.search_limit))?;
    let csv = sweep_csv(&rows);
    match &args.out {
        Some(dir) => {
            let path = dir.join("sweep.csv");
            write_atomic(&path, &csv)?;
            Ok(format!("{} rows written to {}\n", rows.len(), path.display()))
        }
        None => Ok(csv),
    }
}

#[derive(Debug, Serialize)]
pub struct SchemeMean {
    pub scheme: String,
    pub accuracy: f64,
    pub cost: f64,
    pub runs: usize,
}

#[derive(Debug, Serialize)]
pub struct CompareSummary {
    pub seeds: Vec<u64>,
    pub config: ScenarioConfig,
    pub runs: Vec<ScenarioSummary>,
    pub mean: Vec<SchemeMean>,
}

/// Per-scheme averages, in first-appearance order.
pub fn scheme_means(results: &[ScenarioResult]) -> Vec<SchemeMean> {
    let mut order = Vec::new();
    let mut acc: BTreeMap<String, (f64, f64, usize)> = BTreeMap::new();
    for r in results {
        let e = acc.entry(r.scheme.clone()).or_insert_with(|| {
            order.push(r.scheme.clone());
            (0.0, 0.0, 0)
        });
        e.0 += r.accuracy;
        e.1 += r.cost;
        e.2 += 1;
    }
    order
        .into_iter()
        .map(|s| {
            let (a, c, n) = acc[&s];
            SchemeMean {
                scheme: s,
                accuracy: a / n as f64,
                cost: c / n as f64,
                runs: n,
            }
        })
        .collect()
}

pub fn compare_csv(results: &[ScenarioResult]) -> String {
    let mut out = String::from("scheme,seed,accuracy,cost\n");
    for r in results {
        let _ = writeln!(out, "{},{},{},{}", r.scheme, r.seed, r.accuracy, r.cost);
    }
    out
}

pub fn cmd_compare(args: &CompareArgs) -> Result<String, CliError> {
    let (cfg, base) = args.scenario.resolve()?;
    let results = scenario::run_compare(&cfg, base.as_deref())?;
    let csv = compare_csv(&results);
    let Some(dir) = &args.out else {
        return Ok(csv);
    };
    let summary = CompareSummary {
        seeds: cfg.seed_list(),
        config: cfg.clone(),
        runs: results.iter().map(ScenarioResult::summary).collect(),
        mean: scheme_means(&results),
    };
    write_atomic(&dir.join("compare.csv"), &csv)?;
    write_atomic(&dir.join("summary.json"), &to_json(&summary))?;
    if args.series {
        for r in &results {
            let name = format!("{}_seed{}.csv", r.scheme.replace([':', '@'], "_"), r.seed);
            write_atomic(&dir.join("series").join(name), &r.to_csv())?;
        }
    }
    Ok(format!("{} runs written to {}\n", results.len(), dir.display()))
}

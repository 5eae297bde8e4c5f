//! Wiring from a [`ScenarioConfig`] to instances, plans and simulator runs.

use std::path::Path;

use ace_core::baselines::{accuracy_only_plan, fixed_rate_plan};
use ace_core::heuristic::aps_offline;
use ace_core::schema::load_topology;
use ace_core::sim::scenario::{build_instance, random_pairs};
use ace_core::sim::{doubling_schedule, simulate_with, RatePolicy, ScenarioResult, SimConfig, TrafficSchedule};
use ace_core::{ModelParams, ProblemInstance, SamplingPlan, Topology};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::ScenarioConfig;
use crate::CliError;

/// One comparison scheme.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Scheme {
    Aps { a: f64, b: f64 },
    Fixed,
    Payless,
    Sod,
}

impl Scheme {
    pub fn label(&self) -> String {
        match self {
            Scheme::Aps { a, b } => format!("aps@{a}:{b}"),
            Scheme::Fixed => "fixed".into(),
            Scheme::Payless => "payless".into(),
            Scheme::Sod => "sod".into(),
        }
    }
}

pub fn topology(cfg: &ScenarioConfig, base_dir: Option<&Path>) -> Result<Topology, CliError> {
    let topo = load_topology(&cfg.topology, base_dir)?;
    Ok(match cfg.traffic.capacity_pps {
        Some(c) => topo.with_capacity(c).map_err(|e| CliError::Usage(e.to_string()))?,
        None => topo,
    })
}

/// `pairs` random flows routed on shortest paths, each planned for the
/// schedule's peak rate with `r_f = recommended_fraction * peak`.
pub fn instance(cfg: &ScenarioConfig, topo: &Topology, seed: u64) -> Result<ProblemInstance, CliError> {
    let pairs = random_pairs(topo, cfg.pairs, seed)?;
    let peak = cfg.peak_pps();
    let params = ModelParams::new(0.5, 0.5, cfg.per_assignment_cost)?;
    Ok(build_instance(topo, &pairs, peak, cfg.traffic.recommended_fraction * peak, params)?)
}

pub fn schedule(cfg: &ScenarioConfig) -> Result<TrafficSchedule, CliError> {
    Ok(doubling_schedule(cfg.pairs, cfg.initial_pps(), cfg.traffic.period, cfg.horizon)?)
}

/// Plan and replay policy for one scheme.
pub fn plan_for(cfg: &ScenarioConfig, inst: &ProblemInstance, scheme: Scheme) -> Result<(SamplingPlan, RatePolicy, bool), CliError> {
    Ok(match scheme {
        Scheme::Aps { a, b } => (aps_offline(&inst.with_params(inst.params().with_weights(a, b)?))?, RatePolicy::Static, false),
        Scheme::Fixed => {
            let rate = cfg.traffic.fixed_rate_pps.unwrap_or_else(|| cfg.peak_pps());
            (fixed_rate_plan(inst, rate)?.plan, RatePolicy::Static, true)
        }
        Scheme::Sod => (accuracy_only_plan(inst)?, RatePolicy::Static, false),
        Scheme::Payless => {
            // accuracy-only placement, rates start at r_f and adapt
            let mut plan = accuracy_only_plan(inst)?;
            for f in inst.flows() {
                plan.rate[f.id.0] = f.recommended_rate;
            }
            (plan, RatePolicy::Adaptive(cfg.adaptive), false)
        }
    })
}

pub fn run_scheme(
    cfg: &ScenarioConfig,
    inst: &ProblemInstance,
    sched: &TrafficSchedule,
    scheme: Scheme,
    seed: u64,
) -> Result<ScenarioResult, CliError> {
    let (plan, policy, allow_overload) = plan_for(cfg, inst, scheme)?;
    let sim = SimConfig {
        allow_overload,
        ..SimConfig::new(cfg.loss, seed)
    };
    Ok(simulate_with(inst, &plan, sched, &sim, &policy)?.with_scheme(scheme.label()))
}

pub fn schemes(cfg: &ScenarioConfig) -> Result<Vec<Scheme>, CliError> {
    let mut out: Vec<Scheme> = cfg.ratio_list()?.into_iter().map(|(a, b)| Scheme::Aps { a, b }).collect();
    out.extend([Scheme::Fixed, Scheme::Payless, Scheme::Sod]);
    Ok(out)
}

/// Every scheme on every seed. Runs are independent and executed in
/// parallel; results come back ordered by seed, then scheme.
pub fn run_compare(cfg: &ScenarioConfig, base_dir: Option<&Path>) -> Result<Vec<ScenarioResult>, CliError> {
    cfg.validate()?;
    let topo = topology(cfg, base_dir)?;
    let sched = schedule(cfg)?;
    let schemes = schemes(cfg)?;
    let seeds = cfg.seed_list();
    let instances = seeds
        .iter()
        .map(|&s| instance(cfg, &topo, s))
        .collect::<Result<Vec<_>, _>>()?;
    let jobs: Vec<(usize, Scheme)> = (0..seeds.len()).flat_map(|i| schemes.iter().map(move |&s| (i, s))).collect();
    jobs.par_iter()
        .map(|&(i, scheme)| run_scheme(cfg, &instances[i], &sched, scheme, seeds[i]))
        .collect()
}

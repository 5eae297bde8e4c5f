//! Tick-based replay of a sampling plan against a traffic schedule.
//!
//! Every tick each flow injects `rate * dt` packets at its source. Packets are
//! dropped independently on every link with the configured loss probability.
//! A switch sampling a flow at `y` pps picks each arriving packet with
//! probability `min(1, y / arrival_rate)` and inverts that probability to
//! estimate the flow's rate. A flow's measured rate is the mean over its
//! sampling switches and is reported on every link of its path.
//!
//! Loss and sampling draw from two separate ChaCha streams seeded from the same
//! seed, so different plans replayed with one seed see identical traffic.

pub mod scenario;
pub mod schedule;
pub mod sweep;

use std::collections::BTreeSet;
use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::baselines::{adaptive_polling_step, AdaptivePolicy};
use crate::instance::{check_feasibility, FlowId, InstanceError, ProblemInstance, SamplingPlan, Violation};
use crate::topology::Link;

pub use schedule::{constant_schedule, doubling_schedule, doubling_schedule_from, TrafficSchedule};

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Instance(#[from] InstanceError),
    #[error("plan is infeasible ({} violation(s))", .0.len())]
    InfeasiblePlan(Vec<Violation>),
    #[error("invalid schedule: {0}")]
    Schedule(String),
    #[error("schedule has {schedule} flow(s) but the instance has {instance}")]
    FlowCount { schedule: usize, instance: usize },
    #[error("loss probability {0} outside [0, 1)")]
    LossProb(f64),
    #[error("invalid adaptive policy: {0}")]
    Policy(String),
    #[error("requested {requested} distinct pairs but only {available} exist")]
    TooManyPairs { requested: usize, available: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SimMode {
    /// Binomial loss and sampling on integer packet counts.
    #[default]
    Stochastic,
    /// Every draw replaced by its mean; no randomness.
    Expectation,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub loss_prob: f64,
    pub seed: u64,
    pub mode: SimMode,
    /// Replay plans that oversubscribe switch capacity instead of rejecting them.
    pub allow_overload: bool,
}

impl SimConfig {
    pub fn new(loss_prob: f64, seed: u64) -> Self {
        SimConfig {
            loss_prob,
            seed,
            mode: SimMode::Stochastic,
            allow_overload: false,
        }
    }
}

/// How the plan's rates evolve during the replay.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum RatePolicy {
    /// Rates stay at the plan's values.
    #[default]
    Static,
    /// Each flow's rate follows the adaptive rule on its measured counts,
    /// bounded by `[r_f, offered_rate]`.
    Adaptive(AdaptivePolicy),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioResult {
    pub scheme: String,
    pub seed: u64,
    pub tick_secs: f64,
    /// Links crossed by at least one flow, sorted.
    pub links: Vec<Link>,
    /// `actual[t][l]`: pps entering link `l` during tick `t`.
    pub actual: Vec<Vec<f64>>,
    /// `measured[t][l]`: sum of the measured rates of the flows crossing `l`.
    pub measured: Vec<Vec<f64>>,
    pub accuracy: f64,
    pub cost: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSummary {
    pub scheme: String,
    pub seed: u64,
    pub accuracy: f64,
    pub cost: f64,
    pub ticks: usize,
    pub links: usize,
}

impl ScenarioResult {
    pub fn with_scheme(mut self, scheme: impl Into<String>) -> Self {
        self.scheme = scheme.into();
        self
    }

    pub fn horizon(&self) -> usize {
        self.actual.len()
    }

    pub fn summary(&self) -> ScenarioSummary {
        ScenarioSummary {
            scheme: self.scheme.clone(),
            seed: self.seed,
            accuracy: self.accuracy,
            cost: self.cost,
            ticks: self.horizon(),
            links: self.links.len(),
        }
    }

    /// `tick,link,actual_pps,measured_pps`, one row per tick and used link.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("tick,link,actual_pps,measured_pps\n");
        for (t, (act, meas)) in self.actual.iter().zip(&self.measured).enumerate() {
            for (l, link) in self.links.iter().enumerate() {
                let _ = writeln!(out, "{t},{link},{},{}", act[l], meas[l]);
            }
        }
        out
    }
}

/// Stochastic replay with static rates.
pub fn simulate(
    inst: &ProblemInstance,
    plan: &SamplingPlan,
    schedule: &TrafficSchedule,
    loss_prob: f64,
    seed: u64,
) -> Result<ScenarioResult, SimError> {
    simulate_with(inst, plan, schedule, &SimConfig::new(loss_prob, seed), &RatePolicy::Static)
}

pub fn simulate_with(
    inst: &ProblemInstance,
    plan: &SamplingPlan,
    schedule: &TrafficSchedule,
    cfg: &SimConfig,
    policy: &RatePolicy,
) -> Result<ScenarioResult, SimError> {
    if !(0.0..1.0).contains(&cfg.loss_prob) {
        return Err(SimError::LossProb(cfg.loss_prob));
    }
    if schedule.num_flows() != inst.num_flows() {
        return Err(SimError::FlowCount {
            schedule: schedule.num_flows(),
            instance: inst.num_flows(),
        });
    }
    if let RatePolicy::Adaptive(p) = policy {
        p.validate().map_err(SimError::Policy)?;
    }
    let violations: Vec<Violation> = check_feasibility(plan, inst)?
        .into_iter()
        .filter(|v| !(cfg.allow_overload && v.family() == "capacity"))
        .collect();
    if !violations.is_empty() {
        return Err(SimError::InfeasiblePlan(violations));
    }

    let links: Vec<Link> = inst
        .flows()
        .iter()
        .flat_map(|f| f.path.links())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let link_index = |l: &Link| links.binary_search(l).expect("link collected above");
    let flow_links: Vec<Vec<usize>> = inst.flows().iter().map(|f| f.path.links().map(|l| link_index(&l)).collect()).collect();
    // Positions along the path at which the flow is sampled.
    let sites: Vec<Vec<usize>> = inst
        .flows()
        .iter()
        .map(|f| {
            f.path
                .hops()
                .iter()
                .enumerate()
                .filter(|(_, &s)| plan.is_assigned(f.id, s))
                .map(|(i, _)| i)
                .collect()
        })
        .collect();

    let mut loss_rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    loss_rng.set_stream(0);
    let mut sample_rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    sample_rng.set_stream(1);

    let dt = schedule.tick_secs();
    let horizon = schedule.horizon();
    let mut rates = plan.rate.clone();
    let mut prev_count: Vec<Option<f64>> = vec![None; inst.num_flows()];
    let adaptive: Vec<_> = match policy {
        RatePolicy::Static => Vec::new(),
        RatePolicy::Adaptive(p) => (0..inst.num_flows()).map(|f| p.for_flow(inst, FlowId(f))).collect(),
    };
    let mut actual = Vec::with_capacity(horizon);
    let mut measured = Vec::with_capacity(horizon);
    let mut tick_cost_sum = 0.0;

    for t in 0..horizon {
        let mut act_row = vec![0.0; links.len()];
        let mut meas_row = vec![0.0; links.len()];
        for flow in inst.flows() {
            let f = flow.id.0;
            let sent = schedule.rate(f, t) * dt;
            let mut arrivals = Vec::with_capacity(flow.path.len());
            arrivals.push(match cfg.mode {
                SimMode::Stochastic => sent.round(),
                SimMode::Expectation => sent,
            });
            for &l in &flow_links[f] {
                let here = *arrivals.last().unwrap();
                act_row[l] += here / dt;
                arrivals.push(thin(here, 1.0 - cfg.loss_prob, cfg.mode, &mut loss_rng));
            }

            let y = rates[f];
            let estimate = sites[f]
                .iter()
                .map(|&i| {
                    let arr = arrivals[i];
                    if arr <= 0.0 {
                        return 0.0;
                    }
                    let q = (y / (arr / dt)).min(1.0);
                    thin(arr, q, cfg.mode, &mut sample_rng) / q / dt
                })
                .sum::<f64>()
                / sites[f].len() as f64;
            for &l in &flow_links[f] {
                meas_row[l] += estimate;
            }
            tick_cost_sum += sites[f].len() as f64 * y;

            if let Some(acfg) = adaptive.get(f) {
                let count = estimate * dt;
                if let Some(prev) = prev_count[f] {
                    rates[f] = adaptive_polling_step(rates[f], prev, count, acfg);
                }
                prev_count[f] = Some(count);
            }
        }
        actual.push(act_row);
        measured.push(meas_row);
    }

    let cost = match policy {
        RatePolicy::Static => cost_metric(plan, inst)?,
        RatePolicy::Adaptive(_) => tick_cost_sum / horizon as f64,
    };
    let mut result = ScenarioResult {
        scheme: String::new(),
        seed: cfg.seed,
        tick_secs: dt,
        links,
        actual,
        measured,
        accuracy: 0.0,
        cost,
    };
    result.accuracy = accuracy_metric(&result);
    Ok(result)
}

/// Keep each of `n` packets with probability `p`.
fn thin(n: f64, p: f64, mode: SimMode, rng: &mut ChaCha8Rng) -> f64 {
    match mode {
        SimMode::Expectation => n * p,
        SimMode::Stochastic => {
            if p >= 1.0 || n <= 0.0 {
                return n;
            }
            Binomial::new(n as u64, p).expect("p in [0, 1)").sample(rng) as f64
        }
    }
}

/// `1 - mean(|measured - actual| / max(actual, 1))` over ticks and used
/// links, clamped to `[0, 1]`. A run with no links scores 1.
pub fn accuracy_metric(result: &ScenarioResult) -> f64 {
    let mut err = 0.0;
    let mut n = 0usize;
    for (act, meas) in result.actual.iter().zip(&result.measured) {
        for (a, m) in act.iter().zip(meas) {
            err += (m - a).abs() / a.max(1.0);
            n += 1;
        }
    }
    if n == 0 {
        return 1.0;
    }
    (1.0 - err / n as f64).clamp(0.0, 1.0)
}

/// Total sampling rate committed by the plan, `sum x[f][s] * y[f]` in pps.
/// Unlike the model's cost term this grows with the rate.
pub fn cost_metric(plan: &SamplingPlan, inst: &ProblemInstance) -> Result<f64, InstanceError> {
    inst.check_plan(plan)?;
    Ok(inst.topology().switches().map(|s| plan.load(s)).sum())
}

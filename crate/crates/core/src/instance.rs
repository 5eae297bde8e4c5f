//! Problem data model shared by every solver: flows, weights, the instance
//! itself, sampling plans, the scalarized objective and constraint checking.
//!
//! The objective is the weighted difference
//! `sum_s sum_f (a * x[f][s] * y[f] - b * C * x[f][s])`, taken literally: a
//! flow sampled at two switches contributes its rate twice to the accuracy
//! term and pays the per-assignment cost twice.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::topology::{traversal_matrix, Path, SwitchId, Topology, TopologyError, TraversalMatrix};

/// Relative slack used when comparing loads and rates against bounds.
pub const FEASIBILITY_EPS: f64 = 1e-9;

/// Tolerance on `a + b = 1`.
pub const WEIGHT_SUM_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FlowId(pub usize);

impl FlowId {
    #[inline]
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for FlowId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InstanceError {
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error("weights must be non-negative and finite (a={a}, b={b})")]
    NegativeWeight { a: f64, b: f64 },
    #[error("weights must sum to 1 (a={a}, b={b})")]
    WeightSum { a: f64, b: f64 },
    #[error("per-assignment cost must be non-negative, got {0}")]
    NegativeCost(f64),
    #[error("flow {flow}: {msg}")]
    Flow { flow: usize, msg: String },
    #[error("rate grid: {0}")]
    Grid(String),
    #[error("plan is {got_flows}x{got_switches}, instance needs {flows}x{switches}")]
    DimensionMismatch {
        flows: usize,
        switches: usize,
        got_flows: usize,
        got_switches: usize,
    },
}

/// One monitored flow. Rates are in packets per second.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowSpec {
    pub id: FlowId,
    pub src: SwitchId,
    pub dst: SwitchId,
    pub path: Path,
    pub offered_rate: f64,
    pub recommended_rate: f64,
}

impl FlowSpec {
    /// Builds a flow routed over the topology's deterministic shortest path.
    pub fn routed(
        topo: &Topology,
        id: usize,
        src: SwitchId,
        dst: SwitchId,
        offered_rate: f64,
        recommended_rate: f64,
    ) -> Result<Self, InstanceError> {
        let path = topo.shortest_path(src, dst)?;
        let flow = FlowSpec {
            id: FlowId(id),
            src,
            dst,
            path,
            offered_rate,
            recommended_rate,
        };
        flow.validate(topo)?;
        Ok(flow)
    }

    pub fn validate(&self, topo: &Topology) -> Result<(), InstanceError> {
        let err = |msg: String| InstanceError::Flow { flow: self.id.0, msg };
        if !(self.recommended_rate > 0.0 && self.recommended_rate.is_finite()) {
            return Err(err(format!("recommended rate {} must be positive", self.recommended_rate)));
        }
        if !(self.offered_rate.is_finite() && self.recommended_rate <= self.offered_rate) {
            return Err(err(format!(
                "recommended rate {} exceeds offered rate {}",
                self.recommended_rate, self.offered_rate
            )));
        }
        topo.validate_path(&self.path)?;
        if self.path.src() != Some(self.src) || self.path.dst() != Some(self.dst) {
            return Err(err("path does not run from src to dst".into()));
        }
        Ok(())
    }
}

/// Scalarization weights and the per-assignment cost `C`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct ModelParams {
    a: f64,
    b: f64,
    per_assignment_cost: f64,
}

#[derive(Serialize, Deserialize)]
struct RawParams {
    a: f64,
    b: f64,
    per_assignment_cost: f64,
}

impl TryFrom<RawParams> for ModelParams {
    type Error = InstanceError;

    fn try_from(raw: RawParams) -> Result<Self, Self::Error> {
        ModelParams::new(raw.a, raw.b, raw.per_assignment_cost)
    }
}

impl From<ModelParams> for RawParams {
    fn from(p: ModelParams) -> Self {
        RawParams {
            a: p.a,
            b: p.b,
            per_assignment_cost: p.per_assignment_cost,
        }
    }
}

impl ModelParams {
    /// Convex weights: `a, b >= 0` and `a + b = 1`.
    pub fn new(a: f64, b: f64, per_assignment_cost: f64) -> Result<Self, InstanceError> {
        let p = Self::unnormalized(a, b, per_assignment_cost)?;
        if ((a + b) - 1.0).abs() > WEIGHT_SUM_EPS {
            return Err(InstanceError::WeightSum { a, b });
        }
        Ok(p)
    }

    /// Non-negative weights without the sum constraint. Used to study how
    /// solvers behave when both weights are scaled by the same factor.
    pub fn unnormalized(a: f64, b: f64, per_assignment_cost: f64) -> Result<Self, InstanceError> {
        if !(a >= 0.0 && b >= 0.0 && a.is_finite() && b.is_finite()) {
            return Err(InstanceError::NegativeWeight { a, b });
        }
        if !(per_assignment_cost >= 0.0 && per_assignment_cost.is_finite()) {
            return Err(InstanceError::NegativeCost(per_assignment_cost));
        }
        Ok(ModelParams { a, b, per_assignment_cost })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn per_assignment_cost(&self) -> f64 {
        self.per_assignment_cost
    }

    /// Same cost, different weights.
    pub fn with_weights(&self, a: f64, b: f64) -> Result<Self, InstanceError> {
        Self::new(a, b, self.per_assignment_cost)
    }

    /// Contribution of one assignment at rate `y`.
    #[inline]
    pub fn assignment_value(&self, y: f64) -> f64 {
        self.a * y - self.b * self.per_assignment_cost
    }
}

/// A validated planning problem.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemInstance {
    topology: Topology,
    flows: Vec<FlowSpec>,
    params: ModelParams,
    rate_grid: Option<Vec<Vec<f64>>>,
    traversal: TraversalMatrix,
}

impl ProblemInstance {
    pub fn new(
        topology: Topology,
        flows: Vec<FlowSpec>,
        params: ModelParams,
        rate_grid: Option<Vec<Vec<f64>>>,
    ) -> Result<Self, InstanceError> {
        for (i, flow) in flows.iter().enumerate() {
            if flow.id.0 != i {
                return Err(InstanceError::Flow {
                    flow: flow.id.0,
                    msg: format!("flow ids must be dense, expected {i}"),
                });
            }
            flow.validate(&topology)?;
        }
        if let Some(grid) = &rate_grid {
            if grid.len() != flows.len() {
                return Err(InstanceError::Grid(format!(
                    "{} grids for {} flows",
                    grid.len(),
                    flows.len()
                )));
            }
            for (flow, rates) in flows.iter().zip(grid) {
                validate_grid(flow, rates)?;
            }
        }
        let traversal = traversal_matrix(&topology, &flows)?;
        Ok(ProblemInstance {
            topology,
            flows,
            params,
            rate_grid,
            traversal,
        })
    }

    pub fn topology(&self) -> &Topology {
        &self.topology
    }

    pub fn flows(&self) -> &[FlowSpec] {
        &self.flows
    }

    pub fn flow(&self, f: FlowId) -> &FlowSpec {
        &self.flows[f.0]
    }

    pub fn num_flows(&self) -> usize {
        self.flows.len()
    }

    pub fn num_switches(&self) -> usize {
        self.topology.num_switches()
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn rate_grid(&self) -> Option<&[Vec<f64>]> {
        self.rate_grid.as_deref()
    }

    pub fn grid(&self, f: FlowId) -> Option<&[f64]> {
        self.rate_grid.as_ref().map(|g| g[f.0].as_slice())
    }

    pub fn traversal(&self) -> &TraversalMatrix {
        &self.traversal
    }

    pub fn traverses(&self, f: FlowId, s: SwitchId) -> bool {
        self.traversal.get(f.0, s)
    }

    /// Smallest legal sampling rate: the first grid value, or `r_f`.
    pub fn min_rate(&self, f: FlowId) -> f64 {
        match self.grid(f) {
            Some(g) => g[0],
            None => self.flows[f.0].recommended_rate,
        }
    }

    /// Largest legal sampling rate: the last grid value, or the offered rate.
    pub fn max_rate(&self, f: FlowId) -> f64 {
        match self.grid(f) {
            Some(g) => g[g.len() - 1],
            None => self.flows[f.0].offered_rate,
        }
    }

    /// Largest legal rate not above `limit`, if any.
    pub fn snap_down(&self, f: FlowId, limit: f64) -> Option<f64> {
        match self.grid(f) {
            Some(g) => g.iter().rev().copied().find(|&r| r <= limit * (1.0 + FEASIBILITY_EPS)),
            None => {
                let flow = &self.flows[f.0];
                let y = limit.min(flow.offered_rate);
                (y >= flow.recommended_rate * (1.0 - FEASIBILITY_EPS)).then_some(y)
            }
        }
    }

    pub fn with_params(&self, params: ModelParams) -> Self {
        let mut inst = self.clone();
        inst.params = params;
        inst
    }

    pub fn without_grid(&self) -> Self {
        let mut inst = self.clone();
        inst.rate_grid = None;
        inst
    }

    /// Appends a flow (its id must equal the current flow count). `grid` must be
    /// given exactly when this instance carries rate grids.
    pub fn with_flow(&self, flow: FlowSpec, grid: Option<Vec<f64>>) -> Result<Self, InstanceError> {
        let mut flows = self.flows.clone();
        flows.push(flow);
        let rate_grid = match (&self.rate_grid, grid) {
            (Some(existing), Some(g)) => {
                let mut all = existing.clone();
                all.push(g);
                Some(all)
            }
            (None, None) => None,
            (Some(_), None) => return Err(InstanceError::Grid("new flow needs a rate grid".into())),
            (None, Some(_)) => return Err(InstanceError::Grid("instance has no rate grids".into())),
        };
        Self::new(self.topology.clone(), flows, self.params, rate_grid)
    }

    /// Errors unless `plan` has this instance's dimensions.
    pub fn check_plan(&self, plan: &SamplingPlan) -> Result<(), InstanceError> {
        let (nf, ns) = (self.num_flows(), self.num_switches());
        if plan.num_flows() != nf || plan.assignment.iter().any(|row| row.len() != ns) || plan.rate.len() != nf {
            return Err(InstanceError::DimensionMismatch {
                flows: nf,
                switches: ns,
                got_flows: plan.num_flows(),
                got_switches: plan.num_switches(),
            });
        }
        Ok(())
    }
}

pub(crate) fn validate_grid(flow: &FlowSpec, rates: &[f64]) -> Result<(), InstanceError> {
    let err = |msg: String| InstanceError::Grid(format!("flow {}: {msg}", flow.id));
    if rates.is_empty() {
        return Err(err("empty grid".into()));
    }
    if rates.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(err("grid must be strictly ascending".into()));
    }
    if rates[0] < flow.recommended_rate {
        return Err(err(format!("{} is below the recommended rate {}", rates[0], flow.recommended_rate)));
    }
    let top = rates[rates.len() - 1];
    if top > flow.offered_rate {
        return Err(err(format!("{top} exceeds the offered rate {}", flow.offered_rate)));
    }
    Ok(())
}

/// Switch assignment `x[f][s]` plus one sampling rate `y[f]` per flow.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplingPlan {
    #[serde(with = "bit_rows")]
    pub assignment: Vec<Vec<bool>>,
    pub rate: Vec<f64>,
}

impl SamplingPlan {
    pub fn empty(flows: usize, switches: usize) -> Self {
        SamplingPlan {
            assignment: vec![vec![false; switches]; flows],
            rate: vec![0.0; flows],
        }
    }

    pub fn num_flows(&self) -> usize {
        self.assignment.len()
    }

    pub fn num_switches(&self) -> usize {
        self.assignment.first().map_or(0, Vec::len)
    }

    pub fn is_assigned(&self, f: FlowId, s: SwitchId) -> bool {
        self.assignment[f.0][s.0]
    }

    pub fn assign(&mut self, f: FlowId, s: SwitchId) {
        self.assignment[f.0][s.0] = true;
    }

    pub fn switches_of(&self, f: FlowId) -> impl Iterator<Item = SwitchId> + '_ {
        self.assignment[f.0]
            .iter()
            .enumerate()
            .filter(|(_, &x)| x)
            .map(|(s, _)| SwitchId(s))
    }

    pub fn assignment_count(&self) -> usize {
        self.assignment.iter().flatten().filter(|&&x| x).count()
    }

    pub fn is_empty(&self) -> bool {
        self.assignment_count() == 0
    }

    /// Total sampled rate at switch `s`.
    pub fn load(&self, s: SwitchId) -> f64 {
        self.assignment
            .iter()
            .zip(&self.rate)
            .filter(|(row, _)| row[s.0])
            .map(|(_, &y)| y)
            .sum()
    }

    /// Capacity left at each switch after this plan's loads.
    pub fn residual_capacity(&self, topo: &Topology) -> Vec<f64> {
        topo.switches().map(|s| topo.capacity(s) - self.load(s)).collect()
    }
}

mod bit_rows {
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(rows: &[Vec<bool>], ser: S) -> Result<S::Ok, S::Error> {
        let ints: Vec<Vec<u8>> = rows.iter().map(|r| r.iter().map(|&b| b as u8).collect()).collect();
        serde::Serialize::serialize(&ints, ser)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<Vec<Vec<bool>>, D::Error> {
        let ints = Vec::<Vec<u8>>::deserialize(de)?;
        let width = ints.first().map_or(0, Vec::len);
        ints.into_iter()
            .map(|row| {
                if row.len() != width {
                    return Err(D::Error::custom("ragged assignment matrix"));
                }
                row.into_iter()
                    .map(|v| match v {
                        0 => Ok(false),
                        1 => Ok(true),
                        other => Err(D::Error::custom(format!("assignment entry {other} is not 0/1"))),
                    })
                    .collect()
            })
            .collect()
    }
}

/// `sum_s sum_f (a x y - b C x)`.
pub fn objective_value(plan: &SamplingPlan, inst: &ProblemInstance) -> Result<f64, InstanceError> {
    inst.check_plan(plan)?;
    let p = inst.params();
    let mut total = 0.0;
    for s in 0..inst.num_switches() {
        for f in 0..inst.num_flows() {
            if plan.assignment[f][s] {
                total += p.a() * plan.rate[f] - p.b() * p.per_assignment_cost();
            }
        }
    }
    Ok(total)
}

/// Unweighted `sum x y`.
pub fn accuracy_term(plan: &SamplingPlan, inst: &ProblemInstance) -> Result<f64, InstanceError> {
    inst.check_plan(plan)?;
    Ok(plan
        .assignment
        .iter()
        .zip(&plan.rate)
        .map(|(row, &y)| row.iter().filter(|&&x| x).count() as f64 * y)
        .sum())
}

/// Unweighted `sum C x`.
pub fn cost_term(plan: &SamplingPlan, inst: &ProblemInstance) -> Result<f64, InstanceError> {
    inst.check_plan(plan)?;
    Ok(plan.assignment_count() as f64 * inst.params().per_assignment_cost())
}

/// One broken constraint. `slack` is negative by the amount of the violation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "constraint", rename_all = "kebab-case")]
pub enum Violation {
    /// Sampled load above switch capacity.
    Capacity { switch: SwitchId, load: f64, capacity: f64, slack: f64 },
    /// Flow sampled nowhere.
    Coverage { flow: FlowId, slack: f64 },
    /// Rate below the recommended rate.
    MinRate { flow: FlowId, rate: f64, required: f64, slack: f64 },
    /// Rate above what the flow offers.
    MaxRate { flow: FlowId, rate: f64, offered: f64, slack: f64 },
    /// Sampled at a switch off the flow's path.
    Traversal { flow: FlowId, switch: SwitchId, slack: f64 },
}

impl Violation {
    pub fn family(&self) -> &'static str {
        match self {
            Violation::Capacity { .. } => "capacity",
            Violation::Coverage { .. } => "coverage",
            Violation::MinRate { .. } => "min-rate",
            Violation::MaxRate { .. } => "max-rate",
            Violation::Traversal { .. } => "traversal",
        }
    }

    pub fn slack(&self) -> f64 {
        match *self {
            Violation::Capacity { slack, .. }
            | Violation::Coverage { slack, .. }
            | Violation::MinRate { slack, .. }
            | Violation::MaxRate { slack, .. }
            | Violation::Traversal { slack, .. } => slack,
        }
    }
}

fn exceeds(value: f64, bound: f64) -> bool {
    value > bound + FEASIBILITY_EPS * bound.abs().max(1.0)
}

/// Every violated constraint of `plan`, grouped by family. Empty means feasible.
pub fn check_feasibility(plan: &SamplingPlan, inst: &ProblemInstance) -> Result<Vec<Violation>, InstanceError> {
    inst.check_plan(plan)?;
    let topo = inst.topology();
    let mut out = Vec::new();
    for s in topo.switches() {
        let load = plan.load(s);
        let capacity = topo.capacity(s);
        if exceeds(load, capacity) {
            out.push(Violation::Capacity {
                switch: s,
                load,
                capacity,
                slack: capacity - load,
            });
        }
    }
    for flow in inst.flows() {
        let f = flow.id;
        let count = plan.switches_of(f).count();
        if count == 0 {
            out.push(Violation::Coverage { flow: f, slack: -1.0 });
        }
    }
    for flow in inst.flows() {
        let y = plan.rate[flow.id.0];
        if exceeds(flow.recommended_rate, y) {
            out.push(Violation::MinRate {
                flow: flow.id,
                rate: y,
                required: flow.recommended_rate,
                slack: y - flow.recommended_rate,
            });
        }
    }
    for flow in inst.flows() {
        let y = plan.rate[flow.id.0];
        if exceeds(y, flow.offered_rate) {
            out.push(Violation::MaxRate {
                flow: flow.id,
                rate: y,
                offered: flow.offered_rate,
                slack: flow.offered_rate - y,
            });
        }
    }
    for flow in inst.flows() {
        for s in plan.switches_of(flow.id) {
            if !inst.traverses(flow.id, s) {
                out.push(Violation::Traversal {
                    flow: flow.id,
                    switch: s,
                    slack: -1.0,
                });
            }
        }
    }
    Ok(out)
}

//! Exhaustive solver for grid-restricted instances.
//!
//! Flows are placed one at a time in id order. For each flow every non-empty
//! subset of its on-path switches is paired with every grid rate; candidates
//! are visited in lexicographic order of (sorted switch ids, rate), so the
//! first optimum found is also the lexicographically smallest one. Capacity is
//! tracked incrementally and branches whose optimistic completion cannot beat
//! the incumbent are cut.

use crate::error::SolveError;
use crate::instance::{check_feasibility, objective_value, validate_grid, FlowId, FlowSpec, ProblemInstance, SamplingPlan, FEASIBILITY_EPS};
use crate::topology::SwitchId;

pub const DEFAULT_SEARCH_LIMIT: f64 = 1e7;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactConfig {
    /// Upper bound on `prod |grid_f| * 2^(sum |P_f|)`.
    pub search_limit: f64,
}

impl Default for ExactConfig {
    fn default() -> Self {
        ExactConfig {
            search_limit: DEFAULT_SEARCH_LIMIT,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExactSolution {
    pub plan: SamplingPlan,
    pub objective: f64,
    /// Candidates placed during the search.
    pub nodes: u64,
}

#[derive(Debug, Clone)]
struct Candidate {
    switches: Vec<usize>,
    rate: f64,
    value: f64,
}

/// Nominal size of the exhaustive search space, or `None` without a grid.
pub fn search_space(inst: &ProblemInstance) -> Option<f64> {
    let grid = inst.rate_grid()?;
    let rates: f64 = grid.iter().map(|g| g.len() as f64).product();
    let hops: usize = inst.flows().iter().map(|f| f.path.len()).sum();
    Some(rates * 2f64.powi(hops as i32))
}

fn improves(value: f64, best: f64) -> bool {
    value > best + 1e-9 * best.abs().max(1.0)
}

fn fits(rate: f64, switches: &[usize], residual: &[f64], capacity: &[f64]) -> bool {
    switches
        .iter()
        .all(|&s| rate <= residual[s] + FEASIBILITY_EPS * capacity[s].max(1.0))
}

fn candidates(inst: &ProblemInstance, flow: &FlowSpec, grid: &[f64]) -> Vec<Candidate> {
    let mut on_path: Vec<usize> = flow.path.hops().iter().map(|s| s.0).collect();
    on_path.sort_unstable();
    let k = on_path.len();
    let mut subsets: Vec<Vec<usize>> = (1u32..(1 << k))
        .map(|mask| (0..k).filter(|i| mask & (1 << i) != 0).map(|i| on_path[i]).collect())
        .collect();
    subsets.sort();
    let params = inst.params();
    subsets
        .into_iter()
        .flat_map(|switches| {
            grid.iter().map(move |&rate| Candidate {
                value: switches.len() as f64 * params.assignment_value(rate),
                switches: switches.clone(),
                rate,
            })
        })
        .collect()
}

/// Best achievable contribution of a flow ignoring capacity.
fn optimistic(cands: &[Candidate]) -> f64 {
    cands.iter().map(|c| c.value).fold(f64::NEG_INFINITY, f64::max)
}

struct Search<'a> {
    cands: &'a [Vec<Candidate>],
    suffix_bound: Vec<f64>,
    capacity: &'a [f64],
    residual: Vec<f64>,
    choice: Vec<usize>,
    best: Option<(f64, Vec<usize>)>,
    nodes: u64,
    deepest_stuck: Option<usize>,
}

impl Search<'_> {
    fn run(&mut self, depth: usize, value: f64) {
        if depth == self.cands.len() {
            if self.best.as_ref().is_none_or(|(b, _)| improves(value, *b)) {
                self.best = Some((value, self.choice.clone()));
            }
            return;
        }
        let mut placed = false;
        for (i, c) in self.cands[depth].iter().enumerate() {
            if !fits(c.rate, &c.switches, &self.residual, self.capacity) {
                continue;
            }
            placed = true;
            if let Some((b, _)) = &self.best {
                if !improves(value + c.value + self.suffix_bound[depth + 1], *b) {
                    continue;
                }
            }
            self.nodes += 1;
            for &s in &c.switches {
                self.residual[s] -= c.rate;
            }
            self.choice[depth] = i;
            self.run(depth + 1, value + c.value);
            for &s in &c.switches {
                self.residual[s] += c.rate;
            }
        }
        if !placed {
            self.deepest_stuck = Some(self.deepest_stuck.map_or(depth, |d| d.max(depth)));
        }
    }
}

pub fn solve_offline_exact(inst: &ProblemInstance) -> Result<ExactSolution, SolveError> {
    solve_offline_exact_with(inst, &ExactConfig::default())
}

pub fn solve_offline_exact_with(inst: &ProblemInstance, cfg: &ExactConfig) -> Result<ExactSolution, SolveError> {
    let grid = inst.rate_grid().ok_or(SolveError::MissingGrid)?;
    let nominal = search_space(inst).unwrap_or(f64::INFINITY);
    if nominal > cfg.search_limit {
        return Err(SolveError::SearchLimit {
            nominal,
            limit: cfg.search_limit,
        });
    }
    let capacity = inst.topology().capacities();

    // A flow whose cheapest rate fits nowhere on its path is infeasible on its own.
    for flow in inst.flows() {
        let min_rate = grid[flow.id.0][0];
        let hops: Vec<usize> = flow.path.hops().iter().map(|s| s.0).collect();
        if !hops.iter().any(|&s| fits(min_rate, &[s], capacity, capacity)) {
            return Err(SolveError::Infeasible { flow: flow.id });
        }
    }

    let cands: Vec<Vec<Candidate>> = inst
        .flows()
        .iter()
        .map(|f| candidates(inst, f, &grid[f.id.0]))
        .collect();
    let n = cands.len();
    let mut suffix_bound = vec![0.0; n + 1];
    for i in (0..n).rev() {
        suffix_bound[i] = suffix_bound[i + 1] + optimistic(&cands[i]);
    }

    let mut search = Search {
        cands: &cands,
        suffix_bound,
        capacity,
        residual: capacity.to_vec(),
        choice: vec![0; n],
        best: None,
        nodes: 0,
        deepest_stuck: None,
    };
    search.run(0, 0.0);

    let Some((_, choice)) = search.best else {
        let flow = FlowId(search.deepest_stuck.unwrap_or(0));
        return Err(SolveError::Infeasible { flow });
    };
    let mut plan = SamplingPlan::empty(n, inst.num_switches());
    for (f, &i) in choice.iter().enumerate() {
        let c = &cands[f][i];
        for &s in &c.switches {
            plan.assign(FlowId(f), SwitchId(s));
        }
        plan.rate[f] = c.rate;
    }
    let objective = objective_value(&plan, inst)?;
    Ok(ExactSolution {
        plan,
        objective,
        nodes: search.nodes,
    })
}

/// Places `new_flow` optimally on top of `base` without touching existing
/// rows. `inst` describes the flows already in `base`; the returned plan has
/// one extra row for the new flow.
pub fn solve_online_exact(
    inst: &ProblemInstance,
    base: &SamplingPlan,
    new_flow: &FlowSpec,
    grid: &[f64],
) -> Result<SamplingPlan, SolveError> {
    let violations = check_feasibility(base, inst)?;
    if !violations.is_empty() {
        return Err(SolveError::InfeasibleBase(violations));
    }
    check_new_flow(inst, new_flow)?;
    validate_grid(new_flow, grid)?;

    let capacity = inst.topology().capacities();
    let residual = base.residual_capacity(inst.topology());
    let mut best: Option<&Candidate> = None;
    let cands = candidates(inst, new_flow, grid);
    for c in &cands {
        if fits(c.rate, &c.switches, &residual, capacity) && best.is_none_or(|b| improves(c.value, b.value)) {
            best = Some(c);
        }
    }
    let best = best.ok_or(SolveError::Infeasible { flow: new_flow.id })?;
    Ok(extend_plan(base, inst.num_switches(), &best.switches, best.rate))
}

pub(crate) fn check_new_flow(inst: &ProblemInstance, flow: &FlowSpec) -> Result<(), SolveError> {
    if flow.id.0 != inst.num_flows() {
        return Err(crate::instance::InstanceError::Flow {
            flow: flow.id.0,
            msg: format!("new flow must take id {}", inst.num_flows()),
        }
        .into());
    }
    flow.validate(inst.topology())?;
    Ok(())
}

pub(crate) fn extend_plan(base: &SamplingPlan, switches: usize, chosen: &[usize], rate: f64) -> SamplingPlan {
    let mut plan = base.clone();
    let mut row = vec![false; switches];
    for &s in chosen {
        row[s] = true;
    }
    plan.assignment.push(row);
    plan.rate.push(rate);
    plan
}

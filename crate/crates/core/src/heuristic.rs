//! Greedy switch selection (APS).
//!
//! Each round scores every switch by the flows it could still take on at their
//! minimum legal rate, commits the best switch's candidates and repeats until
//! every flow is covered. Flows whose assignment value `a*r - b*C` is negative
//! are held back and placed individually at the end, because coverage is a
//! hard constraint. When `a > b` a final pass spends leftover capacity at each
//! flow's switch to raise its rate toward the offered rate.
//!
//! Rounds recompute scores for switches that still see an uncovered flow, so a
//! run performs at most `|F| * |S|` switch scorings. A priority queue keyed on
//! score would lower that further; it is not needed at these sizes.

use crate::error::SolveError;
use crate::exact::{check_new_flow, extend_plan};
use crate::instance::{check_feasibility, FlowId, FlowSpec, ProblemInstance, SamplingPlan, FEASIBILITY_EPS};
use crate::topology::SwitchId;

/// Score of one switch for the current round.
#[derive(Debug, Clone, PartialEq)]
pub struct SwitchScore {
    pub switch: SwitchId,
    pub candidates: Vec<FlowId>,
    /// Tentative rate of each candidate, aligned with `candidates`.
    pub rates: Vec<f64>,
    pub score: f64,
}

impl SwitchScore {
    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ApsStats {
    pub rounds: usize,
    pub score_evaluations: usize,
}

fn within(rate: f64, residual: f64, capacity: f64) -> bool {
    rate <= residual + FEASIBILITY_EPS * capacity.max(1.0)
}

/// Admits uncovered, non-negative-value flows through `s` in ascending id order
/// at their minimum rate, skipping any that no longer fit.
pub fn switch_score(inst: &ProblemInstance, s: SwitchId, uncovered: &[bool], residual: f64) -> SwitchScore {
    let params = inst.params();
    let capacity = inst.topology().capacity(s);
    let mut left = residual;
    let mut out = SwitchScore {
        switch: s,
        candidates: Vec::new(),
        rates: Vec::new(),
        score: 0.0,
    };
    for flow in inst.flows() {
        let f = flow.id;
        if !uncovered[f.0] || !inst.traverses(f, s) {
            continue;
        }
        let rate = inst.min_rate(f);
        let value = params.assignment_value(rate);
        if value < 0.0 || !within(rate, left, capacity) {
            continue;
        }
        left -= rate;
        out.candidates.push(f);
        out.rates.push(rate);
        out.score += value;
    }
    out
}

pub fn aps_offline(inst: &ProblemInstance) -> Result<SamplingPlan, SolveError> {
    aps_offline_with_stats(inst).map(|(plan, _)| plan)
}

pub fn aps_offline_with_stats(inst: &ProblemInstance) -> Result<(SamplingPlan, ApsStats), SolveError> {
    let topo = inst.topology();
    let n = inst.num_flows();
    let mut plan = SamplingPlan::empty(n, inst.num_switches());
    let mut residual = topo.capacities().to_vec();
    let mut uncovered = vec![true; n];
    let mut remaining = n;
    let mut home: Vec<Option<SwitchId>> = vec![None; n];
    let mut stats = ApsStats::default();

    while remaining > 0 {
        stats.rounds += 1;
        let mut best: Option<SwitchScore> = None;
        for s in topo.switches() {
            let sees_uncovered = inst.flows().iter().any(|f| uncovered[f.id.0] && inst.traverses(f.id, s));
            if !sees_uncovered {
                continue;
            }
            stats.score_evaluations += 1;
            let score = switch_score(inst, s, &uncovered, residual[s.0]);
            if score.is_empty() {
                continue;
            }
            if best.as_ref().is_none_or(|b| score.score > b.score) {
                best = Some(score);
            }
        }
        let Some(best) = best else { break };
        for (&f, &rate) in best.candidates.iter().zip(&best.rates) {
            plan.assign(f, best.switch);
            plan.rate[f.0] = rate;
            residual[best.switch.0] -= rate;
            uncovered[f.0] = false;
            home[f.0] = Some(best.switch);
            remaining -= 1;
        }
    }

    // Flows left over either have negative value everywhere or found no room.
    // Coverage still forces them somewhere; all on-path switches score the
    // same, so the smallest id with room wins.
    for flow in inst.flows() {
        let f = flow.id;
        if !uncovered[f.0] {
            continue;
        }
        let rate = inst.min_rate(f);
        let mut hops: Vec<SwitchId> = flow.path.hops().to_vec();
        hops.sort_unstable();
        let s = hops
            .into_iter()
            .find(|s| within(rate, residual[s.0], topo.capacity(*s)))
            .ok_or(SolveError::Infeasible { flow: f })?;
        plan.assign(f, s);
        plan.rate[f.0] = rate;
        residual[s.0] -= rate;
        uncovered[f.0] = false;
        home[f.0] = Some(s);
    }

    let params = inst.params();
    if params.a() > params.b() {
        for flow in inst.flows() {
            let f = flow.id;
            let s = home[f.0].expect("every flow is placed");
            let current = plan.rate[f.0];
            if let Some(boosted) = inst.snap_down(f, current + residual[s.0].max(0.0)) {
                if boosted > current {
                    residual[s.0] -= boosted - current;
                    plan.rate[f.0] = boosted;
                }
            }
        }
    }

    debug_assert!(check_feasibility(&plan, inst).map(|v| v.is_empty()).unwrap_or(false));
    Ok((plan, stats))
}

/// Adds `new_flow` to `base` at its best single switch. Existing rows are
/// never modified. `grid` restricts the new flow's rate when given.
pub fn aps_online(
    inst: &ProblemInstance,
    base: &SamplingPlan,
    new_flow: &FlowSpec,
    grid: Option<&[f64]>,
) -> Result<SamplingPlan, SolveError> {
    let violations = check_feasibility(base, inst)?;
    if !violations.is_empty() {
        return Err(SolveError::InfeasibleBase(violations));
    }
    check_new_flow(inst, new_flow)?;
    if let Some(g) = grid {
        crate::instance::validate_grid(new_flow, g)?;
    }
    let topo = inst.topology();
    let params = inst.params();
    let residual = base.residual_capacity(topo);
    let min_rate = grid.map_or(new_flow.recommended_rate, |g| g[0]);

    let mut hops: Vec<SwitchId> = new_flow.path.hops().to_vec();
    hops.sort_unstable();
    let mut best: Option<(SwitchId, f64, f64)> = None;
    for s in hops {
        let room = residual[s.0];
        if !within(min_rate, room, topo.capacity(s)) {
            continue;
        }
        let y = if params.a() > params.b() {
            let limit = new_flow.offered_rate.min(room);
            match grid {
                Some(g) => g.iter().rev().copied().find(|&r| within(r, limit, topo.capacity(s))).unwrap_or(min_rate),
                None => limit.max(min_rate),
            }
        } else {
            min_rate
        };
        let score = params.assignment_value(y);
        if best.is_none_or(|(_, _, b)| score > b) {
            best = Some((s, y, score));
        }
    }
    let (s, y, _) = best.ok_or(SolveError::Infeasible { flow: new_flow.id })?;
    Ok(extend_plan(base, inst.num_switches(), &[s.0], y))
}

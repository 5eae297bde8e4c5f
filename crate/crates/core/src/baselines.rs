//! Comparison schemes: a fixed-rate sampler on every on-path switch, an
//! accuracy-only allocation, and a threshold-driven adaptive rate rule.

use serde::{Deserialize, Serialize};

use crate::error::SolveError;
use crate::heuristic::aps_offline;
use crate::instance::{check_feasibility, FlowId, ModelParams, ProblemInstance, SamplingPlan, Violation};

/// A fixed-rate plan together with any capacity it oversubscribes.
#[derive(Debug, Clone, PartialEq)]
pub struct FixedRatePlan {
    pub plan: SamplingPlan,
    pub violations: Vec<Violation>,
}

impl FixedRatePlan {
    pub fn is_feasible(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Every switch on a flow's path samples it at `min(rate, offered_rate)`.
/// Overloaded switches are reported in `violations`, never clipped.
pub fn fixed_rate_plan(inst: &ProblemInstance, rate: f64) -> Result<FixedRatePlan, SolveError> {
    if !(rate > 0.0 && rate.is_finite()) {
        return Err(SolveError::InvalidRate(rate));
    }
    let mut plan = SamplingPlan::empty(inst.num_flows(), inst.num_switches());
    for flow in inst.flows() {
        for &s in flow.path.hops() {
            plan.assign(flow.id, s);
        }
        plan.rate[flow.id.0] = rate.min(flow.offered_rate);
    }
    let violations = check_feasibility(&plan, inst)?;
    Ok(FixedRatePlan { plan, violations })
}

/// APS with the cost weight switched off.
pub fn accuracy_only_plan(inst: &ProblemInstance) -> Result<SamplingPlan, SolveError> {
    let params = ModelParams::new(1.0, 0.0, inst.params().per_assignment_cost())?;
    aps_offline(&inst.with_params(params))
}

/// Shape of the adaptive rule, shared by all flows.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AdaptivePolicy {
    /// Change threshold as a fraction of the previous count.
    pub threshold_frac: f64,
    /// Growth factor applied on a large change (> 1).
    pub alpha: f64,
    /// Decay factor applied otherwise (in (0, 1)).
    pub beta: f64,
}

impl Default for AdaptivePolicy {
    fn default() -> Self {
        AdaptivePolicy {
            threshold_frac: 0.1,
            alpha: 2.0,
            beta: 0.5,
        }
    }
}

impl AdaptivePolicy {
    /// Per-flow configuration bounded by `[r_f, offered_rate]`.
    pub fn for_flow(&self, inst: &ProblemInstance, f: FlowId) -> AdaptiveCfg {
        let flow = inst.flow(f);
        AdaptiveCfg {
            policy: *self,
            min_rate: flow.recommended_rate,
            max_rate: flow.offered_rate,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(self.alpha > 1.0 && self.alpha.is_finite()) {
            return Err(format!("alpha must exceed 1, got {}", self.alpha));
        }
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return Err(format!("beta must lie in (0, 1), got {}", self.beta));
        }
        if !(self.threshold_frac >= 0.0 && self.threshold_frac.is_finite()) {
            return Err(format!("threshold_frac must be non-negative, got {}", self.threshold_frac));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptiveCfg {
    pub policy: AdaptivePolicy,
    pub min_rate: f64,
    pub max_rate: f64,
}

/// Next sampling rate from two consecutive packet counts: grow by `alpha` when
/// the count moved by more than the threshold, otherwise decay by `beta`. The
/// result is clamped to `[min_rate, max_rate]`.
pub fn adaptive_polling_step(prev_rate: f64, prev_count: f64, curr_count: f64, cfg: &AdaptiveCfg) -> f64 {
    let threshold = cfg.policy.threshold_frac * prev_count;
    let next = if (curr_count - prev_count).abs() > threshold {
        prev_rate * cfg.policy.alpha
    } else {
        prev_rate * cfg.policy.beta
    };
    next.clamp(cfg.min_rate, cfg.max_rate)
}

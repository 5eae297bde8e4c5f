use ace_core::fixtures::{random_instance, RandomSpec};
use ace_core::heuristic::{aps_offline, aps_offline_with_stats, aps_online};
use ace_core::instance::{
    accuracy_term, check_feasibility, cost_term, objective_value, FlowId, FlowSpec, ModelParams, ProblemInstance,
    SamplingPlan,
};
use ace_core::sim::sweep::sweep_ab;
use ace_core::sim::{constant_schedule, cost_metric, simulate, simulate_with, RatePolicy, SimConfig, SimMode};
use ace_core::topology::{Path, SwitchId, Topology};
use ace_core::{solve_offline_exact, ExactConfig};
use proptest::prelude::*;

fn spec() -> RandomSpec {
    RandomSpec::default()
}

/// Instance plus an arbitrary (possibly infeasible) plan over it.
fn instance_and_plan() -> impl Strategy<Value = (ProblemInstance, SamplingPlan)> {
    any::<u64>().prop_flat_map(|seed| {
        let inst = random_instance(seed, &spec());
        let (nf, ns) = (inst.num_flows(), inst.num_switches());
        let bits = prop::collection::vec(prop::collection::vec(any::<bool>(), ns), nf);
        let rates = prop::collection::vec(0u32..=60, nf);
        (Just(inst), bits, rates).prop_map(|(inst, assignment, rates)| {
            let rate = rates.into_iter().map(|r| 10.0 * r as f64).collect();
            (inst, SamplingPlan { assignment, rate })
        })
    })
}

/// Relabels switches by `perm` and reverses the flow order.
fn permuted(inst: &ProblemInstance, plan: &SamplingPlan, perm: &[usize]) -> (ProblemInstance, SamplingPlan) {
    let topo = inst.topology();
    let mut caps = vec![0.0; perm.len()];
    for (s, &p) in perm.iter().enumerate() {
        caps[p] = topo.capacities()[s];
    }
    let links: Vec<_> = topo.links().map(|l| (perm[l.0 .0], perm[l.1 .0])).collect();
    let new_topo = Topology::new(caps, &links).unwrap();
    let nf = inst.num_flows();
    let order: Vec<usize> = (0..nf).rev().collect();
    let flows = order
        .iter()
        .enumerate()
        .map(|(new_id, &old)| {
            let f = &inst.flows()[old];
            FlowSpec {
                id: FlowId(new_id),
                src: SwitchId(perm[f.src.0]),
                dst: SwitchId(perm[f.dst.0]),
                path: Path::new(f.path.hops().iter().map(|s| SwitchId(perm[s.0])).collect()),
                offered_rate: f.offered_rate,
                recommended_rate: f.recommended_rate,
            }
        })
        .collect();
    let grid = inst.rate_grid().map(|g| order.iter().map(|&old| g[old].clone()).collect());
    let new_inst = ProblemInstance::new(new_topo, flows, *inst.params(), grid).unwrap();
    let mut new_plan = SamplingPlan::empty(nf, perm.len());
    for (new_id, &old) in order.iter().enumerate() {
        for s in 0..perm.len() {
            new_plan.assignment[new_id][perm[s]] = plan.assignment[old][s];
        }
        new_plan.rate[new_id] = plan.rate[old];
    }
    (new_inst, new_plan)
}

/// Same flows with `r_f = 1` and no grid, so any fraction of the offered
/// rate is a legal sampling rate.
fn with_tiny_minimum(inst: &ProblemInstance) -> ProblemInstance {
    let flows = inst
        .flows()
        .iter()
        .map(|f| FlowSpec { recommended_rate: 1.0, ..f.clone() })
        .collect();
    ProblemInstance::new(inst.topology().clone(), flows, *inst.params(), None).unwrap()
}

/// Constraint re-evaluation written independently of `check_feasibility`.
fn satisfies_all(inst: &ProblemInstance, plan: &SamplingPlan) -> bool {
    let eps = 1e-9;
    for (f, flow) in inst.flows().iter().enumerate() {
        let on = |s: usize| flow.path.hops().contains(&SwitchId(s));
        let assigned: Vec<usize> = (0..inst.num_switches()).filter(|&s| plan.assignment[f][s]).collect();
        if assigned.is_empty() || assigned.iter().any(|&s| !on(s)) {
            return false;
        }
        let y = plan.rate[f];
        if y < flow.recommended_rate * (1.0 - eps) || y > flow.offered_rate * (1.0 + eps) {
            return false;
        }
    }
    (0..inst.num_switches()).all(|s| {
        let load: f64 = (0..inst.num_flows()).filter(|&f| plan.assignment[f][s]).map(|f| plan.rate[f]).sum();
        load <= inst.topology().capacities()[s] * (1.0 + eps)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(120))]

    #[test]
    fn objective_is_weighted_difference((inst, plan) in instance_and_plan()) {
        let p = inst.params();
        let lhs = p.a() * accuracy_term(&plan, &inst).unwrap() - p.b() * cost_term(&plan, &inst).unwrap();
        prop_assert!((lhs - objective_value(&plan, &inst).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn objective_survives_relabeling((inst, plan) in instance_and_plan(), shift in 0usize..5) {
        let n = inst.num_switches();
        let perm: Vec<usize> = (0..n).map(|s| (s * (n - 1) + shift) % n).collect();
        // (n - 1) is coprime with n, so this is a permutation
        let (pinst, pplan) = permuted(&inst, &plan, &perm);
        let a = objective_value(&plan, &inst).unwrap();
        let b = objective_value(&pplan, &pinst).unwrap();
        prop_assert!((a - b).abs() < 1e-9);
        prop_assert_eq!(check_feasibility(&plan, &inst).unwrap().len(), check_feasibility(&pplan, &pinst).unwrap().len());
    }

    #[test]
    fn feasible_iff_every_constraint_holds((inst, plan) in instance_and_plan()) {
        let violations = check_feasibility(&plan, &inst).unwrap();
        prop_assert_eq!(violations.is_empty(), satisfies_all(&inst, &plan));
        prop_assert!(violations.iter().all(|v| v.slack() < 0.0));
    }

    #[test]
    fn scaling_weights_keeps_the_argmax(seed in any::<u64>(), k in 0.1f64..10.0) {
        let inst = random_instance(seed, &spec());
        let p = inst.params();
        let scaled = inst.with_params(ModelParams::unnormalized(k * p.a(), k * p.b(), p.per_assignment_cost()).unwrap());
        let base = solve_offline_exact(&inst).unwrap();
        let other = solve_offline_exact(&scaled).unwrap();
        prop_assert_eq!(&base.plan, &other.plan);
        prop_assert!((other.objective - k * base.objective).abs() <= 1e-9 * other.objective.abs().max(1.0));
        prop_assert_eq!(aps_offline(&inst).unwrap(), aps_offline(&scaled).unwrap());
    }

    #[test]
    fn aps_is_feasible_and_bounded(seed in any::<u64>()) {
        let inst = random_instance(seed, &RandomSpec { max_switches: 8, max_flows: 10, ..spec() });
        let (plan, stats) = aps_offline_with_stats(&inst).unwrap();
        prop_assert!(check_feasibility(&plan, &inst).unwrap().is_empty());
        prop_assert!(stats.score_evaluations <= inst.num_flows() * inst.num_switches());
        prop_assert!(stats.rounds <= inst.num_flows());
    }

    #[test]
    fn online_insertion_leaves_existing_rows(seed in any::<u64>(), extra in 0u64..1000) {
        let inst = random_instance(seed, &RandomSpec { max_flows: 3, ..spec() }).without_grid();
        let base = aps_offline(&inst).unwrap();
        let donor = random_instance(seed ^ extra.wrapping_mul(0x9e37_79b9), &spec());
        let topo = inst.topology();
        let d = &donor.flows()[0];
        let (src, dst) = (SwitchId(d.src.0 % topo.num_switches()), SwitchId(d.dst.0 % topo.num_switches()));
        prop_assume!(src != dst);
        let flow = FlowSpec::routed(topo, inst.num_flows(), src, dst, d.offered_rate, d.recommended_rate).unwrap();
        let grown = inst.with_flow(flow.clone(), None).unwrap();
        match aps_online(&inst, &base, &flow, None) {
            Ok(plan) => {
                prop_assert!(check_feasibility(&plan, &grown).unwrap().is_empty());
                for f in 0..inst.num_flows() {
                    prop_assert_eq!(&plan.assignment[f], &base.assignment[f]);
                    prop_assert_eq!(plan.rate[f].to_bits(), base.rate[f].to_bits());
                }
            }
            Err(e) => prop_assert!(e.is_infeasibility(), "{e:?}"),
        }
    }

    #[test]
    fn sweep_trades_accuracy_for_cost(seed in any::<u64>()) {
        let inst = random_instance(seed, &spec());
        let ratios: Vec<(f64, f64)> = (0..=10).map(|i| (i as f64 / 10.0, 1.0 - i as f64 / 10.0)).collect();
        let rows = sweep_ab(&inst, &ratios).unwrap();
        for w in rows.windows(2) {
            prop_assert!(w[1].accuracy_term >= w[0].accuracy_term - 1e-6);
            prop_assert!(w[1].cost_term >= w[0].cost_term - 1e-6, "cost must fall as b grows");
        }
    }

    #[test]
    fn simulation_is_reproducible(seed in any::<u64>(), loss in 0.0f64..0.2) {
        let inst = random_instance(seed, &spec());
        let plan = aps_offline(&inst).unwrap();
        let rates: Vec<f64> = inst.flows().iter().map(|f| f.offered_rate).collect();
        let sched = constant_schedule(&rates, 5).unwrap();
        let a = simulate(&inst, &plan, &sched, loss, seed).unwrap();
        let b = simulate(&inst, &plan, &sched, loss, seed).unwrap();
        prop_assert_eq!(a.to_csv(), b.to_csv());
        prop_assert_eq!(a, b);
    }

    #[test]
    fn expectation_mode_is_unbiased(seed in any::<u64>(), frac in 0.05f64..=1.0) {
        let inst = with_tiny_minimum(&random_instance(seed, &spec()));
        let mut plan = aps_offline(&inst).unwrap();
        let rates: Vec<f64> = inst.flows().iter().map(|f| f.offered_rate).collect();
        for (f, r) in rates.iter().enumerate() {
            plan.rate[f] = frac * r;
        }
        let sched = constant_schedule(&rates, 3).unwrap();
        let cfg = SimConfig { mode: SimMode::Expectation, allow_overload: true, ..SimConfig::new(0.0, seed) };
        let r = simulate_with(&inst, &plan, &sched, &cfg, &RatePolicy::Static).unwrap();
        for (act, meas) in r.actual.iter().zip(&r.measured) {
            for (a, m) in act.iter().zip(meas) {
                prop_assert!((a - m).abs() <= 1e-9 * a.max(1.0));
            }
        }
    }

    #[test]
    fn link_load_is_conserved(seed in any::<u64>(), loss in 0.0f64..0.3) {
        let inst = random_instance(seed, &spec());
        let plan = aps_offline(&inst).unwrap();
        let rates: Vec<f64> = inst.flows().iter().map(|f| f.offered_rate).collect();
        let sched = constant_schedule(&rates, 2).unwrap();
        let cfg = SimConfig { mode: SimMode::Expectation, ..SimConfig::new(loss, seed) };
        let r = simulate_with(&inst, &plan, &sched, &cfg, &RatePolicy::Static).unwrap();
        // each flow puts rate * (1 - loss)^i on its i-th link
        let expected: f64 = inst
            .flows()
            .iter()
            .map(|f| (0..f.path.len() - 1).map(|i| f.offered_rate * (1.0 - loss).powi(i as i32)).sum::<f64>())
            .sum();
        for row in &r.actual {
            let total: f64 = row.iter().sum();
            prop_assert!((total - expected).abs() <= 1e-9 * expected.max(1.0));
        }
    }

    #[test]
    fn cost_metric_sign((inst, plan) in instance_and_plan()) {
        let c = cost_metric(&plan, &inst).unwrap();
        prop_assert!(c >= 0.0);
        let positive_load = (0..inst.num_flows()).any(|f| plan.rate[f] > 0.0 && plan.assignment[f].iter().any(|&x| x));
        prop_assert_eq!(c > 0.0, positive_load);
    }
}

#[test]
fn exact_respects_custom_search_limit() {
    let inst = random_instance(3, &spec());
    let cfg = ExactConfig { search_limit: 1.0 };
    assert!(ace_core::exact::solve_offline_exact_with(&inst, &cfg).is_err());
}

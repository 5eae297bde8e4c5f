//! The branch-and-bound solver against plain enumeration of every
//! (assignment, rate) combination.

use ace_core::fixtures::{random_instance, RandomSpec};
use ace_core::heuristic::aps_offline;
use ace_core::instance::{check_feasibility, objective_value, FlowId, ProblemInstance};
use ace_core::{solve_offline_exact, SolveError};
use proptest::prelude::*;

/// Best objective over all plans, found by walking every x in {0,1}^(F*S)
/// (off-path switches included) and every grid rate. `None` when nothing is
/// feasible.
fn enumerate_best(inst: &ProblemInstance) -> Option<f64> {
    let nf = inst.num_flows();
    let ns = inst.num_switches();
    let grid = inst.rate_grid().unwrap();
    let bits = nf * ns;
    assert!(bits <= 20, "oracle too slow for {bits} bits");
    let p = inst.params();
    let mut best: Option<f64> = None;
    let mut rate_idx = vec![0usize; nf];
    loop {
        let rates: Vec<f64> = (0..nf).map(|f| grid[f][rate_idx[f]]).collect();
        'masks: for mask in 0u32..(1 << bits) {
            let x = |f: usize, s: usize| mask >> (f * ns + s) & 1 == 1;
            for (f, flow) in inst.flows().iter().enumerate() {
                if !(0..ns).any(|s| x(f, s)) {
                    continue 'masks;
                }
                if (0..ns).any(|s| x(f, s) && !flow.path.hops().iter().any(|h| h.0 == s)) {
                    continue 'masks;
                }
            }
            for s in 0..ns {
                let load: f64 = (0..nf).filter(|&f| x(f, s)).map(|f| rates[f]).sum();
                if load > inst.topology().capacities()[s] * (1.0 + 1e-9) {
                    continue 'masks;
                }
            }
            let mut obj = 0.0;
            for f in 0..nf {
                for s in 0..ns {
                    if x(f, s) {
                        obj += p.a() * rates[f] - p.b() * p.per_assignment_cost();
                    }
                }
            }
            if best.is_none_or(|b| obj > b) {
                best = Some(obj);
            }
        }
        // odometer over rate indices
        let mut f = 0;
        loop {
            if f == nf {
                return best;
            }
            rate_idx[f] += 1;
            if rate_idx[f] < grid[f].len() {
                break;
            }
            rate_idx[f] = 0;
            f += 1;
        }
    }
}

fn small() -> RandomSpec {
    RandomSpec {
        max_switches: 4,
        max_flows: 3,
        max_grid: 3,
        roomy: false,
    }
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(150))]

    #[test]
    fn exact_matches_enumeration(seed in any::<u64>()) {
        let inst = random_instance(seed, &small());
        let oracle = enumerate_best(&inst);
        match solve_offline_exact(&inst) {
            Ok(sol) => {
                let best = oracle.expect("solver found a plan the oracle missed");
                prop_assert!(check_feasibility(&sol.plan, &inst).unwrap().is_empty());
                prop_assert!(close(sol.objective, best), "solver {} oracle {}", sol.objective, best);
                prop_assert!(close(objective_value(&sol.plan, &inst).unwrap(), sol.objective));
                for f in 0..inst.num_flows() {
                    prop_assert!(inst.grid(FlowId(f)).unwrap().contains(&sol.plan.rate[f]));
                }
            }
            Err(SolveError::Infeasible { .. }) => prop_assert!(oracle.is_none()),
            Err(e) => prop_assert!(false, "unexpected error {e}"),
        }
    }

    #[test]
    fn aps_never_beats_exact(seed in any::<u64>()) {
        let inst = random_instance(seed, &RandomSpec { max_switches: 4, max_flows: 3, ..RandomSpec::default() });
        let exact = solve_offline_exact(&inst).unwrap();
        let plan = aps_offline(&inst).unwrap();
        prop_assert!(check_feasibility(&plan, &inst).unwrap().is_empty());
        prop_assert!(objective_value(&plan, &inst).unwrap() <= exact.objective + 1e-9);
    }
}

#[test]
fn oracle_agrees_on_fig2() {
    let inst = ace_core::fixtures::fig2();
    assert_eq!(enumerate_best(&inst), Some(160.0));
}

//! Small canonical instances and a seeded random instance generator, shared
//! by tests, benches and the CLI.

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::instance::{FlowSpec, ModelParams, ProblemInstance};
use crate::schema::InstanceFile;
use crate::topology::{bundled, SwitchId, Topology};

pub const FIG2_JSON: &str = include_str!("../data/fig2.json");

/// The five-switch worked example. Both solvers place f1 and f2 on S2 and f3
/// on S5.
pub fn fig2() -> ProblemInstance {
    let file = InstanceFile::from_json(FIG2_JSON).expect("bundled fig2.json parses");
    let topo = Topology::parse(bundled::FIG2).expect("bundled fig2.topo parses");
    file.with_topology(topo).expect("bundled fig2 instance is valid")
}

/// Two flows over a three-switch line, each with a three-rate grid. Small
/// enough for the exact solver, rich enough that the optimum moves with `a:b`.
pub fn grid_line() -> ProblemInstance {
    let topo = Topology::new(vec![400.0, 300.0, 400.0], &[(0, 1), (1, 2)]).unwrap();
    let flows = vec![
        FlowSpec::routed(&topo, 0, SwitchId(0), SwitchId(2), 200.0, 50.0).unwrap(),
        FlowSpec::routed(&topo, 1, SwitchId(1), SwitchId(2), 150.0, 40.0).unwrap(),
    ];
    let grid = vec![vec![50.0, 100.0, 200.0], vec![40.0, 90.0, 150.0]];
    ProblemInstance::new(topo, flows, ModelParams::new(0.5, 0.5, 40.0).unwrap(), Some(grid)).unwrap()
}

/// Bounds for [`random_instance`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomSpec {
    pub max_switches: usize,
    pub max_flows: usize,
    pub max_grid: usize,
    /// Give every switch room for all flows at their minimum rate, which
    /// makes every instance feasible for every solver.
    pub roomy: bool,
}

impl Default for RandomSpec {
    fn default() -> Self {
        RandomSpec {
            max_switches: 5,
            max_flows: 4,
            max_grid: 3,
            roomy: true,
        }
    }
}

/// A connected random topology (random tree plus extra links) with random
/// flows, grids, weights and capacities. All rates are multiples of 10.
pub fn random_instance(seed: u64, spec: &RandomSpec) -> ProblemInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(2..=spec.max_switches.max(2));
    let mut links = Vec::new();
    for i in 1..n {
        links.push((rng.random_range(0..i), i));
    }
    for i in 0..n {
        for j in i + 1..n {
            if !links.contains(&(i, j)) && rng.random_bool(0.3) {
                links.push((i, j));
            }
        }
    }
    let topo = Topology::new(vec![1.0; n], &links).unwrap();

    let nf = rng.random_range(1..=spec.max_flows.max(1));
    let mut flows = Vec::with_capacity(nf);
    let mut grid = Vec::with_capacity(nf);
    for id in 0..nf {
        let src = rng.random_range(0..n);
        let dst = (src + rng.random_range(1..n)) % n;
        let offered = 10 * rng.random_range(5..=40usize);
        let recommended = 10 * rng.random_range(1..=offered / 20);
        let span = (offered - recommended) / 10 + 1;
        let k = rng.random_range(1..=spec.max_grid.max(1).min(span));
        let mut rates: Vec<f64> = index::sample(&mut rng, span, k)
            .into_iter()
            .map(|i| (recommended + 10 * i) as f64)
            .collect();
        rates.sort_by(f64::total_cmp);
        grid.push(rates);
        flows.push(FlowSpec::routed(&topo, id, SwitchId(src), SwitchId(dst), offered as f64, recommended as f64).unwrap());
    }

    let a = rng.random_range(0..=10) as f64 / 10.0;
    let params = ModelParams::new(a, 1.0 - a, 5.0 * rng.random_range(0..=20) as f64).unwrap();

    let floor: f64 = grid.iter().map(|g| g[0]).sum();
    let total: f64 = flows.iter().map(|f| f.offered_rate).sum();
    let caps: Vec<f64> = (0..n)
        .map(|_| {
            if spec.roomy {
                floor + 10.0 * rng.random_range(0..=(total / 10.0) as usize) as f64
            } else {
                10.0 * rng.random_range(1..=(total / 10.0) as usize) as f64
            }
        })
        .collect();
    let topo = Topology::new(caps, &links).unwrap();
    let flows = flows
        .into_iter()
        .map(|f| FlowSpec::routed(&topo, f.id.0, f.src, f.dst, f.offered_rate, f.recommended_rate).unwrap())
        .collect();
    ProblemInstance::new(topo, flows, params, Some(grid)).unwrap()
}

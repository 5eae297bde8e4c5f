//! Seeded scenario generation: random source/destination pairs routed on
//! shortest paths.

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::SimError;
use crate::instance::{FlowSpec, InstanceError, ModelParams, ProblemInstance};
use crate::topology::{SwitchId, Topology};

/// `n` distinct ordered `(src, dst)` pairs drawn uniformly without replacement.
pub fn random_pairs(topo: &Topology, n: usize, seed: u64) -> Result<Vec<(SwitchId, SwitchId)>, SimError> {
    let m = topo.num_switches();
    let available = m * m.saturating_sub(1);
    if n > available {
        return Err(SimError::TooManyPairs { requested: n, available });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(index::sample(&mut rng, available, n)
        .into_iter()
        .map(|k| {
            let src = k / (m - 1);
            let d = k % (m - 1);
            let dst = if d < src { d } else { d + 1 };
            (SwitchId(src), SwitchId(dst))
        })
        .collect())
}

/// One flow per pair on its shortest path, all with the same offered and
/// recommended rate.
pub fn build_instance(
    topo: &Topology,
    pairs: &[(SwitchId, SwitchId)],
    offered_rate: f64,
    recommended_rate: f64,
    params: ModelParams,
) -> Result<ProblemInstance, InstanceError> {
    let flows = pairs
        .iter()
        .enumerate()
        .map(|(i, &(s, d))| FlowSpec::routed(topo, i, s, d, offered_rate, recommended_rate))
        .collect::<Result<Vec<_>, _>>()?;
    ProblemInstance::new(topo.clone(), flows, params, None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::bundled;
    use std::collections::HashSet;

    #[test]
    fn two_switches() {
        let topo = Topology::new(vec![10.0; 2], &[(0, 1)]).unwrap();
        let p = random_pairs(&topo, 1, 3).unwrap();
        assert!(p == [(SwitchId(0), SwitchId(1))] || p == [(SwitchId(1), SwitchId(0))]);
        assert_eq!(random_pairs(&topo, 2, 3).unwrap().len(), 2);
        assert!(matches!(random_pairs(&topo, 3, 3), Err(SimError::TooManyPairs { available: 2, .. })));
    }

    #[test]
    fn seeded() {
        let topo = Topology::parse(bundled::USNET).unwrap();
        assert_eq!(random_pairs(&topo, 10, 5).unwrap(), random_pairs(&topo, 10, 5).unwrap());
        assert_ne!(random_pairs(&topo, 10, 5).unwrap(), random_pairs(&topo, 10, 6).unwrap());
    }

    #[test]
    fn fifty_distinct_on_usnet() {
        let topo = Topology::parse(bundled::USNET).unwrap();
        let pairs = random_pairs(&topo, 50, 1).unwrap();
        assert_eq!(pairs.iter().collect::<HashSet<_>>().len(), 50);
        assert!(pairs.iter().all(|(s, d)| s != d && s.0 < 24 && d.0 < 24));
    }

    #[test]
    fn builds_routed_flows() {
        let topo = Topology::parse(bundled::USNET).unwrap();
        let pairs = random_pairs(&topo, 4, 2).unwrap();
        let inst = build_instance(&topo, &pairs, 100.0, 20.0, ModelParams::new(0.5, 0.5, 1.0).unwrap()).unwrap();
        assert_eq!(inst.num_flows(), 4);
        for (f, (s, d)) in inst.flows().iter().zip(&pairs) {
            assert_eq!((f.src, f.dst), (*s, *d));
            assert_eq!(f.path, topo.shortest_path(*s, *d).unwrap());
        }
    }
}

//! Deterministic routing against exhaustive simple-path enumeration.

use ace_core::topology::{SwitchId, Topology};
use proptest::prelude::*;

fn all_simple_paths(topo: &Topology, src: usize, dst: usize) -> Vec<Vec<usize>> {
    fn walk(topo: &Topology, at: usize, dst: usize, seen: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if at == dst {
            out.push(seen.clone());
            return;
        }
        for n in topo.neighbors(SwitchId(at)) {
            if !seen.contains(&n.0) {
                seen.push(n.0);
                walk(topo, n.0, dst, seen, out);
                seen.pop();
            }
        }
    }
    let mut out = Vec::new();
    walk(topo, src, dst, &mut vec![src], &mut out);
    out
}

fn graph() -> impl Strategy<Value = (usize, Vec<(usize, usize)>)> {
    (2usize..=8).prop_flat_map(|n| {
        let tree = (1..n).map(|i| (0..i).prop_map(move |p| (p, i))).collect::<Vec<_>>();
        let extra = prop::collection::vec((0..n, 0..n), 0..n * 2);
        (Just(n), tree, extra).prop_map(|(n, tree, extra)| {
            let mut links = tree;
            for (a, b) in extra {
                let l = (a.min(b), a.max(b));
                if a != b && !links.iter().any(|&(x, y)| (x.min(y), x.max(y)) == l) {
                    links.push(l);
                }
            }
            (n, links)
        })
    })
}

proptest! {
    #[test]
    fn shortest_then_lexicographically_smallest((n, links) in graph(), a in 0usize..8, b in 0usize..8) {
        let (src, dst) = (a % n, b % n);
        prop_assume!(src != dst);
        let topo = Topology::new(vec![100.0; n], &links).unwrap();
        let got: Vec<usize> = topo.shortest_path(SwitchId(src), SwitchId(dst)).unwrap().hops().iter().map(|s| s.0).collect();
        let mut paths = all_simple_paths(&topo, src, dst);
        paths.sort_by(|p, q| p.len().cmp(&q.len()).then_with(|| p.cmp(q)));
        prop_assert_eq!(&got, &paths[0]);
    }
}

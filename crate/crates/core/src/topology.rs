//! Graph model of the monitored network.
//!
//! Topologies are read from a small line-oriented text format:
//!
//! ```text
//! # comment (also allowed after a directive)
//! switch <id> [capacity=<pps>] [name=<token>]
//! link <id> <id>
//! ```
//!
//! Switch ids must be dense (`0..m`), may be declared in any order, and links
//! may reference switches declared further down the file. Options after the
//! switch id may appear in any order but at most once each. A switch without a
//! `capacity=` option gets [`DEFAULT_CAPACITY_PPS`]. Links are undirected.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::instance::FlowSpec;

/// Sampling capacity assigned to switches that do not declare one.
pub const DEFAULT_CAPACITY_PPS: f64 = 1000.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SwitchId(pub usize);

impl SwitchId {
    #[inline]
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for SwitchId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// An undirected link, stored with the smaller endpoint first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Link(pub SwitchId, pub SwitchId);

impl Link {
    pub fn new(a: SwitchId, b: SwitchId) -> Self {
        if a <= b {
            Link(a, b)
        } else {
            Link(b, a)
        }
    }
}

impl fmt::Display for Link {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.0, self.1)
    }
}

/// Ordered switch sequence from a flow's source to its destination, inclusive.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Path(Vec<SwitchId>);

impl Path {
    /// Wraps a hop list without checking it against a topology; see
    /// [`Topology::validate_path`].
    pub fn new(hops: Vec<SwitchId>) -> Self {
        Path(hops)
    }

    pub fn hops(&self) -> &[SwitchId] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, s: SwitchId) -> bool {
        self.0.contains(&s)
    }

    pub fn src(&self) -> Option<SwitchId> {
        self.0.first().copied()
    }

    pub fn dst(&self) -> Option<SwitchId> {
        self.0.last().copied()
    }

    /// Links traversed in path order.
    pub fn links(&self) -> impl Iterator<Item = Link> + '_ {
        self.0.windows(2).map(|w| Link::new(w[0], w[1]))
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TopologyError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: unknown directive `{directive}`")]
    UnknownDirective { line: usize, directive: String },
    #[error("line {line}: switch {id} declared twice")]
    DuplicateSwitch { line: usize, id: usize },
    #[error("line {line}: link {a}-{b} declared twice")]
    DuplicateLink { line: usize, a: usize, b: usize },
    #[error("line {line}: self-loop on switch {id}")]
    SelfLoop { line: usize, id: usize },
    #[error("line {line}: switch {id} has non-positive capacity {value}")]
    BadCapacity { line: usize, id: usize, value: f64 },
    #[error("line {line}: link references undeclared switch {id}")]
    UnknownSwitch { line: usize, id: usize },
    #[error("switch ids must be dense: {missing} is missing")]
    MissingSwitch { missing: usize },
    #[error("topology has no switches")]
    Empty,
    #[error("topology is disconnected: switch {unreachable} unreachable from switch 0")]
    Disconnected { unreachable: usize },
    #[error("source and destination are both switch {0}")]
    SameEndpoints(usize),
    #[error("switch {0} is not in the topology")]
    NoSuchSwitch(usize),
    #[error("no route from {src} to {dst}")]
    Unreachable { src: usize, dst: usize },
    #[error("invalid path: {0}")]
    InvalidPath(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Topology {
    capacity: Vec<f64>,
    names: Vec<Option<String>>,
    links: BTreeSet<Link>,
    adjacency: Vec<Vec<SwitchId>>,
}

impl Topology {
    /// Builds a topology from per-switch capacities and an undirected edge list.
    pub fn new(capacity: Vec<f64>, links: &[(usize, usize)]) -> Result<Self, TopologyError> {
        let names = vec![None; capacity.len()];
        Self::assemble(capacity, names, links.iter().map(|&(a, b)| (0, a, b)))
    }

    pub fn with_uniform_capacity(
        switches: usize,
        capacity: f64,
        links: &[(usize, usize)],
    ) -> Result<Self, TopologyError> {
        Self::new(vec![capacity; switches], links)
    }

    fn assemble(
        capacity: Vec<f64>,
        names: Vec<Option<String>>,
        links: impl IntoIterator<Item = (usize, usize, usize)>,
    ) -> Result<Self, TopologyError> {
        if capacity.is_empty() {
            return Err(TopologyError::Empty);
        }
        for (id, &c) in capacity.iter().enumerate() {
            if !(c > 0.0 && c.is_finite()) {
                return Err(TopologyError::BadCapacity { line: 0, id, value: c });
            }
        }
        let n = capacity.len();
        let mut set = BTreeSet::new();
        let mut adjacency = vec![Vec::new(); n];
        for (line, a, b) in links {
            if a == b {
                return Err(TopologyError::SelfLoop { line, id: a });
            }
            for id in [a, b] {
                if id >= n {
                    return Err(TopologyError::UnknownSwitch { line, id });
                }
            }
            let link = Link::new(SwitchId(a), SwitchId(b));
            if !set.insert(link) {
                return Err(TopologyError::DuplicateLink {
                    line,
                    a: link.0 .0,
                    b: link.1 .0,
                });
            }
            adjacency[a].push(SwitchId(b));
            adjacency[b].push(SwitchId(a));
        }
        for adj in &mut adjacency {
            adj.sort_unstable();
        }
        let topo = Topology {
            capacity,
            names,
            links: set,
            adjacency,
        };
        let dist = topo.hop_distances(SwitchId(0));
        if let Some(unreachable) = dist.iter().position(Option::is_none) {
            return Err(TopologyError::Disconnected { unreachable });
        }
        Ok(topo)
    }

    /// Parses the topology text format described in the module docs.
    pub fn parse(text: &str) -> Result<Self, TopologyError> {
        let mut switches: BTreeMap<usize, (f64, Option<String>)> = BTreeMap::new();
        let mut links = Vec::new();

        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("");
            let mut tokens = content.split_whitespace();
            let Some(directive) = tokens.next() else {
                continue;
            };
            match directive {
                "switch" => {
                    let id = parse_id(tokens.next(), line, "switch id")?;
                    let mut capacity = None;
                    let mut name = None;
                    for opt in tokens {
                        let (key, value) = opt.split_once('=').ok_or_else(|| syntax(line, format!("expected key=value, got `{opt}`")))?;
                        match key {
                            "capacity" if capacity.is_none() => {
                                let v: f64 = value
                                    .parse()
                                    .map_err(|_| syntax(line, format!("bad capacity `{value}`")))?;
                                if !(v > 0.0 && v.is_finite()) {
                                    return Err(TopologyError::BadCapacity { line, id, value: v });
                                }
                                capacity = Some(v);
                            }
                            "name" if name.is_none() => {
                                if value.is_empty() {
                                    return Err(syntax(line, "empty name".into()));
                                }
                                name = Some(value.to_string());
                            }
                            "capacity" | "name" => {
                                return Err(syntax(line, format!("option `{key}` given twice")))
                            }
                            other => return Err(syntax(line, format!("unknown option `{other}`"))),
                        }
                    }
                    let entry = (capacity.unwrap_or(DEFAULT_CAPACITY_PPS), name);
                    if switches.insert(id, entry).is_some() {
                        return Err(TopologyError::DuplicateSwitch { line, id });
                    }
                }
                "link" => {
                    let a = parse_id(tokens.next(), line, "link endpoint")?;
                    let b = parse_id(tokens.next(), line, "link endpoint")?;
                    if let Some(extra) = tokens.next() {
                        return Err(syntax(line, format!("unexpected token `{extra}`")));
                    }
                    links.push((line, a, b));
                }
                other => {
                    return Err(TopologyError::UnknownDirective {
                        line,
                        directive: other.to_string(),
                    })
                }
            }
        }

        for (expected, &id) in switches.keys().enumerate() {
            if expected != id {
                return Err(TopologyError::MissingSwitch { missing: expected });
            }
        }
        let n = switches.len();
        for &(line, a, b) in &links {
            for id in [a, b] {
                if id >= n {
                    return Err(TopologyError::UnknownSwitch { line, id });
                }
            }
        }
        let (capacity, names) = switches.into_values().unzip();
        Self::assemble(capacity, names, links)
    }

    /// Serializes back to the text format. `parse(to_text())` reproduces `self`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (i, c) in self.capacity.iter().enumerate() {
            out.push_str(&format!("switch {i} capacity={c}"));
            if let Some(name) = &self.names[i] {
                out.push_str(&format!(" name={name}"));
            }
            out.push('\n');
        }
        for l in &self.links {
            out.push_str(&format!("link {} {}\n", l.0, l.1));
        }
        out
    }

    pub fn num_switches(&self) -> usize {
        self.capacity.len()
    }

    pub fn num_links(&self) -> usize {
        self.links.len()
    }

    pub fn switches(&self) -> impl Iterator<Item = SwitchId> {
        (0..self.capacity.len()).map(SwitchId)
    }

    pub fn links(&self) -> impl Iterator<Item = Link> + '_ {
        self.links.iter().copied()
    }

    pub fn capacity(&self, s: SwitchId) -> f64 {
        self.capacity[s.0]
    }

    pub fn capacities(&self) -> &[f64] {
        &self.capacity
    }

    pub fn name(&self, s: SwitchId) -> Option<&str> {
        self.names[s.0].as_deref()
    }

    pub fn neighbors(&self, s: SwitchId) -> &[SwitchId] {
        &self.adjacency[s.0]
    }

    pub fn has_link(&self, a: SwitchId, b: SwitchId) -> bool {
        self.links.contains(&Link::new(a, b))
    }

    pub fn contains(&self, s: SwitchId) -> bool {
        s.0 < self.capacity.len()
    }

    /// Copy of this topology with every capacity replaced by `capacity`.
    pub fn with_capacity(&self, capacity: f64) -> Result<Self, TopologyError> {
        if !(capacity > 0.0 && capacity.is_finite()) {
            return Err(TopologyError::BadCapacity { line: 0, id: 0, value: capacity });
        }
        let mut t = self.clone();
        t.capacity.iter_mut().for_each(|c| *c = capacity);
        Ok(t)
    }

    fn hop_distances(&self, from: SwitchId) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.capacity.len()];
        dist[from.0] = Some(0);
        let mut queue = VecDeque::from([from]);
        while let Some(u) = queue.pop_front() {
            let d = dist[u.0].unwrap();
            for &v in &self.adjacency[u.0] {
                if dist[v.0].is_none() {
                    dist[v.0] = Some(d + 1);
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    /// Minimum-hop path from `src` to `dst`. Among equal-length paths the
    /// lexicographically smallest switch sequence is returned.
    pub fn shortest_path(&self, src: SwitchId, dst: SwitchId) -> Result<Path, TopologyError> {
        for s in [src, dst] {
            if !self.contains(s) {
                return Err(TopologyError::NoSuchSwitch(s.0));
            }
        }
        if src == dst {
            return Err(TopologyError::SameEndpoints(src.0));
        }
        // Distances to dst; walking forward while always taking the smallest
        // neighbour one hop closer yields the lexicographic minimum.
        let dist = self.hop_distances(dst);
        let Some(mut remaining) = dist[src.0] else {
            return Err(TopologyError::Unreachable { src: src.0, dst: dst.0 });
        };
        let mut hops = vec![src];
        let mut cur = src;
        while remaining > 0 {
            let next = self.adjacency[cur.0]
                .iter()
                .copied()
                .find(|v| dist[v.0] == Some(remaining - 1))
                .expect("bfs layer has a predecessor");
            hops.push(next);
            cur = next;
            remaining -= 1;
        }
        Ok(Path(hops))
    }

    /// Checks that `path` is a simple path over existing links.
    pub fn validate_path(&self, path: &Path) -> Result<(), TopologyError> {
        if path.len() < 2 {
            return Err(TopologyError::InvalidPath("fewer than two switches".into()));
        }
        let mut seen = BTreeSet::new();
        for &s in path.hops() {
            if !self.contains(s) {
                return Err(TopologyError::NoSuchSwitch(s.0));
            }
            if !seen.insert(s) {
                return Err(TopologyError::InvalidPath(format!("switch {s} repeated")));
            }
        }
        for w in path.hops().windows(2) {
            if !self.has_link(w[0], w[1]) {
                return Err(TopologyError::InvalidPath(format!("no link {}-{}", w[0], w[1])));
            }
        }
        Ok(())
    }
}

fn syntax(line: usize, msg: String) -> TopologyError {
    TopologyError::Syntax { line, msg }
}

fn parse_id(token: Option<&str>, line: usize, what: &str) -> Result<usize, TopologyError> {
    let token = token.ok_or_else(|| syntax(line, format!("missing {what}")))?;
    token
        .parse()
        .map_err(|_| syntax(line, format!("bad {what} `{token}`")))
}

/// Flow-by-switch indicator: `get(f, s)` is true iff switch `s` lies on the
/// path of flow `f`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraversalMatrix {
    switches: usize,
    rows: Vec<Vec<bool>>,
}

impl TraversalMatrix {
    pub fn num_flows(&self) -> usize {
        self.rows.len()
    }

    pub fn num_switches(&self) -> usize {
        self.switches
    }

    pub fn get(&self, flow: usize, s: SwitchId) -> bool {
        self.rows[flow][s.0]
    }

    pub fn row(&self, flow: usize) -> &[bool] {
        &self.rows[flow]
    }
}

pub fn traversal_matrix(topo: &Topology, flows: &[FlowSpec]) -> Result<TraversalMatrix, TopologyError> {
    let m = topo.num_switches();
    let mut rows = Vec::with_capacity(flows.len());
    for flow in flows {
        let mut row = vec![false; m];
        for &s in flow.path.hops() {
            if !topo.contains(s) {
                return Err(TopologyError::NoSuchSwitch(s.0));
            }
            row[s.0] = true;
        }
        rows.push(row);
    }
    Ok(TraversalMatrix { switches: m, rows })
}

/// Topology files shipped with the crate.
pub mod bundled {
    pub const USNET: &str = include_str!("../data/usnet.topo");
    pub const DARKSTRAND: &str = include_str!("../data/darkstrand.topo");
    pub const FIG2: &str = include_str!("../data/fig2.topo");

    /// Resolves `usnet`, `darkstrand` or `fig2`, with or without a `.topo` suffix.
    pub fn lookup(name: &str) -> Option<&'static str> {
        match name.trim_end_matches(".topo").to_ascii_lowercase().as_str() {
            "usnet" => Some(USNET),
            "darkstrand" => Some(DARKSTRAND),
            "fig2" => Some(FIG2),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ids(v: &[usize]) -> Vec<SwitchId> {
        v.iter().map(|&i| SwitchId(i)).collect()
    }

    #[test]
    fn parses_minimal_line() {
        let t = Topology::parse("switch 0 capacity=1000\nswitch 1 capacity=1000\nswitch 2 capacity=1000\nlink 0 1\nlink 1 2\n").unwrap();
        assert_eq!(t.num_switches(), 3);
        assert_eq!(t.num_links(), 2);
        assert_eq!(t.capacity(SwitchId(2)), 1000.0);
    }

    #[test]
    fn parsing_is_order_independent() {
        let a = Topology::parse("switch 0\nswitch 1 name=b\nswitch 2\nlink 0 1\nlink 1 2").unwrap();
        let b = Topology::parse("link 2 1\n# hi\nswitch 2\nlink 1 0\nswitch 1 name=b\nswitch 0 capacity=1000").unwrap();
        assert_eq!(a, b);
        assert_eq!(a.name(SwitchId(1)), Some("b"));
    }

    #[test]
    fn defaults_capacity() {
        let t = Topology::parse("switch 0\nswitch 1\nlink 0 1").unwrap();
        assert_eq!(t.capacities(), &[DEFAULT_CAPACITY_PPS, DEFAULT_CAPACITY_PPS]);
    }

    #[test]
    fn rejects_bad_files() {
        let cases: &[(&str, fn(&TopologyError) -> bool)] = &[
            ("switch 0\nswitch 0\n", |e| matches!(e, TopologyError::DuplicateSwitch { line: 2, id: 0 })),
            ("switch 0\nswitch 1\nlink 0 1\nlink 1 0", |e| matches!(e, TopologyError::DuplicateLink { line: 4, .. })),
            ("switch 0 capacity=0\n", |e| matches!(e, TopologyError::BadCapacity { line: 1, .. })),
            ("switch 0 capacity=-5\n", |e| matches!(e, TopologyError::BadCapacity { .. })),
            ("switch 0\nswitch 1\nswitch 2\nlink 0 1", |e| matches!(e, TopologyError::Disconnected { unreachable: 2 })),
            ("switch 0\nrouter 1", |e| matches!(e, TopologyError::UnknownDirective { line: 2, .. })),
            ("switch x", |e| matches!(e, TopologyError::Syntax { line: 1, .. })),
            ("switch 0\nswitch 1\nlink 0", |e| matches!(e, TopologyError::Syntax { line: 3, .. })),
            ("switch 0 colour=red", |e| matches!(e, TopologyError::Syntax { .. })),
            ("switch 0\nswitch 2\nlink 0 2", |e| matches!(e, TopologyError::MissingSwitch { missing: 1 })),
            ("switch 0\nswitch 1\nlink 0 5", |e| matches!(e, TopologyError::UnknownSwitch { line: 3, id: 5 })),
            ("switch 0\nlink 0 0", |e| matches!(e, TopologyError::SelfLoop { line: 2, .. })),
            ("# nothing\n", |e| matches!(e, TopologyError::Empty)),
        ];
        for (text, check) in cases {
            let err = Topology::parse(text).unwrap_err();
            assert!(check(&err), "{text:?} gave {err:?}");
        }
    }

    #[test]
    fn text_round_trip() {
        let t = Topology::parse(bundled::USNET).unwrap();
        assert_eq!(Topology::parse(&t.to_text()).unwrap(), t);
    }

    #[test]
    fn bundled_counts() {
        let usnet = Topology::parse(bundled::USNET).unwrap();
        assert_eq!((usnet.num_switches(), usnet.num_links()), (24, 42));
        let dark = Topology::parse(bundled::DARKSTRAND).unwrap();
        assert_eq!((dark.num_switches(), dark.num_links()), (28, 31));
        assert!(bundled::lookup("USNET.topo").is_some());
        assert!(bundled::lookup("geant").is_none());
    }

    #[test]
    fn shortest_path_line_and_square() {
        let line = Topology::with_uniform_capacity(3, 1000.0, &[(0, 1), (1, 2)]).unwrap();
        assert_eq!(line.shortest_path(SwitchId(0), SwitchId(2)).unwrap().hops(), ids(&[0, 1, 2]));

        let square = Topology::with_uniform_capacity(4, 1000.0, &[(0, 1), (1, 2), (0, 3), (3, 2)]).unwrap();
        assert_eq!(square.shortest_path(SwitchId(0), SwitchId(2)).unwrap().hops(), ids(&[0, 1, 2]));
        assert_eq!(square.shortest_path(SwitchId(2), SwitchId(0)).unwrap().hops(), ids(&[2, 1, 0]));
    }

    #[test]
    fn shortest_path_rejects_degenerate() {
        let line = Topology::with_uniform_capacity(3, 1000.0, &[(0, 1), (1, 2)]).unwrap();
        assert_eq!(line.shortest_path(SwitchId(0), SwitchId(0)), Err(TopologyError::SameEndpoints(0)));
        assert_eq!(line.shortest_path(SwitchId(0), SwitchId(9)), Err(TopologyError::NoSuchSwitch(9)));
    }

    #[test]
    fn validate_path_checks_links_and_repeats() {
        let line = Topology::with_uniform_capacity(3, 1000.0, &[(0, 1), (1, 2)]).unwrap();
        assert!(line.validate_path(&Path::new(ids(&[0, 1, 2]))).is_ok());
        assert!(line.validate_path(&Path::new(ids(&[0, 2]))).is_err());
        assert!(line.validate_path(&Path::new(ids(&[0, 1, 0]))).is_err());
        assert!(line.validate_path(&Path::new(ids(&[1]))).is_err());
    }
}

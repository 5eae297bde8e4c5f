//! JSON instance files.
//!
//! ```json
//! {
//!   "topology": "usnet",
//!   "params": { "a": 0.5, "b": 0.5, "per_assignment_cost": 10.0 },
//!   "flows": [ { "src": 0, "dst": 2, "offered_rate": 200.0, "recommended_rate": 100.0 } ],
//!   "rate_grid": [[100.0, 150.0]]
//! }
//! ```
//!
//! `topology` is a file path (relative to the instance file) or the name of a
//! bundled topology. A flow without `path` is routed on the shortest path.

use std::fs;
use std::path::{Path as FsPath, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::instance::{FlowId, FlowSpec, InstanceError, ModelParams, ProblemInstance};
use crate::topology::{bundled, Path, SwitchId, Topology, TopologyError};

#[derive(Debug, Error)]
pub enum SchemaError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("topology `{name}`: {source}")]
    Topology {
        name: String,
        #[source]
        source: TopologyError,
    },
    #[error("topology `{0}` is neither a file nor a bundled topology")]
    UnknownTopology(String),
    #[error(transparent)]
    Instance(#[from] InstanceError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowEntry {
    pub src: usize,
    pub dst: usize,
    pub offered_rate: f64,
    pub recommended_rate: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub topology: String,
    pub params: ModelParams,
    pub flows: Vec<FlowEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rate_grid: Option<Vec<Vec<f64>>>,
}

impl InstanceFile {
    pub fn from_json(text: &str) -> Result<Self, SchemaError> {
        Ok(serde_json::from_str(text)?)
    }

    /// Resolves the topology (relative to `base_dir` when given) and builds
    /// the validated instance.
    pub fn into_instance(self, base_dir: Option<&FsPath>) -> Result<ProblemInstance, SchemaError> {
        let topo = load_topology(&self.topology, base_dir)?;
        self.with_topology(topo)
    }

    pub fn with_topology(self, topo: Topology) -> Result<ProblemInstance, SchemaError> {
        let mut flows = Vec::with_capacity(self.flows.len());
        for (i, e) in self.flows.into_iter().enumerate() {
            let (src, dst) = (SwitchId(e.src), SwitchId(e.dst));
            let flow = match e.path {
                Some(hops) => FlowSpec {
                    id: FlowId(i),
                    src,
                    dst,
                    path: Path::new(hops.into_iter().map(SwitchId).collect()),
                    offered_rate: e.offered_rate,
                    recommended_rate: e.recommended_rate,
                },
                None => FlowSpec::routed(&topo, i, src, dst, e.offered_rate, e.recommended_rate)?,
            };
            flows.push(flow);
        }
        Ok(ProblemInstance::new(topo, flows, self.params, self.rate_grid)?)
    }

    /// Inverse of [`InstanceFile::into_instance`], with explicit paths.
    pub fn from_instance(inst: &ProblemInstance, topology: impl Into<String>) -> Self {
        InstanceFile {
            topology: topology.into(),
            params: *inst.params(),
            flows: inst
                .flows()
                .iter()
                .map(|f| FlowEntry {
                    src: f.src.0,
                    dst: f.dst.0,
                    offered_rate: f.offered_rate,
                    recommended_rate: f.recommended_rate,
                    path: Some(f.path.hops().iter().map(|s| s.0).collect()),
                })
                .collect(),
            rate_grid: inst.rate_grid().map(<[_]>::to_vec),
        }
    }
}

pub fn parse_instance(text: &str, base_dir: Option<&FsPath>) -> Result<ProblemInstance, SchemaError> {
    InstanceFile::from_json(text)?.into_instance(base_dir)
}

pub fn load_instance(path: &FsPath) -> Result<ProblemInstance, SchemaError> {
    let text = read(path)?;
    parse_instance(&text, path.parent())
}

/// A topology file path, tried relative to `base_dir` first, or a bundled name.
pub fn load_topology(name: &str, base_dir: Option<&FsPath>) -> Result<Topology, SchemaError> {
    let candidates = base_dir
        .map(|d| d.join(name))
        .into_iter()
        .chain(std::iter::once(PathBuf::from(name)));
    for p in candidates {
        if p.is_file() {
            let text = read(&p)?;
            return Topology::parse(&text).map_err(|source| SchemaError::Topology {
                name: p.display().to_string(),
                source,
            });
        }
    }
    let text = bundled::lookup(name).ok_or_else(|| SchemaError::UnknownTopology(name.to_string()))?;
    Topology::parse(text).map_err(|source| SchemaError::Topology {
        name: name.to_string(),
        source,
    })
}

fn read(path: &FsPath) -> Result<String, SchemaError> {
    fs::read_to_string(path).map_err(|source| SchemaError::Io {
        path: path.to_path_buf(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const LINE: &str = r#"{
        "topology": "fig2",
        "params": { "a": 0.5, "b": 0.5, "per_assignment_cost": 1.0 },
        "flows": [ { "src": 0, "dst": 2, "offered_rate": 100.0, "recommended_rate": 10.0 } ]
    }"#;

    #[test]
    fn routes_missing_paths() {
        let inst = parse_instance(LINE, None).unwrap();
        assert_eq!(inst.flows()[0].path.hops(), &[SwitchId(0), SwitchId(1), SwitchId(2)]);
        assert!(inst.rate_grid().is_none());
    }

    #[test]
    fn round_trips() {
        let inst = crate::fixtures::fig2();
        let file = InstanceFile::from_instance(&inst, "fig2");
        let text = serde_json::to_string(&file).unwrap();
        assert_eq!(parse_instance(&text, None).unwrap(), inst);
    }

    #[test]
    fn rejects_bad_files() {
        assert!(matches!(parse_instance("{", None), Err(SchemaError::Json(_))));
        let unknown = LINE.replace("\"fig2\"", "\"nowhere\"");
        assert!(matches!(parse_instance(&unknown, None), Err(SchemaError::UnknownTopology(_))));
        let extra = LINE.replace("\"flows\"", "\"colour\": 1, \"flows\"");
        assert!(matches!(parse_instance(&extra, None), Err(SchemaError::Json(_))));
        let weights = LINE.replace("\"b\": 0.5", "\"b\": 0.6");
        assert!(parse_instance(&weights, None).is_err());
        let off_path = LINE.replace("\"recommended_rate\": 10.0", "\"recommended_rate\": 10.0, \"path\": [0, 2]");
        assert!(matches!(parse_instance(&off_path, None), Err(SchemaError::Instance(_))));
    }

    #[test]
    fn topology_file_beside_instance() {
        let dir = std::env::temp_dir().join(format!("ace-schema-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        fs::write(dir.join("pair.topo"), "switch 0\nswitch 1\nlink 0 1\n").unwrap();
        fs::write(dir.join("inst.json"), LINE.replace("\"fig2\"", "\"pair.topo\"").replace("\"dst\": 2", "\"dst\": 1")).unwrap();
        let inst = load_instance(&dir.join("inst.json")).unwrap();
        assert_eq!(inst.num_switches(), 2);
        assert!(matches!(load_instance(&dir.join("missing.json")), Err(SchemaError::Io { .. })));
        fs::remove_dir_all(&dir).unwrap();
    }
}

//! Measurement planning for software-defined networks: pick which switches
//! sample which flows and at what rate, trading measurement accuracy against
//! sampling cost.
//!
//! - [`topology`]: switch graphs, shortest-path routing, bundled topologies.
//! - [`instance`]: flows, weights, plans, objective and feasibility.
//! - [`exact`]: branch-and-bound over discrete rate grids.
//! - [`heuristic`]: the greedy APS allocator, offline and online.
//! - [`baselines`]: fixed-rate, accuracy-only and adaptive-rate comparisons.
//! - [`sim`]: lossy traffic replay, accuracy/cost metrics, weight sweeps.

pub mod baselines;
pub mod error;
pub mod exact;
pub mod fixtures;
pub mod heuristic;
pub mod instance;
pub mod schema;
pub mod sim;
pub mod topology;
pub mod units;

pub use error::SolveError;
pub use exact::{solve_offline_exact, solve_online_exact, ExactConfig, ExactSolution};
pub use heuristic::{aps_offline, aps_online};
pub use instance::{
    accuracy_term, check_feasibility, cost_term, objective_value, FlowId, FlowSpec, InstanceError, ModelParams,
    ProblemInstance, SamplingPlan, Violation,
};
pub use topology::{Link, Path, SwitchId, Topology, TopologyError};

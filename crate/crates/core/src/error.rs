use thiserror::Error;

use crate::instance::{FlowId, InstanceError, Violation};

/// Failure modes shared by the planners.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error(transparent)]
    Instance(#[from] InstanceError),
    #[error("the exact solver needs a rate grid")]
    MissingGrid,
    #[error("search space of {nominal:.3e} candidates exceeds the limit of {limit:.3e}")]
    SearchLimit { nominal: f64, limit: f64 },
    #[error("infeasible: flow {flow} cannot be sampled within the remaining capacity")]
    Infeasible { flow: FlowId },
    #[error("base plan is infeasible ({} violations)", .0.len())]
    InfeasibleBase(Vec<Violation>),
    #[error("sampling rate must be positive, got {0}")]
    InvalidRate(f64),
}

impl SolveError {
    /// True for outcomes caused by the model having no feasible plan, as
    /// opposed to bad input or guard rails.
    pub fn is_infeasibility(&self) -> bool {
        matches!(self, SolveError::Infeasible { .. } | SolveError::InfeasibleBase(_))
    }
}

//! Closed-loop simulation: recorded traffic is replayed from traces while
//! the ego is planned online and moved as a point mass.
//!
//! The other vehicles in the loop follow their traces and never react to the
//! ego; the IDM only drives them inside the planner's belief.

mod config;
mod run;
mod scenario;

pub use config::{ConfigFile, PlannerConfig, SWEEPABLE_PARAMS};
pub use run::{run_simulation, write_run_log, RunResult, StepRecord};
pub use scenario::{
    interpolate_trace, load_scenario, load_scenario_file, EgoSpec, PathRef, Scenario, TraceSample, TracedVehicle,
};

use thiserror::Error;

use crate::abt::SolverError;
use crate::domain::DomainError;
use crate::topology::TopologyError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("malformed scenario: {0}")]
    Parse(String),
    #[error("ego path {0} is not an entrance-to-exit path of the map")]
    UnknownPath(String),
    #[error("trace of vehicle {vehicle} is not strictly increasing in time at sample {index}")]
    NonMonotoneTrace { vehicle: usize, index: usize },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error(transparent)]
    Solver(#[from] SolverError),
}

impl SimError {
    /// Errors caused by the scenario or map rather than the configuration.
    pub fn is_scenario_error(&self) -> bool {
        matches!(
            self,
            SimError::Io { .. }
                | SimError::Parse(_)
                | SimError::UnknownPath(_)
                | SimError::NonMonotoneTrace { .. }
                | SimError::Topology(_)
        )
    }
}

use std::path::PathBuf;

use thiserror::Error;

/// Errors raised while building or validating domain values.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("subtask unit must be positive, got {0}")]
    InvalidSubtaskUnit(f64),
    #[error("no work: the task list is empty")]
    NoWork,
    #[error("task {task}: {field} must be positive, got {value}")]
    NonPositiveTaskField { task: u32, field: &'static str, value: f64 },
    #[error("vehicle {vehicle}: {field} is out of range ({value})")]
    InvalidVehicle {
        vehicle: u32,
        field: &'static str,
        value: f64,
    },
    #[error("duplicate vehicle id {0}")]
    DuplicateVehicle(u32),
    #[error("matrix shape mismatch: expected {expected_rows}x{expected_cols}, got {rows}x{cols}")]
    ShapeMismatch {
        expected_rows: usize,
        expected_cols: usize,
        rows: usize,
        cols: usize,
    },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CommsError {
    #[error("channel parameter {field} must be positive, got {value}")]
    InvalidChannel { field: &'static str, value: f64 },
    #[error("subtask count must be at least 1")]
    NoSubtasks,
    #[error("destination is unreachable (hop count 0 or missing)")]
    Unreachable,
    #[error("subtask size must be positive, got {0}")]
    InvalidSize(f64),
}

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },
    #[error("vehicle {vehicle}: timestamps not strictly increasing at t={time}")]
    NonMonotone { vehicle: u32, time: f64 },
    #[error("time {time} is outside the trace horizon [{start}, {end}]")]
    OutOfHorizon { time: f64, start: f64, end: f64 },
    #[error("unknown vehicle id {0}")]
    UnknownVehicle(u32),
    #[error("vehicle {vehicle} has no position at t={time}")]
    Absent { vehicle: u32, time: f64 },
    #[error("invalid mobility parameter {field}: {value}")]
    InvalidParam { field: &'static str, value: f64 },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CostError {
    #[error("subtask {subtask} has no candidate vehicle")]
    EmptyCandidates { subtask: usize },
    #[error("vehicle {vehicle}: compute capacity must be positive")]
    NoCompute { vehicle: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Comms(#[from] CommsError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolveError {
    #[error("no constraint-satisfying vehicle for subtask {subtask}")]
    Infeasible { subtask: usize },
    #[error("no feasible assignment exists")]
    NoFeasibleAssignment,
    #[error("instance too large for exhaustive search: {vehicles}^{subtasks} exceeds cap {cap}")]
    TooLarge { vehicles: usize, subtasks: usize, cap: u64 },
    #[error("unknown solver '{0}' (expected hgsa|random|df|scf|ssf|brute)")]
    UnknownSolver(String),
    #[error("invalid annealing schedule: {0}")]
    InvalidSchedule(String),
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("invalid value for {field}: {message}")]
    Invalid { field: String, message: String },
    #[error("override '{0}' is not of the form key=value")]
    BadOverride(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Trace(#[from] TraceError),
}

impl ConfigError {
    pub(crate) fn invalid(field: impl Into<String>, message: impl Into<String>) -> Self {
        ConfigError::Invalid {
            field: field.into(),
            message: message.into(),
        }
    }
}

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Trace(#[from] TraceError),
    #[error(transparent)]
    Cost(#[from] CostError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("sweep needs at least one axis value")]
    EmptySweep,
}

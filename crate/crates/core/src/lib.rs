//! Cooperative task offloading among vehicles on a freeway.
//!
//! Tasks on one vehicle are split into equal-size subtasks and spread over
//! the vehicles reachable by multi-hop V2V links. The crate models the
//! channel and compute delays, estimates how long each vehicle stays in
//! range, filters unlikely-to-finish candidates, and assigns subtasks with
//! a greedy-seeded simulated annealing solver or one of several baselines.
//! [`harness`] replays a plan against a mobility trace, re-offloading work
//! from vehicles that leave before finishing.

pub mod candidate;
pub mod cli;
pub mod comms;
pub mod config;
pub mod cost;
pub mod error;
pub mod harness;
pub mod mobility;
pub mod model;
pub mod solvers;

pub use config::ScenarioConfig;
pub use error::{CommsError, ConfigError, CostError, HarnessError, ModelError, SolveError, TraceError};

//! End-to-end experiments: plan, execute on a continuous timeline, react to
//! departures, feed outcomes back into the candidate model, and report.
//!
//! A vehicle works through its queue in assignment order. A subtask whose
//! finishing time is at or after its vehicle's departure is lost; at the
//! departure instant every lost subtask is re-planned, with the same solver
//! and filter mode, over the vehicles still present. Transfer costs are paid
//! again and the vehicles' outstanding work counts as initial load.

mod metrics;
mod sim;
mod sweep;
mod world;

pub use metrics::{write_metrics_csv, MetricsRecord};
pub use sim::{planning_rng, run_scenario, run_world, FilterMode, SimEvent, SimEventKind, Simulation, Simulator};
pub use sweep::{cell_config, run_sweep, SweepAxis, SweepSpec};
pub use world::World;

//! Vehicle trajectories, instantaneous connectivity and stay-time estimation.

pub mod freeway;
pub mod graph;
pub mod stay;
pub mod trace;

pub use freeway::{gen_freeway_trace, kmh_to_mps, FreewayParams};
pub use graph::{connectivity_at, hop_count, ConnectivityGraph};
pub use stay::{estimate_stay, estimate_stays, StayEstimate, StayScan};
pub use trace::{load_trace, read_trace, write_trace, TraceSample, TraceSet, Trajectory};

//! Heap-faithful execution and the well-behavedness monitor.

pub mod config;
pub mod heap;
pub mod monitor;
pub mod sched;
pub mod semantics;
pub mod tracker;

pub use config::{leaves, normalize, Configuration};
pub use heap::{Endpoint, Heap, Message};
pub use monitor::{monitor, MonitorVerdict};
pub use sched::{explore, replay, run, run_tracked, successors, ExploreReport, RunResult, TraceEvent, Violation, DEFAULT_STATE_BUDGET};
pub use semantics::{analyze, redexes, step, Effect, Marker, Redex, Rule, Stepped};
pub use tracker::EnvTracker;

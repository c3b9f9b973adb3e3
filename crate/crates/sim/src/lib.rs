//! Deterministic discrete-event simulation of the vehicular protocol.
//!
//! A [`Scenario`] fixes the seed, topology, parameters and a schedule of
//! honest and adversarial actions. [`run_scenario`] plays it on a simulated
//! millisecond clock with per-link latency and optional loss, and returns an
//! [`EventLog`] that is byte-identical across runs of the same scenario.

mod log;
mod runner;
mod scenario;

pub use log::{EventLog, Origin, Record, Summary};
pub use runner::run_scenario;
pub use scenario::{Action, Params, Scenario, ScenarioError, ScheduledEvent, Topology};

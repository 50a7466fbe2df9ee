//! Deterministic packet-level discrete-event simulator.
//!
//! Drop-tail FIFO links, Poisson background sources, RRR-controlled and TCP
//! Reno endpoints on a dumbbell topology. Acknowledgments return over a
//! delay-only reverse path.

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub mod engine;
pub mod event;
pub mod link;
pub mod packet;
pub mod poisson;
pub mod reno;
pub mod rrrp;
pub mod topology;
pub mod trace;

pub use engine::{run, Action, ScheduledAction, SimConfig};
pub use link::LinkSpec;
pub use poisson::PoissonConfig;
pub use reno::RenoConfig;
pub use rrrp::RrrpConfig;
pub use topology::{build_dumbbell, FlowKind, FlowSpec, Protocol, Topology};
pub use trace::{write_trace, EventLog, FlowCounters, Sample, TraceKind, TraceRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FlowId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LinkId(pub u32);

impl FlowId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl LinkId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("simulation stalled at t = {time}: no pending events while flows are active")]
    Stalled { time: f64 },
    #[error("invariant violated: {0}")]
    InvariantViolated(String),
}

//! Relative rate reduction (RRR) congestion control.
//!
//! * [`fluid`]: macroscopic link and path relations.
//! * [`feedback`]: target-reduction feedback functions and the rate update.
//! * [`operating_point`]: TCP response curve and the TCP/RRR bandwidth split.
//! * [`sim`]: packet-level discrete-event simulator.
//! * [`scenario`]: canned experiments and their TOML form.
//! * [`metrics`]: throughput, loss, fairness and smoothness over simulation logs.
//! * [`report`]: CSV output.

pub mod error;
pub mod feedback;
pub mod fluid;
pub mod metrics;
pub mod operating_point;
pub mod report;
pub mod scenario;
pub mod sim;
pub mod units;

pub use error::ModelError;
pub use feedback::{Estimator, FeedbackFunction, RateEstimatorWindow};
pub use operating_point::{OperatingPoint, TcpFluidCurve};
pub use scenario::{run_scenario, ScenarioSpec};
pub use units::{Probability, Rate};

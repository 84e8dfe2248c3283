//! Threshold-based distributed opportunistic scheduling.
//!
//! Users transmit only when their instantaneous capacity exceeds a
//! threshold. Extreme-value theory gives the thresholds and a Poisson
//! model of exceedances; the [`sim`] module checks every prediction by
//! slot-level Monte Carlo.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod error;
pub mod evt;
pub mod mimo;
pub mod point_process;
pub mod report;
pub mod scenario;
pub mod sim;
pub mod special;
pub mod stats;

pub use analytic::{AnalyticReport, Scheme};
pub use error::{Error, Result};
pub use evt::{GevParams, NormConstants, TailModel};
pub use point_process::{RateModel, RateVector, Thresholds, UserProfile};
pub use report::{ResultRecord, Sweep};
pub use sim::{ScenarioConfig, SimStats, SlotOutcome};

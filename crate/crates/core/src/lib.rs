//! Reliability and secrecy analysis of a NOMA downlink with an ambient
//! backscatter tag under transmitter and receiver I/Q imbalance.
//!
//! The crate provides the imbalance model, instantaneous SINRs, closed-form
//! outage and intercept probabilities, and a seeded Monte Carlo estimator
//! for checking them.

pub mod analytic;
pub mod channel;
pub mod config;
pub mod error;
pub mod harness;
pub mod iqi;
pub mod metric;
pub mod monte_carlo;
pub mod sinr;
pub mod special;

pub use analytic::{AnalyticOptions, AnalyticValue, Branch};
pub use channel::{ChannelVariances, Link, Receiver, SystemParams, Thresholds};
pub use error::{Error, Result};
pub use iqi::{IqiProfile, MismatchParams};
pub use metric::{Metric, User};
pub use monte_carlo::{McOptions, MetricEstimate};

//! Age of information under group updating.
//!
//! `n` sources report a binary status to a monitor. Sources are split into
//! groups of `k`; a group with no positive status is cleared by a single
//! aggregate update, otherwise the aggregate update is followed by one
//! update per member. This crate provides
//!
//! - [`model`]: configurations, status sampling and service-time rules,
//! - [`analytic`]: closed-form cycle moments and average age, with a
//!   binomial-convolution oracle and a `2^n` enumeration oracle,
//! - [`lambertw`]: the real `W_0` and `W_{-1}` branches,
//! - [`optimize`]: optimal group sizes for the age metric and for the
//!   expected-number-of-tests metric, and the efficiency thresholds,
//! - [`sim`]: a seeded Monte Carlo simulator with a renewal-reward age
//!   estimator,
//! - [`experiments`]: CSV sweeps and the analytic/oracle/simulation
//!   validation report used by the `group-updating` binary.

pub mod analytic;
pub mod error;
pub mod experiments;

pub mod lambertw;
pub mod model;
pub mod optimize;
pub mod sim;

pub use error::{Error, Result};
pub use model::SystemConfig;

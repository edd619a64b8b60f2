//! Equilibrium solvers, an agent-based simulator, and follow-graph analytics
//! for attention-bartering economies on social platforms.
//!
//! The crate has three layers:
//!
//! * analytic solvers — [`homogeneous`] (club partitions for a uniform
//!   ability population) and [`heterogeneous`] (reciprocal-following fixed
//!   points when matching is probabilistic);
//! * a discrete-agent simulator ([`abm`]) used to cross-check the analytic
//!   predictions;
//! * follow-graph analytics ([`analytics`]) for measured or synthetic data:
//!   degree statistics, percentile series, OLS residual ability proxies, and
//!   kernel density estimates.
//!
//! [`model`] holds the shared vocabulary (attention shapes, parameters,
//! clubs, outcome records); [`export`] renders results to TOML and CSV.

pub mod abm;
pub mod analytics;
pub mod error;
pub mod export;
pub mod heterogeneous;
pub mod homogeneous;
pub mod model;
pub mod synth;

pub use error::{Error, Result};

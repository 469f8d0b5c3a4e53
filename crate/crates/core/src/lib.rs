//! Stochastic-geometry toolkit for power-ratio fractional frequency reuse (FFR)
//! in ultra-dense cellular networks.
//!
//! Base stations and users are homogeneous Poisson point processes. A user is a
//! cell-edge user (CEU) when the fading-weighted power it receives from its
//! nearest base station is less than `T` times the power from the second
//! nearest one; otherwise it is a cell-center user (CCU). CEUs are served with
//! `a` times the CCU transmit power.
//!
//! The crate is split into:
//!
//! * [`geometry`]: Poisson sampling, nearest-BS queries and association.
//! * [`pathloss`]: the stretched exponential attenuation law.
//! * [`ffr`]: classification rule, its closed-form probability and power levels.
//! * [`analysis`]: joint nearest-distance density and the network-averaged
//!   CEU probability by adaptive quadrature.
//! * [`simulator`]: the Monte Carlo engine for downlink SIR coverage.
//! * [`experiments`]: sweeps, calibration and CSV/JSON output.

pub mod analysis;
pub mod error;
pub mod experiments;
pub mod ffr;
pub mod geometry;
pub mod pathloss;
pub mod quadrature;
pub mod rng;
pub mod simulator;
pub mod stats;

pub use error::{Error, Result};

/// Converts a decibel value to a linear power ratio.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Converts a linear power ratio to decibels.
pub fn linear_to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

//! Simulation and analysis of SIR-threshold based probe-and-transmit
//! scheduling in Poisson wireless ad hoc networks.
//!
//! The crate is organised bottom-up:
//!
//! * [`geometry`] samples Poisson transmitter fields and receiver placements.
//! * [`channel`] turns a sample into a slot realization (fading, path loss)
//!   and evaluates SIR for any active subset.
//! * [`scheduling`] runs the four transmission schemes on a realization.
//! * [`analytic`] holds the closed-form and quadrature capacity expressions.
//! * [`montecarlo`] estimates spatial capacity over many seeded realizations.
//!
//! [`quad`] and [`streams`] are numerical and random-number support code.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod channel;
pub mod error;
pub mod geometry;
pub mod montecarlo;
pub mod quad;
pub mod scheduling;
pub mod streams;

pub use error::{Error, Result};

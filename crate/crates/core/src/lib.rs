//! Robust bit-loading over parallel Gaussian channels.
//!
//! Allocates integer bits to `n` subchannels under a total rate target, a
//! granularity `beta` and a per-channel cap, either maximizing the system
//! margin (the smallest SNR gap) or minimizing the bit-weighted mean BER.
//!
//! * [`greedy`] holds the optimal greedy allocators.
//! * [`analytic`] and [`completion`] give the Lagrangian pipeline: a
//!   continuous solution found by a secant search, then integer rounding.
//! * [`oracle`] is an exhaustive reference for small instances.

pub mod analytic;
pub mod ber;
pub mod channel;
pub mod completion;
pub mod error;
pub mod experiment;
pub mod greedy;
pub mod metrics;
pub mod oracle;

pub use error::{Error, Result};

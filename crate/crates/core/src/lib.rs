//! Deterministic LEO constellation simulator with edge-compute fault injection.
//!
//! The crate is organised bottom-up:
//!
//! - [`orbital`]: Walker-style shells and circular Keplerian propagation.
//! - [`tle`]: two-line element set parsing and circular approximation.
//! - [`geometry`]: grazing altitude, elevation, slant range and delays.
//! - [`topology`]: the +GRID inter-satellite link graph, visibility and handovers.
//! - [`faults`]: seeded stochastic fault models (SEU, TID, rain, handover, maneuvers).
//! - [`trace`]: the canonical fault event and its JSON-lines wire format.
//! - [`stats`]: CDFs of ISL grazing altitudes and latency summaries.
//! - [`sim`]: configuration document and the end-to-end simulation driver.

pub mod error;
pub mod faults;
pub mod geometry;
pub mod orbital;
pub mod rng;
pub mod sim;
pub mod stats;
pub mod tle;
pub mod topology;
pub mod trace;

pub use error::{Error, Result};

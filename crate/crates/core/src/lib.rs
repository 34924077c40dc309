//! Side-channel probing of a flow-based intrusion detection system.
//!
//! The crate covers the whole loop: synthetic flows and CSV ingest, a
//! random-forest IDS, a simulated telemetry channel, random-walk probing,
//! change-point segmentation, causal feature screening, bounded adversarial
//! crafting and an Isolation Forest detector.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod attack;
pub mod causality;
pub mod changepoint;
pub mod defense;
pub mod error;
pub mod flow;
pub mod ids;
pub mod pipeline;
pub mod probing;
pub mod seed;
mod serde_ext;
pub mod sidechannel;
pub mod stats;

pub use error::{Error, Result};

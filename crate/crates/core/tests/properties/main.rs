//! Invariants from each module, checked on generated inputs.

mod attack;
mod causality;
mod changepoint;
#[path = "../common/mod.rs"]
mod common;
mod defense;
mod flow;
mod ids;
mod probing;
mod sidechannel;
mod support;

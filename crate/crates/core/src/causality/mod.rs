//! Causal screening of telemetry against flow features.

pub mod granger;
pub mod sensitivity;
pub mod vif;

pub use granger::{granger_test, GrangerResult};
pub use sensitivity::{
    identify_sensitive, CausalityParams, FeatureScore, SegmentAnalysis, SensitivityReport,
    SignificanceRecord, TestKind,
};
pub use vif::{vif, vif_filter, VifReport};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::attack::AttackReport;
use crate::changepoint::ChangePointResult;
use crate::defense::DefenseReport;
use crate::flow::Feature;
use crate::ids::{ClassifierMetrics, ForestParams};
use crate::sidechannel::Indicator;

use super::config::ExperimentConfig;

/// Bumped whenever the layout of `report.json` changes.
pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub source: String,
    pub n_records: usize,
    pub benign: usize,
    pub malicious: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rows_dropped: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdsSummary {
    pub features: Vec<Feature>,
    pub params: ForestParams,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_best_mean_f1: Option<f64>,
    pub n_train: usize,
    pub n_test: usize,
    pub test_metrics: ClassifierMetrics,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChangePointSummary {
    pub results: BTreeMap<Indicator, ChangePointResult>,
    /// Indicators that could not be segmented, with the reason.
    pub failures: BTreeMap<Indicator, String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttackSummary {
    pub features: Vec<Feature>,
    pub skipped_features: Vec<Feature>,
    pub epsilon: f64,
    pub num_steps: usize,
    pub bound_multiplier: f64,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    pub evaluation: AttackReport,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NaiveDefense {
    pub epsilon: f64,
    pub num_steps: usize,
    pub ids_accuracy: f64,
    pub detection: DefenseReport,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DefenseSummary {
    pub features: Vec<Feature>,
    pub stealth: DefenseReport,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub naive: Option<NaiveDefense>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SensitivitySummary {
    pub ranking: Vec<Feature>,
    pub sensitive_features: Vec<Feature>,
    /// Features the simulated telemetry actually depends on.
    pub ground_truth: Vec<Feature>,
    pub recall: f64,
    pub precision: f64,
}

/// Everything an experiment produced, free of wall-clock data.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub schema_version: u32,
    pub master_seed: u64,
    /// The configuration the run used, with the master seed filled in.
    pub config: ExperimentConfig,
    /// Artifact files written to the output directory, by name.
    pub artifacts: Vec<String>,
    pub dataset: DatasetSummary,
    pub ids: IdsSummary,
    pub probes: usize,
    pub breakpoints: BTreeMap<Indicator, Vec<usize>>,
    pub sensitivity: SensitivitySummary,
    pub attack: AttackSummary,
    pub defense: DefenseSummary,
}

//! Artifact file names and checked JSON/CSV access.

use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::flow::{load_csv, Feature, FlowDataset};
use crate::ids::ForestModel;
use crate::sidechannel::TelemetryTrace;

pub const FLOWS: &str = "flows.csv";
pub const DATASET: &str = "dataset.json";
pub const TRAIN: &str = "train.csv";
pub const TEST: &str = "test.csv";
pub const MODEL: &str = "model.json";
pub const GRID: &str = "grid.json";
pub const IDS_METRICS: &str = "ids_metrics.json";
pub const PROBE_FLOWS: &str = "probe_flows.csv";
pub const TELEMETRY: &str = "telemetry.csv";
pub const BREAKPOINTS: &str = "breakpoints.json";
pub const CHANGEPOINTS: &str = "changepoints.json";
pub const SENSITIVITY: &str = "sensitivity.json";
pub const ADVERSARIAL: &str = "adversarial.csv";
pub const ATTACK_REPORT: &str = "attack_report.json";
pub const DEFENSE_REPORT: &str = "defense_report.json";
pub const SCORES: &str = "scores.csv";
pub const REPORT: &str = "report.json";
pub const TIMINGS: &str = "timings.json";

pub const ALL_ARTIFACTS: [&str; 18] = [
    FLOWS,
    DATASET,
    TRAIN,
    TEST,
    MODEL,
    GRID,
    IDS_METRICS,
    PROBE_FLOWS,
    TELEMETRY,
    BREAKPOINTS,
    CHANGEPOINTS,
    SENSITIVITY,
    ADVERSARIAL,
    ATTACK_REPORT,
    DEFENSE_REPORT,
    SCORES,
    REPORT,
    TIMINGS,
];

/// An output directory plus which subcommand produces each artifact.
#[derive(Clone, Debug)]
pub struct ArtifactDir {
    root: PathBuf,
}

fn producer(name: &str) -> &'static str {
    match name {
        FLOWS | DATASET => "generate",
        TRAIN | TEST | MODEL | GRID | IDS_METRICS => "train",
        PROBE_FLOWS | TELEMETRY => "probe",
        BREAKPOINTS | CHANGEPOINTS => "detect-cp",
        SENSITIVITY => "analyze",
        ADVERSARIAL | ATTACK_REPORT => "attack",
        DEFENSE_REPORT | SCORES => "defend",
        _ => "report",
    }
}

impl ArtifactDir {
    pub fn new(root: impl Into<PathBuf>) -> Result<ArtifactDir> {
        let root = root.into();
        fs::create_dir_all(&root).map_err(|e| Error::io(&root, e))?;
        Ok(ArtifactDir { root })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    /// Path of an existing upstream artifact, or an error naming its producer.
    pub fn input(&self, name: &str) -> Result<PathBuf> {
        let path = self.path(name);
        if path.is_file() {
            Ok(path)
        } else {
            Err(Error::MissingArtifact {
                path: PathBuf::from(name),
                producer: producer(name).to_string(),
            })
        }
    }

    pub fn write_json<T: Serialize>(&self, name: &str, value: &T) -> Result<()> {
        let path = self.path(name);
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        fs::write(&path, text).map_err(|e| Error::io(&path, e))
    }

    pub fn read_json<T: DeserializeOwned>(&self, name: &str) -> Result<T> {
        let path = self.input(name)?;
        let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn read_flows(&self, name: &str, features: &[Feature]) -> Result<FlowDataset> {
        load_csv(self.input(name)?, features)
    }

    pub fn read_model(&self) -> Result<ForestModel> {
        ForestModel::load(self.input(MODEL)?)
    }

    pub fn read_trace(&self) -> Result<TelemetryTrace> {
        TelemetryTrace::read_csv(self.input(TELEMETRY)?)
    }
}

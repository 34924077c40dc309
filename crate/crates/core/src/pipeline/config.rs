use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::attack::AttackConfig;
use crate::causality::CausalityParams;
use crate::changepoint::CostModel;
use crate::defense::DefenseParams;
use crate::error::{Error, Result};
use crate::flow::{SelectionPolicy, SyntheticTrafficConfig};
use crate::ids::{ForestParams, GridSearchSpec};
use crate::probing::ProbeConfig;
use crate::sidechannel::{Indicator, PerIndicator, TelemetryModelConfig};

/// Where flows come from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DataSource {
    Synthetic(SyntheticTrafficConfig),
    /// A flow CSV; relative paths resolve against the config file's directory.
    Csv {
        path: PathBuf,
    },
}

impl Default for DataSource {
    fn default() -> Self {
        DataSource::Synthetic(SyntheticTrafficConfig::default())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DataConfig {
    pub source: DataSource,
    pub test_fraction: f64,
    pub selection: SelectionPolicy,
}

impl Default for DataConfig {
    fn default() -> Self {
        DataConfig {
            source: DataSource::default(),
            test_fraction: 0.5,
            selection: SelectionPolicy::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IdsConfig {
    /// Searched when present; otherwise `forest` is trained directly.
    pub grid: Option<GridSearchSpec>,
    pub forest: ForestParams,
}

impl Default for IdsConfig {
    fn default() -> Self {
        IdsConfig {
            grid: Some(GridSearchSpec::default()),
            forest: ForestParams::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ChangePointConfig {
    pub n_bkps: usize,
    pub min_segment_length: usize,
    pub models: PerIndicator<CostModel>,
}

impl Default for ChangePointConfig {
    fn default() -> Self {
        ChangePointConfig {
            n_bkps: 4,
            min_segment_length: 2,
            models: PerIndicator::from_fn(|i| match i {
                Indicator::ResponseTime => CostModel::L2,
                _ => CostModel::RBF_AUTO,
            }),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NaiveAttackConfig {
    pub enabled: bool,
    pub epsilon: f64,
    pub num_steps: usize,
}

impl Default for NaiveAttackConfig {
    fn default() -> Self {
        NaiveAttackConfig {
            enabled: true,
            epsilon: 5.0,
            num_steps: 75,
        }
    }
}

/// Complete experiment description. Every section has defaults, so `{}` is valid.
///
/// Seeds embedded in sections are replaced by per-stage seeds derived from the
/// master seed when the experiment runs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub seed: Option<u64>,
    pub data: DataConfig,
    pub ids: IdsConfig,
    pub telemetry: TelemetryModelConfig,
    pub probe: ProbeConfig,
    pub changepoint: ChangePointConfig,
    pub causality: CausalityParams,
    pub attack: AttackConfig,
    /// Perturb the features the analysis found instead of `attack.sensitive_features`.
    pub attack_detected_features: bool,
    pub naive_attack: NaiveAttackConfig,
    pub defense: DefenseParams,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            seed: None,
            data: DataConfig::default(),
            ids: IdsConfig::default(),
            telemetry: TelemetryModelConfig::default(),
            probe: ProbeConfig::default(),
            changepoint: ChangePointConfig::default(),
            causality: CausalityParams::default(),
            attack: AttackConfig::default(),
            attack_detected_features: true,
            naive_attack: NaiveAttackConfig::default(),
            defense: DefenseParams::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<ExperimentConfig> {
        let config: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| Error::config(format!("config: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    /// Reads a config file, resolving a relative CSV path against its directory.
    pub fn load(path: impl AsRef<Path>) -> Result<ExperimentConfig> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut config = Self::from_json(&text)?;
        if let DataSource::Csv { path: csv } = &mut config.data.source {
            if csv.is_relative() {
                if let Some(dir) = path.parent() {
                    *csv = dir.join(&*csv);
                }
            }
        }
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.data.test_fraction > 0.0 && self.data.test_fraction < 1.0) {
            return Err(Error::config("data.test_fraction must lie in (0, 1)"));
        }
        self.ids.forest.validate()?;
        self.telemetry.validate()?;
        self.probe.validate()?;
        self.attack.validate()?;
        if self.changepoint.n_bkps == 0 || self.changepoint.min_segment_length == 0 {
            return Err(Error::config(
                "changepoint.n_bkps and min_segment_length must be positive",
            ));
        }
        if !(self.defense.contamination > 0.0 && self.defense.contamination < 1.0) {
            return Err(Error::config("defense.contamination must lie in (0, 1)"));
        }
        if !(0.0..=1.0).contains(&self.causality.alpha) {
            return Err(Error::config("causality.alpha must lie in [0, 1]"));
        }
        Ok(())
    }
}

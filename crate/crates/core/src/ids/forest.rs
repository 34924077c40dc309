//! Bagged random-forest classifier over flow features.

use std::fs;
use std::path::Path;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tree::{self, DecisionTree, TrainingView, TreeParams};
use crate::error::{Error, Result};
use crate::flow::{Feature, FlowDataset, FlowRecord, Label, NormStats};
use crate::seed;

const FORMAT_NAME: &str = "silentprobe.forest";
const FORMAT_VERSION: u32 = 1;

/// How many features each split considers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureStrategy {
    Sqrt,
    Log2,
    All,
}

impl FeatureStrategy {
    pub fn count(self, n_features: usize) -> usize {
        let n = n_features as f64;
        let m = match self {
            FeatureStrategy::Sqrt => n.sqrt().floor() as usize,
            FeatureStrategy::Log2 => n.log2().floor() as usize,
            FeatureStrategy::All => n_features,
        };
        m.clamp(1, n_features.max(1))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(default)]
pub struct ForestParams {
    pub n_estimators: usize,
    pub max_depth: usize,
    pub features_per_split: FeatureStrategy,
    /// Draw a bootstrap resample per tree; without it each tree sees all rows.
    pub bootstrap: bool,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            n_estimators: 100,
            max_depth: 12,
            features_per_split: FeatureStrategy::Sqrt,
            bootstrap: true,
        }
    }
}

impl ForestParams {
    pub fn validate(&self) -> Result<()> {
        if self.n_estimators == 0 {
            return Err(Error::config("n_estimators must be at least 1"));
        }
        if self.max_depth == 0 {
            return Err(Error::config("max_depth must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub params: ForestParams,
    pub feature_names: Vec<Feature>,
    /// Statistics applied to raw inputs before the trees see them.
    pub norm_stats: Option<NormStats>,
    /// Seed the bootstrap and feature sampling were derived from.
    pub oob_seed: u64,
    pub trees: Vec<DecisionTree>,
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format: String,
    version: u32,
    model: ForestModel,
}

impl ForestModel {
    pub fn n_estimators(&self) -> usize {
        self.trees.len()
    }

    /// Model-space input vector for a raw record.
    pub fn inputs(&self, record: &FlowRecord) -> Vec<f64> {
        self.feature_names
            .iter()
            .map(|&f| {
                let x = record.get(f);
                match &self.norm_stats {
                    Some(s) => s.transform(f, x),
                    None => x,
                }
            })
            .collect()
    }

    /// Majority vote over trees with the total node count the vote walked.
    pub fn classify(&self, x: &[f64]) -> (Label, usize) {
        let mut votes = [0usize; 2];
        let mut work = 0;
        for t in &self.trees {
            let (counts, visited) = t.leaf(x);
            votes[tree::majority(counts).index()] += 1;
            work += visited;
        }
        (tree::majority(votes), work)
    }

    pub fn predict_record(&self, record: &FlowRecord) -> Label {
        self.classify(&self.inputs(record)).0
    }

    pub fn to_json(&self) -> Result<String> {
        let file = ModelFile {
            format: FORMAT_NAME.into(),
            version: FORMAT_VERSION,
            model: self.clone(),
        };
        Ok(serde_json::to_string(&file)?)
    }

    pub fn from_json(text: &str) -> Result<ForestModel> {
        let head: serde_json::Value = serde_json::from_str(text)?;
        let format = head.get("format").and_then(|v| v.as_str());
        let version = head.get("version").and_then(|v| v.as_u64());
        if format != Some(FORMAT_NAME) || version != Some(FORMAT_VERSION as u64) {
            return Err(Error::Format(format!(
                "expected {FORMAT_NAME} version {FORMAT_VERSION}, found {format:?} version {version:?}"
            )));
        }
        let file: ModelFile = serde_json::from_value(head)?;
        let model = file.model;
        let width = model.feature_names.len();
        if model.trees.is_empty() {
            return Err(Error::Format("model has no trees".into()));
        }
        if model
            .trees
            .iter()
            .any(|t| t.max_feature_index().is_some_and(|f| f >= width))
        {
            return Err(Error::Format(
                "tree references a feature outside the model".into(),
            ));
        }
        Ok(model)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<ForestModel> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

/// Trains a forest on `train`; inputs are standardized with `train.norm_stats` if present.
pub fn train_random_forest(
    train: &FlowDataset,
    params: &ForestParams,
    seed: u64,
) -> Result<ForestModel> {
    params.validate()?;
    if train.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if train.feature_names.is_empty() {
        return Err(Error::config("no features selected"));
    }
    let counts = train.class_counts();
    if counts[0] == 0 || counts[1] == 0 {
        return Err(Error::SingleClass);
    }

    let rows = train.feature_matrix();
    let columns: Vec<Vec<f64>> = (0..train.feature_names.len())
        .map(|j| rows.iter().map(|r| r[j]).collect())
        .collect();
    let labels: Vec<u8> = train
        .records
        .iter()
        .map(|r| r.label.index() as u8)
        .collect();
    let view = TrainingView {
        columns: &columns,
        labels: &labels,
    };
    let tree_params = TreeParams {
        max_depth: params.max_depth,
        features_per_split: params.features_per_split.count(columns.len()),
    };
    let n = labels.len();
    let trees: Vec<DecisionTree> = (0..params.n_estimators)
        .into_par_iter()
        .map(|t| {
            let mut rng = seed::item_rng(seed, t as u64);
            let samples: Vec<usize> = if params.bootstrap {
                (0..n).map(|_| rng.random_range(0..n)).collect()
            } else {
                (0..n).collect()
            };
            tree::grow(&view, samples, tree_params, &mut rng)
        })
        .collect();

    Ok(ForestModel {
        params: *params,
        feature_names: train.feature_names.clone(),
        norm_stats: train.norm_stats.clone(),
        oob_seed: seed,
        trees,
    })
}

/// Predicted labels in input order.
pub fn predict(model: &ForestModel, flows: &FlowDataset) -> Result<Vec<Label>> {
    flows.require_features(&model.feature_names)?;
    Ok(flows
        .records
        .par_iter()
        .map(|r| model.predict_record(r))
        .collect())
}

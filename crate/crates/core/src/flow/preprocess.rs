use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::{Feature, FlowDataset, FlowRecord, Label};
use crate::error::{Error, Result};
use crate::seed;
use crate::stats::mean_std;

/// Mean and population standard deviation of one feature over a fitting set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureStats {
    pub feature: Feature,
    pub mean: f64,
    pub std: f64,
    /// Zero-variance feature: standardizes to 0 instead of dividing by zero.
    pub degenerate: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormStats {
    pub entries: Vec<FeatureStats>,
}

impl NormStats {
    /// Fits statistics over `dataset.feature_names` using raw values.
    pub fn fit(dataset: &FlowDataset) -> Result<NormStats> {
        if dataset.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let entries = dataset
            .feature_names
            .iter()
            .map(|&feature| {
                let (mean, std) = mean_std(&dataset.column(feature));
                let degenerate = !(std > 1e-12 * mean.abs().max(1.0));
                FeatureStats {
                    feature,
                    mean,
                    std,
                    degenerate,
                }
            })
            .collect();
        Ok(NormStats { entries })
    }

    pub fn get(&self, feature: Feature) -> Option<&FeatureStats> {
        self.entries.iter().find(|e| e.feature == feature)
    }

    pub fn features(&self) -> Vec<Feature> {
        self.entries.iter().map(|e| e.feature).collect()
    }

    /// Standardized value of `x`; features without stats pass through unchanged.
    pub fn transform(&self, feature: Feature, x: f64) -> f64 {
        match self.get(feature) {
            Some(s) => s.apply(x),
            None => x,
        }
    }

    pub fn transform_record(&self, record: &FlowRecord) -> Vec<f64> {
        self.entries
            .iter()
            .map(|s| s.apply(record.get(s.feature)))
            .collect()
    }

    pub fn restrict(&self, features: &[Feature]) -> NormStats {
        NormStats {
            entries: features
                .iter()
                .filter_map(|&f| self.get(f).cloned())
                .collect(),
        }
    }
}

impl FeatureStats {
    pub fn apply(&self, x: f64) -> f64 {
        if self.degenerate {
            0.0
        } else {
            (x - self.mean) / self.std
        }
    }

    pub fn invert(&self, z: f64) -> f64 {
        if self.degenerate {
            self.mean
        } else {
            z * self.std + self.mean
        }
    }
}

/// Fits standardization on `dataset` and attaches it.
pub fn standardize(dataset: &FlowDataset) -> Result<FlowDataset> {
    let stats = NormStats::fit(dataset)?;
    Ok(FlowDataset {
        records: dataset.records.clone(),
        feature_names: dataset.feature_names.clone(),
        norm_stats: Some(stats),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "snake_case")]
pub enum SelectionPolicy {
    /// Keep exactly these features, in this order.
    Whitelist { features: Vec<Feature> },
    /// Keep the `k` highest-variance features, in their original order.
    VarianceTopK { k: usize },
}

impl Default for SelectionPolicy {
    fn default() -> Self {
        SelectionPolicy::Whitelist {
            features: Feature::VOLUME.to_vec(),
        }
    }
}

pub fn select_features(dataset: &FlowDataset, policy: &SelectionPolicy) -> Result<FlowDataset> {
    let chosen = match policy {
        SelectionPolicy::Whitelist { features } => {
            if features.is_empty() {
                return Err(Error::config("feature whitelist is empty"));
            }
            dataset.require_features(features)?;
            let mut seen = Vec::new();
            for f in features {
                if seen.contains(f) {
                    return Err(Error::config(format!("feature {f} listed twice")));
                }
                seen.push(*f);
            }
            seen
        }
        SelectionPolicy::VarianceTopK { k } => {
            if *k == 0 || *k > dataset.feature_names.len() {
                return Err(Error::config(format!(
                    "variance top-k needs 1 <= k <= {}, got {k}",
                    dataset.feature_names.len()
                )));
            }
            let mut ranked: Vec<(usize, f64)> = dataset
                .feature_names
                .iter()
                .enumerate()
                .map(|(i, &f)| (i, dataset.feature_std(f)))
                .collect();
            ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
            let mut keep: Vec<usize> = ranked.iter().take(*k).map(|r| r.0).collect();
            keep.sort_unstable();
            keep.iter().map(|&i| dataset.feature_names[i]).collect()
        }
    };
    Ok(FlowDataset {
        records: dataset.records.clone(),
        norm_stats: dataset.norm_stats.as_ref().map(|s| s.restrict(&chosen)),
        feature_names: chosen,
    })
}

/// Class-stratified split; each part keeps the input's relative order.
pub fn stratified_split(
    dataset: &FlowDataset,
    test_fraction: f64,
    seed: u64,
) -> Result<(FlowDataset, FlowDataset)> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::config(format!(
            "test fraction must lie in (0, 1), got {test_fraction}"
        )));
    }
    let mut rng = seed::rng(seed);
    let mut train = Vec::new();
    let mut test = Vec::new();
    for class in [Label::Benign, Label::Malicious] {
        let mut idx: Vec<usize> = (0..dataset.len())
            .filter(|&i| dataset.records[i].label == class)
            .collect();
        idx.shuffle(&mut rng);
        let n_test = (idx.len() as f64 * test_fraction).round() as usize;
        test.extend_from_slice(&idx[..n_test]);
        train.extend_from_slice(&idx[n_test..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    if train.is_empty() || test.is_empty() {
        return Err(Error::InsufficientData(
            "split leaves an empty partition".into(),
        ));
    }
    Ok((dataset.subset(&train), dataset.subset(&test)))
}

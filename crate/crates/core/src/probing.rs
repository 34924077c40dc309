//! Random-walk probing: nudge flows slightly and watch the telemetry they cause.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::{Feature, FlowDataset, FlowRecord};
use crate::ids::ForestModel;
use crate::seed;
use crate::sidechannel::{TelemetryModel, TelemetryTrace};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ProbeConfig {
    pub modifiable_features: Vec<Feature>,
    /// Per-step noise scale as a fraction of each feature's standard deviation.
    pub base_epsilon: f64,
    pub num_steps: usize,
    pub seed: u64,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        ProbeConfig {
            modifiable_features: Feature::VOLUME.to_vec(),
            base_epsilon: 0.01,
            num_steps: 75,
            seed: 0,
        }
    }
}

impl ProbeConfig {
    pub fn validate(&self) -> Result<()> {
        if self.modifiable_features.is_empty() {
            return Err(Error::config("no modifiable features"));
        }
        if !(self.base_epsilon >= 0.0 && self.base_epsilon.is_finite()) {
            return Err(Error::config(
                "base_epsilon must be non-negative and finite",
            ));
        }
        if self.num_steps == 0 {
            return Err(Error::config("num_steps must be at least 1"));
        }
        Ok(())
    }
}

/// Population standard deviation of each feature over `dataset`.
pub fn feature_stds(dataset: &FlowDataset, features: &[Feature]) -> Vec<f64> {
    features.iter().map(|&f| dataset.feature_std(f)).collect()
}

/// Adds `steps` Gaussian increments of scale `epsilon * std` to each feature,
/// then restores record invariants once.
pub(crate) fn walk_record<R: Rng>(
    record: &FlowRecord,
    features: &[Feature],
    stds: &[f64],
    epsilon: f64,
    steps: usize,
    rng: &mut R,
) -> FlowRecord {
    let mut out = record.clone();
    for (&f, &std) in features.iter().zip(stds) {
        let scale = epsilon * std;
        let mut displacement = 0.0;
        if scale > 0.0 {
            let normal = Normal::new(0.0, scale).expect("positive finite scale");
            for _ in 0..steps {
                displacement += normal.sample(rng);
            }
        }
        out.set(f, out.get(f) + displacement);
    }
    out.reconcile(features);
    out
}

/// Perturbs every record by an accumulated random walk.
pub fn random_walk_perturb(dataset: &FlowDataset, config: &ProbeConfig) -> Result<FlowDataset> {
    config.validate()?;
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let stds = feature_stds(dataset, &config.modifiable_features);
    let records = dataset
        .records
        .par_iter()
        .enumerate()
        .map(|(i, r)| {
            let mut rng = seed::item_rng(config.seed, i as u64);
            walk_record(
                r,
                &config.modifiable_features,
                &stds,
                config.base_epsilon,
                config.num_steps,
                &mut rng,
            )
        })
        .collect();
    Ok(dataset.with_records(records))
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProbeOutcome {
    pub probes: FlowDataset,
    pub trace: TelemetryTrace,
}

/// Sends one perturbed copy of each flow through the IDS and records the telemetry.
pub fn silent_probe(
    ids: &ForestModel,
    telemetry: &TelemetryModel,
    dataset: &FlowDataset,
    config: &ProbeConfig,
) -> Result<ProbeOutcome> {
    let probes = random_walk_perturb(dataset, config)?;
    let trace = telemetry.trace(ids, &probes);
    Ok(ProbeOutcome { probes, trace })
}

//! Bounded adversarial perturbation of malicious flows.

use std::collections::BTreeMap;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::{Feature, FlowDataset, FlowRecord};
use crate::ids::{predict, ClassifierMetrics, ForestModel};
use crate::probing::{feature_stds, walk_record};
use crate::seed;

/// Changes reported for a comparable regime elsewhere (percentage points),
/// kept for side-by-side reading of reports. Nothing asserts against them.
pub mod reference {
    pub const PRE_ACCURACY: f64 = 99.25;
    pub const ACCURACY_CHANGE_PP: f64 = -51.25;
    pub const PRECISION_CHANGE_PP: f64 = -50.52;
    pub const RECALL_CHANGE_PP: f64 = -54.64;
    pub const F1_CHANGE_PP: f64 = -52.58;
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AttackConfig {
    /// Total displacement budget per feature, in standard deviations.
    pub epsilon: f64,
    pub num_steps: usize,
    /// Every feature of a crafted flow stays within this many standard deviations of the original.
    pub bound_multiplier: f64,
    pub sensitive_features: Vec<Feature>,
    pub seed: u64,
}

impl Default for AttackConfig {
    fn default() -> Self {
        AttackConfig {
            epsilon: 0.15,
            num_steps: 75,
            bound_multiplier: 0.3,
            sensitive_features: vec![
                Feature::Duration,
                Feature::BytesPerSec,
                Feature::PktsPerSec,
                Feature::TotPkts,
            ],
            seed: 0,
        }
    }
}

impl AttackConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return Err(Error::config("epsilon must be non-negative and finite"));
        }
        if self.num_steps == 0 {
            return Err(Error::config("num_steps must be at least 1"));
        }
        if !(self.bound_multiplier > 0.0) {
            return Err(Error::config("bound_multiplier must be positive"));
        }
        if self.sensitive_features.is_empty() {
            return Err(Error::config("no sensitive features to perturb"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Crafted {
    pub flows: FlowDataset,
    /// Requested features with zero spread, left untouched.
    pub skipped_features: Vec<Feature>,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
}

fn within_bounds(candidate: &FlowRecord, clean: &FlowRecord, limits: &[f64; 8]) -> bool {
    Feature::ALL
        .iter()
        .zip(limits)
        .all(|(&g, &limit)| (candidate.get(g) - clean.get(g)).abs() <= limit)
}

/// Steps each malicious flow's sensitive features in a fixed random direction,
/// `epsilon / num_steps` standard deviations at a time, rejecting any step that
/// would move some feature more than `bound_multiplier` deviations from the
/// original. Benign flows are copied unchanged.
pub fn craft_adversarial(dataset: &FlowDataset, config: &AttackConfig) -> Result<Crafted> {
    config.validate()?;
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let all_stds = feature_stds(dataset, &Feature::ALL);
    let mut limits = [0.0; 8];
    for (l, s) in limits.iter_mut().zip(&all_stds) {
        // The slack absorbs rounding from re-deriving rates.
        *l = config.bound_multiplier * s * (1.0 + 1e-12);
    }
    let (active, skipped_features): (Vec<Feature>, Vec<Feature>) = config
        .sensitive_features
        .iter()
        .partition(|&&f| dataset.feature_std(f) > 0.0);
    let steps: Vec<f64> = active
        .iter()
        .map(|&f| config.epsilon / config.num_steps as f64 * dataset.feature_std(f))
        .collect();

    let results: Vec<(FlowRecord, usize, usize)> = dataset
        .records
        .par_iter()
        .enumerate()
        .map(|(i, clean)| {
            if !clean.label.is_malicious() {
                return (clean.clone(), 0, 0);
            }
            let mut rng = seed::item_rng(config.seed, i as u64);
            let signs: Vec<f64> = active
                .iter()
                .map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 })
                .collect();
            let mut current = clean.clone();
            let (mut accepted, mut rejected) = (0, 0);
            for _ in 0..config.num_steps {
                for ((&f, &step), &sign) in active.iter().zip(&steps).zip(&signs) {
                    let mut candidate = current.clone();
                    candidate.set(f, current.get(f) + sign * step);
                    candidate.reconcile(&[f]);
                    if within_bounds(&candidate, clean, &limits) {
                        current = candidate;
                        accepted += 1;
                    } else {
                        rejected += 1;
                    }
                }
            }
            (current, accepted, rejected)
        })
        .collect();

    let accepted_steps = results.iter().map(|r| r.1).sum();
    let rejected_steps = results.iter().map(|r| r.2).sum();
    Ok(Crafted {
        flows: dataset.with_records(results.into_iter().map(|r| r.0).collect()),
        skipped_features,
        accepted_steps,
        rejected_steps,
    })
}

/// Unbounded random walk of `epsilon` deviations per step on malicious flows;
/// the conspicuous counterpart to [`craft_adversarial`].
pub fn naive_attack(
    dataset: &FlowDataset,
    features: &[Feature],
    epsilon: f64,
    num_steps: usize,
    seed: u64,
) -> Result<FlowDataset> {
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if features.is_empty() || num_steps == 0 || !(epsilon >= 0.0 && epsilon.is_finite()) {
        return Err(Error::config(
            "naive attack needs features, steps and a finite epsilon",
        ));
    }
    let stds = feature_stds(dataset, features);
    let records = dataset
        .records
        .par_iter()
        .enumerate()
        .map(|(i, r)| {
            if r.label.is_malicious() {
                walk_record(
                    r,
                    features,
                    &stds,
                    epsilon,
                    num_steps,
                    &mut seed::item_rng(seed, i as u64),
                )
            } else {
                r.clone()
            }
        })
        .collect();
    Ok(dataset.with_records(records))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricChange {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttackReport {
    pub pre: ClassifierMetrics,
    pub post: ClassifierMetrics,
    /// Post minus pre, in percentage points.
    pub change_pp: MetricChange,
    /// Fraction of malicious flows classified benign after the attack.
    pub evasion_rate: f64,
    /// Mean absolute change over malicious flows, in feature units.
    pub mean_abs_perturbation: BTreeMap<Feature, f64>,
    /// Largest absolute change over malicious flows, in clean standard deviations.
    pub max_shift_std: BTreeMap<Feature, f64>,
    pub benign_unchanged: bool,
}

pub fn evaluate_attack(
    model: &ForestModel,
    clean: &FlowDataset,
    adversarial: &FlowDataset,
) -> Result<AttackReport> {
    if clean.len() != adversarial.len() {
        return Err(Error::LengthMismatch(format!(
            "{} clean flows vs {} adversarial",
            clean.len(),
            adversarial.len()
        )));
    }
    if clean.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let truth = clean.labels();
    let pre_pred = predict(model, clean)?;
    let post_pred = predict(model, adversarial)?;
    let pre = ClassifierMetrics::from_labels(&truth, &pre_pred)?;
    let post = ClassifierMetrics::from_labels(&truth, &post_pred)?;
    let pp = |a: f64, b: f64| 100.0 * (b - a);

    let malicious: Vec<usize> = (0..clean.len())
        .filter(|&i| truth[i].is_malicious())
        .collect();
    let evaded = malicious
        .iter()
        .filter(|&&i| !post_pred[i].is_malicious())
        .count();
    let mut mean_abs_perturbation = BTreeMap::new();
    let mut max_shift_std = BTreeMap::new();
    for f in Feature::ALL {
        let diffs: Vec<f64> = malicious
            .iter()
            .map(|&i| (adversarial.records[i].get(f) - clean.records[i].get(f)).abs())
            .collect();
        let mean = if diffs.is_empty() {
            0.0
        } else {
            diffs.iter().sum::<f64>() / diffs.len() as f64
        };
        let std = clean.feature_std(f);
        let max = diffs.iter().copied().fold(0.0, f64::max);
        mean_abs_perturbation.insert(f, mean);
        max_shift_std.insert(f, if std > 0.0 { max / std } else { 0.0 });
    }
    let benign_unchanged = (0..clean.len())
        .filter(|&i| !truth[i].is_malicious())
        .all(|i| clean.records[i] == adversarial.records[i]);

    Ok(AttackReport {
        change_pp: MetricChange {
            accuracy: pp(pre.accuracy, post.accuracy),
            precision: pp(pre.precision, post.precision),
            recall: pp(pre.recall, post.recall),
            f1: pp(pre.f1, post.f1),
        },
        pre,
        post,
        evasion_rate: if malicious.is_empty() {
            0.0
        } else {
            evaded as f64 / malicious.len() as f64
        },
        mean_abs_perturbation,
        max_shift_std,
        benign_unchanged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::{generate_synthetic, Label, SyntheticTrafficConfig};

    fn data() -> FlowDataset {
        generate_synthetic(&SyntheticTrafficConfig {
            n_benign: 150,
            n_malicious: 150,
            ..Default::default()
        })
        .unwrap()
    }

    #[test]
    fn benign_untouched_and_bounds_hold() {
        let ds = data();
        let config = AttackConfig::default();
        let out = craft_adversarial(&ds, &config).unwrap();
        for (a, b) in ds.records.iter().zip(&out.flows.records) {
            b.validate().unwrap();
            if a.label == Label::Benign {
                assert_eq!(a, b);
            }
            for f in Feature::ALL {
                let bound = config.bound_multiplier * ds.feature_std(f);
                assert!((a.get(f) - b.get(f)).abs() <= bound * (1.0 + 1e-9), "{f}");
            }
        }
        assert!(out.accepted_steps > 0);
    }

    #[test]
    fn zero_epsilon_is_identity() {
        let ds = data();
        let config = AttackConfig {
            epsilon: 0.0,
            ..Default::default()
        };
        let out = craft_adversarial(&ds, &config).unwrap();
        for (a, b) in ds.records.iter().zip(&out.flows.records) {
            for f in Feature::ALL {
                assert!((a.get(f) - b.get(f)).abs() <= 1e-9 * ds.feature_std(f).max(1.0));
            }
        }
    }

    #[test]
    fn constant_feature_is_skipped() {
        let mut ds = data();
        for r in &mut ds.records {
            r.dst_port = 80;
        }
        let config = AttackConfig {
            sensitive_features: vec![Feature::DstPort, Feature::Duration],
            ..Default::default()
        };
        let out = craft_adversarial(&ds, &config).unwrap();
        assert_eq!(out.skipped_features, vec![Feature::DstPort]);
    }

    #[test]
    fn deterministic() {
        let ds = data();
        let a = craft_adversarial(&ds, &AttackConfig::default()).unwrap();
        let b = craft_adversarial(&ds, &AttackConfig::default()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn naive_attack_leaves_benign_alone() {
        let ds = data();
        let out = naive_attack(&ds, &[Feature::Duration], 5.0, 10, 1).unwrap();
        for (a, b) in ds.records.iter().zip(&out.records) {
            if a.label == Label::Benign {
                assert_eq!(a, b);
            }
        }
    }
}

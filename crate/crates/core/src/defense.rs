//! Isolation Forest detector over telemetry and flow features.

use rand::seq::index;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::{Feature, FlowDataset};
use crate::ids::{ClassifierMetrics, Confusion};
use crate::seed;
use crate::sidechannel::TelemetryTrace;
use crate::stats::quantile;

/// Scores reported for a comparable regime elsewhere (percent). Documentation only.
pub mod reference {
    pub const ACCURACY: f64 = 56.0;
    pub const PRECISION: f64 = 54.0;
    pub const RECALL: f64 = 16.0;
    pub const F1: f64 = 27.0;
    pub const ROC_AUC: f64 = 48.0;
}

const EULER_GAMMA: f64 = 0.577_215_664_9;

/// Average unsuccessful-search path length in a binary search tree of `n` points.
pub fn c_factor(n: usize) -> f64 {
    match n {
        0 | 1 => 0.0,
        2 => 1.0,
        _ => {
            let n = n as f64;
            2.0 * ((n - 1.0).ln() + EULER_GAMMA) - 2.0 * (n - 1.0) / n
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum IsoNode {
    /// `x[feature] <= value` goes to the next node, otherwise to `right`.
    Split {
        feature: usize,
        value: f64,
        right: usize,
    },
    External {
        size: usize,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IsolationTree {
    pub nodes: Vec<IsoNode>,
}

impl IsolationTree {
    pub fn path_length(&self, x: &[f64]) -> f64 {
        let mut at = 0;
        let mut depth = 0.0;
        loop {
            match self.nodes[at] {
                IsoNode::External { size } => return depth + c_factor(size),
                IsoNode::Split {
                    feature,
                    value,
                    right,
                } => {
                    at = if x[feature] <= value { at + 1 } else { right };
                    depth += 1.0;
                }
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IsolationForestModel {
    pub n_trees: usize,
    pub subsample_size: usize,
    pub height_limit: usize,
    pub n_features: usize,
    pub seed: u64,
    /// Every tree is a single leaf: the data cannot be split at all.
    pub degenerate: bool,
    pub trees: Vec<IsolationTree>,
}

fn build<R: Rng>(
    rows: &[Vec<f64>],
    idx: Vec<usize>,
    depth: usize,
    limit: usize,
    rng: &mut R,
    nodes: &mut Vec<IsoNode>,
) {
    if depth >= limit || idx.len() <= 1 {
        nodes.push(IsoNode::External { size: idx.len() });
        return;
    }
    let n_features = rows[idx[0]].len();
    let mut splittable = Vec::new();
    for f in 0..n_features {
        let (lo, hi) = idx
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &i| {
                (lo.min(rows[i][f]), hi.max(rows[i][f]))
            });
        if hi > lo {
            splittable.push((f, lo, hi));
        }
    }
    if splittable.is_empty() {
        nodes.push(IsoNode::External { size: idx.len() });
        return;
    }
    let (feature, lo, hi) = splittable[rng.random_range(0..splittable.len())];
    let value = rng.random_range(lo..hi);
    let (left, right): (Vec<usize>, Vec<usize>) =
        idx.into_iter().partition(|&i| rows[i][feature] <= value);
    let slot = nodes.len();
    nodes.push(IsoNode::External { size: 0 });
    build(rows, left, depth + 1, limit, rng, nodes);
    let right_at = nodes.len();
    build(rows, right, depth + 1, limit, rng, nodes);
    nodes[slot] = IsoNode::Split {
        feature,
        value,
        right: right_at,
    };
}

/// Fits `n_trees` isolation trees on subsamples of `min(subsample_size, n)` rows.
pub fn fit_iforest(
    rows: &[Vec<f64>],
    n_trees: usize,
    subsample_size: usize,
    seed: u64,
) -> Result<IsolationForestModel> {
    if n_trees == 0 || subsample_size < 2 {
        return Err(Error::config(
            "isolation forest needs at least 1 tree and a subsample of 2",
        ));
    }
    if rows.len() < 2 {
        return Err(Error::InsufficientData(
            "isolation forest needs at least 2 samples".into(),
        ));
    }
    let n_features = rows[0].len();
    if n_features == 0 || rows.iter().any(|r| r.len() != n_features) {
        return Err(Error::LengthMismatch(
            "samples must share a nonzero width".into(),
        ));
    }
    if rows.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::InsufficientData("non-finite detector input".into()));
    }
    let psi = subsample_size.min(rows.len());
    let height_limit = (psi as f64).log2().ceil() as usize;
    let trees: Vec<IsolationTree> = (0..n_trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = seed::item_rng(seed, t as u64);
            let idx = index::sample(&mut rng, rows.len(), psi).into_vec();
            let mut nodes = Vec::new();
            build(rows, idx, 0, height_limit, &mut rng, &mut nodes);
            IsolationTree { nodes }
        })
        .collect();
    let degenerate = trees.iter().all(|t| t.nodes.len() == 1);
    Ok(IsolationForestModel {
        n_trees,
        subsample_size: psi,
        height_limit,
        n_features,
        seed,
        degenerate,
        trees,
    })
}

impl IsolationForestModel {
    /// Anomaly score in (0, 1]; higher means easier to isolate.
    pub fn anomaly_score(&self, x: &[f64]) -> f64 {
        let mean: f64 =
            self.trees.iter().map(|t| t.path_length(x)).sum::<f64>() / self.trees.len() as f64;
        2f64.powf(-mean / c_factor(self.subsample_size))
    }

    pub fn scores(&self, rows: &[Vec<f64>]) -> Vec<f64> {
        rows.par_iter().map(|r| self.anomaly_score(r)).collect()
    }
}

/// Area under the ROC curve for `scores` against `positive` labels; tied scores
/// contribute half credit.
pub fn roc_auc(scores: &[f64], positive: &[bool]) -> Result<f64> {
    if scores.len() != positive.len() {
        return Err(Error::LengthMismatch(
            "scores and labels differ in length".into(),
        ));
    }
    let n_pos = positive.iter().filter(|&&p| p).count();
    let n_neg = positive.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::SingleClass);
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let (mut tp, mut fp, mut area) = (0usize, 0usize, 0.0);
    let mut k = 0;
    while k < order.len() {
        let (tp0, fp0) = (tp, fp);
        let s = scores[order[k]];
        while k < order.len() && scores[order[k]] == s {
            if positive[order[k]] {
                tp += 1;
            } else {
                fp += 1;
            }
            k += 1;
        }
        area += (fp - fp0) as f64 * (tp + tp0) as f64 / 2.0;
    }
    Ok(area / (n_pos * n_neg) as f64)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DefenseParams {
    pub n_trees: usize,
    pub subsample_size: usize,
    /// Expected share of adversarial samples; sets the flagging threshold.
    pub contamination: f64,
    /// Use `ln(x + 1e-6)` of flow features so heavy tails don't dominate isolation.
    pub log_flow_features: bool,
    pub seed: u64,
}

impl Default for DefenseParams {
    fn default() -> Self {
        DefenseParams {
            n_trees: 100,
            subsample_size: 256,
            contamination: 0.5,
            log_flow_features: true,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DefenseReport {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub roc_auc: f64,
    pub threshold: f64,
    pub contamination: f64,
    pub confusion: Confusion,
    pub n_benign: usize,
    pub n_adversarial: usize,
    pub degenerate_model: bool,
}

/// Scores benign and adversarial samples and flags those above the
/// `1 - contamination` score quantile.
pub fn evaluate_defense(
    model: &IsolationForestModel,
    benign: &[Vec<f64>],
    adversarial: &[Vec<f64>],
    contamination: f64,
) -> Result<(DefenseReport, Vec<f64>)> {
    if !(contamination > 0.0 && contamination < 1.0) {
        return Err(Error::config("contamination must lie in (0, 1)"));
    }
    if benign.is_empty() || adversarial.is_empty() {
        return Err(Error::SingleClass);
    }
    let rows: Vec<Vec<f64>> = benign.iter().chain(adversarial).cloned().collect();
    let positive: Vec<bool> = (0..rows.len()).map(|i| i >= benign.len()).collect();
    let scores = model.scores(&rows);
    let threshold = quantile(&scores, 1.0 - contamination);
    let mut confusion = Confusion::default();
    for (&s, &p) in scores.iter().zip(&positive) {
        match (p, s > threshold) {
            (true, true) => confusion.tp += 1,
            (false, true) => confusion.fp += 1,
            (false, false) => confusion.tn += 1,
            (true, false) => confusion.fn_ += 1,
        }
    }
    let m = ClassifierMetrics::from_confusion(confusion);
    Ok((
        DefenseReport {
            accuracy: m.accuracy,
            precision: m.precision,
            recall: m.recall,
            f1: m.f1,
            roc_auc: roc_auc(&scores, &positive)?,
            threshold,
            contamination,
            confusion,
            n_benign: benign.len(),
            n_adversarial: adversarial.len(),
            degenerate_model: model.degenerate,
        },
        scores,
    ))
}

/// Detector inputs: the five telemetry indicators followed by `features` of each flow.
pub fn detector_samples(
    trace: &TelemetryTrace,
    flows: &FlowDataset,
    features: &[Feature],
    log_scale: bool,
) -> Result<Vec<Vec<f64>>> {
    if trace.len() != flows.len() {
        return Err(Error::LengthMismatch(format!(
            "{} telemetry samples for {} flows",
            trace.len(),
            flows.len()
        )));
    }
    Ok(trace
        .samples
        .iter()
        .zip(&flows.records)
        .map(|(s, r)| {
            let mut row = s.to_array().to_vec();
            row.extend(features.iter().map(|&f| {
                let v = r.get(f);
                if log_scale {
                    (v.max(0.0) + 1e-6).ln()
                } else {
                    v
                }
            }));
            row
        })
        .collect())
}

//! Hyperparameter grid search with stratified k-fold F1.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::forest::{predict, train_random_forest, FeatureStrategy, ForestParams};
use super::metrics::ClassifierMetrics;
use crate::error::{Error, Result};
use crate::flow::{FlowDataset, Label};
use crate::seed;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GridSearchSpec {
    pub n_estimators: Vec<usize>,
    pub max_depth: Vec<usize>,
    pub features_per_split: Vec<FeatureStrategy>,
    pub k_folds: usize,
}

impl Default for GridSearchSpec {
    fn default() -> Self {
        GridSearchSpec {
            n_estimators: vec![50, 100],
            max_depth: vec![8, 12],
            features_per_split: vec![FeatureStrategy::Sqrt],
            k_folds: 3,
        }
    }
}

impl GridSearchSpec {
    pub fn candidates(&self) -> Vec<ForestParams> {
        let mut out = Vec::new();
        for &n_estimators in &self.n_estimators {
            for &max_depth in &self.max_depth {
                for &features_per_split in &self.features_per_split {
                    out.push(ForestParams {
                        n_estimators,
                        max_depth,
                        features_per_split,
                        bootstrap: true,
                    });
                }
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CvRow {
    pub params: ForestParams,
    /// F1 per evaluated fold, in fold order.
    pub fold_f1: Vec<f64>,
    pub skipped_folds: Vec<usize>,
    pub mean_f1: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSearchResult {
    pub best: ForestParams,
    pub best_mean_f1: f64,
    pub table: Vec<CvRow>,
}

/// Stratified fold assignment: each class is shuffled and dealt round-robin.
pub fn stratified_folds(labels: &[Label], k: usize, seed: u64) -> Vec<usize> {
    let mut rng = seed::rng(seed);
    let mut fold = vec![0; labels.len()];
    for class in [Label::Benign, Label::Malicious] {
        let mut idx: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        idx.shuffle(&mut rng);
        for (pos, i) in idx.into_iter().enumerate() {
            fold[i] = pos % k;
        }
    }
    fold
}

pub fn grid_search(
    train: &FlowDataset,
    spec: &GridSearchSpec,
    seed: u64,
) -> Result<GridSearchResult> {
    let candidates = spec.candidates();
    if candidates.is_empty() {
        return Err(Error::config("grid search has no candidates"));
    }
    for c in &candidates {
        c.validate()?;
    }
    if spec.k_folds < 2 {
        return Err(Error::config("grid search needs at least 2 folds"));
    }
    if spec.k_folds > train.len() {
        return Err(Error::config(format!(
            "{} folds exceed {} training records",
            spec.k_folds,
            train.len()
        )));
    }

    let labels = train.labels();
    let folds = stratified_folds(&labels, spec.k_folds, seed::item_seed(seed, u64::MAX));
    let splits: Vec<(FlowDataset, FlowDataset)> = (0..spec.k_folds)
        .map(|f| {
            let (fit, hold): (Vec<usize>, Vec<usize>) =
                (0..train.len()).partition(|&i| folds[i] != f);
            (train.subset(&fit), train.subset(&hold))
        })
        .collect();

    let mut table = Vec::with_capacity(candidates.len());
    for params in candidates {
        let mut fold_f1 = Vec::new();
        let mut skipped_folds = Vec::new();
        for (f, (fit, hold)) in splits.iter().enumerate() {
            let usable = |d: &FlowDataset| d.class_counts().iter().all(|&c| c > 0);
            if !usable(fit) || !usable(hold) {
                skipped_folds.push(f);
                continue;
            }
            let model = train_random_forest(fit, &params, seed::item_seed(seed, f as u64))?;
            let predicted = predict(&model, hold)?;
            fold_f1.push(ClassifierMetrics::from_labels(&hold.labels(), &predicted)?.f1);
        }
        if fold_f1.is_empty() {
            return Err(Error::AllFoldsSkipped);
        }
        let mean_f1 = fold_f1.iter().sum::<f64>() / fold_f1.len() as f64;
        table.push(CvRow {
            params,
            fold_f1,
            skipped_folds,
            mean_f1,
        });
    }

    // Highest mean F1; ties prefer fewer trees, then shallower trees, then grid order.
    let mut best = 0;
    for (i, row) in table.iter().enumerate().skip(1) {
        let cur = &table[best];
        let better = row.mean_f1 > cur.mean_f1
            || (row.mean_f1 == cur.mean_f1
                && (row.params.n_estimators, row.params.max_depth)
                    < (cur.params.n_estimators, cur.params.max_depth));
        if better {
            best = i;
        }
    }
    Ok(GridSearchResult {
        best: table[best].params,
        best_mean_f1: table[best].mean_f1,
        table,
    })
}

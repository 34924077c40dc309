use serde::{Deserialize, Serialize};

use super::forest::{predict, ForestModel};
use crate::error::{Error, Result};
use crate::flow::{FlowDataset, Label};

/// Confusion counts with malicious as the positive class.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl Confusion {
    pub fn from_labels(truth: &[Label], predicted: &[Label]) -> Result<Confusion> {
        if truth.len() != predicted.len() {
            return Err(Error::LengthMismatch(format!(
                "{} labels vs {} predictions",
                truth.len(),
                predicted.len()
            )));
        }
        let mut c = Confusion::default();
        for (t, p) in truth.iter().zip(predicted) {
            match (t.is_malicious(), p.is_malicious()) {
                (true, true) => c.tp += 1,
                (false, true) => c.fp += 1,
                (false, false) => c.tn += 1,
                (true, false) => c.fn_ += 1,
            }
        }
        Ok(c)
    }

    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }
}

/// Accuracy, precision, recall and F1 in [0, 1].
///
/// An undefined ratio (for example precision with no positive predictions) is
/// reported as 0 and flagged.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassifierMetrics {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub confusion: Confusion,
    pub precision_undefined: bool,
    pub recall_undefined: bool,
}

impl ClassifierMetrics {
    pub fn from_confusion(c: Confusion) -> ClassifierMetrics {
        let ratio = |num: usize, den: usize| {
            if den == 0 {
                (0.0, true)
            } else {
                (num as f64 / den as f64, false)
            }
        };
        let (accuracy, _) = ratio(c.tp + c.tn, c.total());
        let (precision, precision_undefined) = ratio(c.tp, c.tp + c.fp);
        let (recall, recall_undefined) = ratio(c.tp, c.tp + c.fn_);
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        ClassifierMetrics {
            accuracy,
            precision,
            recall,
            f1,
            confusion: c,
            precision_undefined,
            recall_undefined,
        }
    }

    pub fn from_labels(truth: &[Label], predicted: &[Label]) -> Result<ClassifierMetrics> {
        Confusion::from_labels(truth, predicted).map(Self::from_confusion)
    }
}

pub fn evaluate(model: &ForestModel, test: &FlowDataset) -> Result<ClassifierMetrics> {
    if test.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let predicted = predict(model, test)?;
    ClassifierMetrics::from_labels(&test.labels(), &predicted)
}

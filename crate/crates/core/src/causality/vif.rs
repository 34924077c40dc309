//! Variance inflation factors and iterative multicollinearity filtering.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::serde_ext;
use crate::stats::ols::rss_tolerant;

/// Residual variance below this fraction of total variance counts as exact collinearity.
const PERFECT_FIT: f64 = 1e-14;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VifReport {
    /// VIF of every input column before filtering.
    #[serde(with = "serde_ext::float_vec")]
    pub initial: Vec<f64>,
    /// Surviving column indices, ascending.
    pub retained: Vec<usize>,
    /// VIF of each retained column among the retained set.
    #[serde(with = "serde_ext::float_vec")]
    pub retained_vif: Vec<f64>,
    /// Removed column indices in removal order.
    pub dropped: Vec<usize>,
    pub threshold: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// VIF of each column against the others (with an intercept). Constant or
/// perfectly explained columns are infinite.
pub fn vif(columns: &[Vec<f64>]) -> Result<Vec<f64>> {
    let all: Vec<usize> = (0..columns.len()).collect();
    vif_subset(columns, &all)
}

fn vif_subset(columns: &[Vec<f64>], subset: &[usize]) -> Result<Vec<f64>> {
    let n = columns.first().map_or(0, Vec::len);
    if columns.iter().any(|c| c.len() != n) {
        return Err(Error::LengthMismatch("VIF columns differ in length".into()));
    }
    if n < 2 {
        return Err(Error::InsufficientData("VIF needs at least 2 rows".into()));
    }
    if subset.len() < 2 {
        return Ok(vec![1.0; subset.len()]);
    }
    // VIF is affine invariant, so regress centered unit-norm columns without an
    // intercept; this keeps offsets and scales out of the conditioning.
    let mut constant = vec![false; columns.len()];
    let mut unit: Vec<Vec<f64>> = vec![Vec::new(); columns.len()];
    for &j in subset {
        let col = &columns[j];
        let mean = col.iter().sum::<f64>() / n as f64;
        let centered: Vec<f64> = col.iter().map(|v| v - mean).collect();
        let norm = centered.iter().map(|v| v * v).sum::<f64>().sqrt();
        let scale = col.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        constant[j] = norm * norm <= n as f64 * (1e-12 * scale).powi(2);
        unit[j] = if constant[j] {
            vec![0.0; n]
        } else {
            centered.iter().map(|v| v / norm).collect()
        };
    }
    Ok(subset
        .iter()
        .map(|&j| {
            if constant[j] {
                return f64::INFINITY;
            }
            let y = DVector::from_column_slice(&unit[j]);
            let others: Vec<usize> = subset.iter().copied().filter(|&k| k != j).collect();
            let x = DMatrix::from_fn(n, others.len(), |i, c| unit[others[c]][i]);
            // Unit norm, so the total sum of squares is 1.
            let rss = rss_tolerant(&x, &y);
            if rss <= PERFECT_FIT {
                f64::INFINITY
            } else {
                (1.0 / rss).max(1.0)
            }
        })
        .collect())
}

/// Drops the highest-VIF column until every VIF is at most `threshold`.
/// Ties drop the later column.
pub fn vif_filter(columns: &[Vec<f64>], threshold: f64) -> Result<VifReport> {
    if !(threshold >= 1.0) {
        return Err(Error::config(format!(
            "VIF threshold must be at least 1, got {threshold}"
        )));
    }
    let initial = vif(columns)?;
    let note =
        (columns.len() < 2).then(|| "fewer than two features; nothing to filter".to_string());
    let mut retained: Vec<usize> = (0..columns.len()).collect();
    let mut current = initial.clone();
    let mut dropped = Vec::new();
    loop {
        let mut worst: Option<usize> = None;
        for (pos, &v) in current.iter().enumerate() {
            if v > threshold && worst.is_none_or(|w| v >= current[w]) {
                worst = Some(pos);
            }
        }
        let Some(pos) = worst else { break };
        dropped.push(retained.remove(pos));
        current = vif_subset(columns, &retained)?;
    }
    Ok(VifReport {
        initial,
        retained,
        retained_vif: current,
        dropped,
        threshold,
        note,
    })
}

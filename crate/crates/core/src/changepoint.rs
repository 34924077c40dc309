//! Binary segmentation change-point detection with L2 and RBF costs.

use rand::seq::index;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed;
use crate::stats::median;

/// Series longer than this estimate the RBF bandwidth from a seeded subsample.
pub const BANDWIDTH_SUBSAMPLE: usize = 500;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "lowercase")]
pub enum CostModel {
    /// Sum of squared deviations from the segment mean.
    L2,
    /// Gaussian-kernel cost; a missing bandwidth means the median heuristic.
    Rbf {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        bandwidth: Option<f64>,
    },
}

impl CostModel {
    pub const RBF_AUTO: CostModel = CostModel::Rbf { bandwidth: None };

    /// Replaces an automatic bandwidth by its median-heuristic value for `series`.
    pub fn resolve(self, series: &[f64], seed: u64) -> Result<CostModel> {
        match self {
            CostModel::Rbf { bandwidth: None } => Ok(CostModel::Rbf {
                bandwidth: Some(median_heuristic_bandwidth(series, seed)?),
            }),
            CostModel::Rbf { bandwidth: Some(h) } if !(h > 0.0 && h.is_finite()) => Err(
                Error::config(format!("RBF bandwidth must be positive, got {h}")),
            ),
            other => Ok(other),
        }
    }
}

/// Median absolute pairwise difference over (a seeded subsample of) the series.
///
/// Falls back to the median of the nonzero differences when most values
/// coincide; a constant series has no usable bandwidth.
pub fn median_heuristic_bandwidth(series: &[f64], seed: u64) -> Result<f64> {
    if series.len() < 2 {
        return Err(Error::InsufficientData(
            "bandwidth needs at least 2 points".into(),
        ));
    }
    let points: Vec<f64> = if series.len() > BANDWIDTH_SUBSAMPLE {
        let mut idx =
            index::sample(&mut seed::rng(seed), series.len(), BANDWIDTH_SUBSAMPLE).into_vec();
        idx.sort_unstable();
        idx.into_iter().map(|i| series[i]).collect()
    } else {
        series.to_vec()
    };
    let mut diffs = Vec::with_capacity(points.len() * (points.len() - 1) / 2);
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            diffs.push((points[i] - points[j]).abs());
        }
    }
    let h = median(&mut diffs);
    if h > 0.0 {
        return Ok(h);
    }
    let mut nonzero: Vec<f64> = diffs.into_iter().filter(|&d| d > 0.0).collect();
    if nonzero.is_empty() {
        return Err(Error::DegenerateVariance(
            "series is constant; RBF bandwidth undefined".into(),
        ));
    }
    Ok(median(&mut nonzero))
}

fn kernel(a: f64, b: f64, gamma: f64) -> f64 {
    let d = a - b;
    (-gamma * d * d).exp()
}

fn rbf_gamma(model: CostModel, series: &[f64]) -> Result<Option<f64>> {
    match model.resolve(series, 0)? {
        CostModel::L2 => Ok(None),
        CostModel::Rbf { bandwidth } => {
            let h = bandwidth.expect("resolved");
            Ok(Some(1.0 / (2.0 * h * h)))
        }
    }
}

/// Cost of `series[a..b]` under `model`.
pub fn segment_cost(series: &[f64], a: usize, b: usize, model: CostModel) -> Result<f64> {
    if a >= b || b > series.len() {
        return Err(Error::config(format!(
            "segment [{a}, {b}) is empty or exceeds series length {}",
            series.len()
        )));
    }
    let seg = &series[a..b];
    let n = seg.len() as f64;
    Ok(match rbf_gamma(model, series)? {
        None => {
            let mean = seg.iter().sum::<f64>() / n;
            seg.iter().map(|x| (x - mean) * (x - mean)).sum()
        }
        Some(gamma) => {
            let mut s = 0.0;
            for i in 0..seg.len() {
                for j in 0..seg.len() {
                    s += kernel(seg[i], seg[j], gamma);
                }
            }
            n - s / n
        }
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChangePointResult {
    /// Segment ends in increasing order; the last one is the series length.
    pub breakpoints: Vec<usize>,
    /// Cost reduction of each accepted split, in acceptance order.
    pub gains: Vec<f64>,
    /// Split index accepted at each step, in acceptance order.
    pub split_order: Vec<usize>,
    /// True when fewer than the requested splits were admissible.
    pub exhausted: bool,
    pub cost_model: CostModel,
    pub total_cost: f64,
}

impl ChangePointResult {
    /// Interior breakpoints only.
    pub fn interior(&self) -> &[usize] {
        &self.breakpoints[..self.breakpoints.len() - 1]
    }

    /// `[start, end)` of every segment.
    pub fn segments(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.breakpoints.len());
        let mut start = 0;
        for &b in &self.breakpoints {
            out.push((start, b));
            start = b;
        }
        out
    }
}

/// All admissible split costs of one segment, computed in a single sweep.
struct Scanner<'a> {
    series: &'a [f64],
    gamma: Option<f64>,
}

impl Scanner<'_> {
    fn cost(&self, a: usize, b: usize) -> f64 {
        self.prefix_costs(a, b).last().copied().unwrap_or(0.0)
    }

    /// `out[t - a - 1]` is the cost of `[a, t)` for `t` in `a+1..=b`.
    fn prefix_costs(&self, a: usize, b: usize) -> Vec<f64> {
        let seg = &self.series[a..b];
        let mut out = Vec::with_capacity(seg.len());
        match self.gamma {
            None => {
                let center = seg.iter().sum::<f64>() / seg.len() as f64;
                let (mut s1, mut s2) = (0.0, 0.0);
                for (k, &x) in seg.iter().enumerate() {
                    let d = x - center;
                    s1 += d;
                    s2 += d * d;
                    out.push((s2 - s1 * s1 / (k + 1) as f64).max(0.0));
                }
            }
            Some(gamma) => {
                let mut sum = 0.0;
                for k in 0..seg.len() {
                    let mut cross = 0.0;
                    for i in 0..k {
                        cross += kernel(seg[i], seg[k], gamma);
                    }
                    sum += 2.0 * cross + 1.0;
                    let n = (k + 1) as f64;
                    out.push((n - sum / n).max(0.0));
                }
            }
        }
        out
    }

    /// Costs of `[t, b)` for `t` in `a..b`, indexed by `t - a`.
    fn suffix_costs(&self, a: usize, b: usize) -> Vec<f64> {
        let reversed: Vec<f64> = self.series[a..b].iter().rev().copied().collect();
        let scanner = Scanner {
            series: &reversed,
            gamma: self.gamma,
        };
        let mut costs = scanner.prefix_costs(0, reversed.len());
        costs.reverse();
        costs
    }

    /// Best split of `[a, b)` with both parts at least `min_len` long; ties keep the smaller index.
    fn best_split(&self, a: usize, b: usize, min_len: usize) -> Option<(usize, f64)> {
        if b - a < 2 * min_len {
            return None;
        }
        let prefix = self.prefix_costs(a, b);
        let suffix = self.suffix_costs(a, b);
        let total = prefix[b - a - 1];
        let mut best: Option<(usize, f64)> = None;
        for t in a + min_len..=b - min_len {
            let gain = total - prefix[t - a - 1] - suffix[t - a];
            if best.is_none_or(|(_, g)| gain > g) {
                best = Some((t, gain));
            }
        }
        best
    }
}

/// Greedy binary segmentation into at most `n_bkps + 1` segments.
pub fn binseg(
    series: &[f64],
    n_bkps: usize,
    model: CostModel,
    min_segment_length: usize,
) -> Result<ChangePointResult> {
    if n_bkps == 0 {
        return Err(Error::config("n_bkps must be at least 1"));
    }
    if min_segment_length == 0 {
        return Err(Error::config("min_segment_length must be at least 1"));
    }
    let needed = (n_bkps + 1) * min_segment_length;
    if series.len() < needed {
        return Err(Error::InsufficientData(format!(
            "series of length {} cannot hold {} segments of length {min_segment_length}",
            series.len(),
            n_bkps + 1
        )));
    }
    if series.iter().any(|v| !v.is_finite()) {
        return Err(Error::InsufficientData(
            "series contains non-finite values".into(),
        ));
    }
    let model = model.resolve(series, 0)?;
    let scanner = Scanner {
        series,
        gamma: rbf_gamma(model, series)?,
    };

    let n = series.len();
    // Open segments with their cached best split.
    let mut segments: Vec<(usize, usize, Option<(usize, f64)>)> =
        vec![(0, n, scanner.best_split(0, n, min_segment_length))];
    let mut gains = Vec::new();
    let mut split_order = Vec::new();
    let mut exhausted = false;
    while split_order.len() < n_bkps {
        let mut pick: Option<(usize, usize, f64)> = None;
        for (k, &(_, _, best)) in segments.iter().enumerate() {
            if let Some((t, g)) = best {
                let better = match pick {
                    None => true,
                    Some((_, pt, pg)) => g > pg || (g == pg && t < pt),
                };
                if better {
                    pick = Some((k, t, g));
                }
            }
        }
        let Some((k, t, g)) = pick else {
            exhausted = true;
            break;
        };
        let (a, b, _) = segments.swap_remove(k);
        segments.push((a, t, scanner.best_split(a, t, min_segment_length)));
        segments.push((t, b, scanner.best_split(t, b, min_segment_length)));
        gains.push(g);
        split_order.push(t);
    }

    let mut breakpoints = split_order.clone();
    breakpoints.sort_unstable();
    breakpoints.push(n);
    let mut total_cost = 0.0;
    let mut start = 0;
    for &b in &breakpoints {
        total_cost += scanner.cost(start, b);
        start = b;
    }
    Ok(ChangePointResult {
        breakpoints,
        gains,
        split_order,
        exhausted,
        cost_model: model,
        total_cost,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn step(levels: &[(usize, f64)]) -> Vec<f64> {
        levels
            .iter()
            .flat_map(|&(len, v)| std::iter::repeat_n(v, len))
            .collect()
    }

    #[test]
    fn clean_step_found_exactly() {
        let s = step(&[(50, 0.0), (50, 5.0)]);
        let r = binseg(&s, 1, CostModel::L2, 2).unwrap();
        assert_eq!(r.breakpoints, vec![50, 100]);
    }

    #[test]
    fn mean_shifts_found_with_rbf() {
        let s: Vec<f64> = step(&[(30, 0.0), (30, 4.0), (30, -3.0)])
            .iter()
            .enumerate()
            .map(|(i, v)| v + 0.1 * ((i * 7919) % 13) as f64 / 13.0)
            .collect();
        let r = binseg(&s, 2, CostModel::RBF_AUTO, 2).unwrap();
        assert_eq!(r.breakpoints, vec![30, 60, 90]);
    }

    #[test]
    fn constant_series_l2_has_zero_gains() {
        let s = vec![1.5; 20];
        let r = binseg(&s, 3, CostModel::L2, 2).unwrap();
        assert!(r.gains.iter().all(|&g| g == 0.0));
        assert_eq!(r.breakpoints.len(), 4);
        assert_eq!(*r.breakpoints.last().unwrap(), 20);
    }

    #[test]
    fn constant_series_rbf_auto_is_error() {
        assert!(matches!(
            binseg(&[2.0; 10], 1, CostModel::RBF_AUTO, 2),
            Err(Error::DegenerateVariance(_))
        ));
    }

    #[test]
    fn too_short_series_is_rejected() {
        assert!(matches!(
            binseg(&[1.0, 2.0, 3.0], 2, CostModel::L2, 2),
            Err(Error::InsufficientData(_))
        ));
    }

    #[test]
    fn scanner_matches_direct_costs() {
        let s: Vec<f64> = (0..25).map(|i| ((i * 37) % 11) as f64 * 0.3).collect();
        for model in [
            CostModel::L2,
            CostModel::Rbf {
                bandwidth: Some(0.7),
            },
        ] {
            let scanner = Scanner {
                series: &s,
                gamma: rbf_gamma(model, &s).unwrap(),
            };
            let prefix = scanner.prefix_costs(3, 20);
            let suffix = scanner.suffix_costs(3, 20);
            for t in 4..=20 {
                let direct = segment_cost(&s, 3, t, model).unwrap();
                assert!((prefix[t - 4] - direct).abs() < 1e-9);
            }
            for t in 3..20 {
                let direct = segment_cost(&s, t, 20, model).unwrap();
                assert!((suffix[t - 3] - direct).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn median_heuristic_fallbacks() {
        let mostly_same = [0.0, 0.0, 0.0, 0.0, 0.0, 2.0];
        assert_eq!(median_heuristic_bandwidth(&mostly_same, 0).unwrap(), 2.0);
        let h = median_heuristic_bandwidth(&[0.0, 1.0, 3.0], 0).unwrap();
        assert_eq!(h, 2.0);
    }

    #[test]
    fn segments_partition_series() {
        let s = step(&[(10, 0.0), (15, 3.0), (5, 9.0)]);
        let r = binseg(&s, 2, CostModel::L2, 2).unwrap();
        let segs = r.segments();
        assert_eq!(segs.first().unwrap().0, 0);
        assert_eq!(segs.last().unwrap().1, 30);
        for w in segs.windows(2) {
            assert_eq!(w[0].1, w[1].0);
        }
    }
}

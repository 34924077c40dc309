//! Ranks flow features by how strongly they move the observed telemetry.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::granger::granger_test;
use super::vif::vif_filter;
use crate::error::{Error, Result};
use crate::flow::Feature;
use crate::sidechannel::{Indicator, TraceObservations};
use crate::stats::{binomial_upper_tail, mean_std, ols_fit_columns};

/// Floor applied to p-values before taking logs, so exact fits stay finite.
const MIN_P: f64 = 1e-300;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CausalityParams {
    pub alpha: f64,
    pub vif_threshold: f64,
    pub max_lag: usize,
    /// Run Granger tests on the full series for every feature and indicator.
    pub granger: bool,
}

impl Default for CausalityParams {
    fn default() -> Self {
        CausalityParams {
            alpha: 0.05,
            vif_threshold: 10.0,
            max_lag: 5,
            granger: true,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestKind {
    Ols,
    Granger,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignificanceRecord {
    pub feature: Feature,
    pub indicator: Indicator,
    pub test: TestKind,
    /// `[start, end)` for segment regressions; absent for full-series tests.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub segment: Option<[usize; 2]>,
    /// Standardized coefficient (OLS) or lag order (Granger).
    pub effect: f64,
    pub p_value: f64,
    pub significant: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SegmentAnalysis {
    pub indicator: Indicator,
    pub segment: [usize; 2],
    pub retained: Vec<Feature>,
    pub dropped: Vec<Feature>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_squared: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub skipped: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureScore {
    pub feature: Feature,
    /// Segment regressions in which the feature was significant.
    pub ols_hits: usize,
    /// Segment regressions in which the feature survived VIF filtering.
    pub ols_tests: usize,
    pub granger_hits: usize,
    pub granger_tests: usize,
    /// Mean of `-log10 p` over the feature's segment regressions.
    pub evidence: f64,
    /// Probability of at least `ols_hits` significant results by chance alone.
    pub chance_p: f64,
    pub sensitive: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SensitivityReport {
    /// Features with any significant result, by decreasing evidence.
    pub ranking: Vec<Feature>,
    /// Ranked features whose segment hit count is unlikely under chance.
    pub sensitive_features: Vec<Feature>,
    pub scores: Vec<FeatureScore>,
    pub segments: Vec<SegmentAnalysis>,
    pub records: Vec<SignificanceRecord>,
    pub notes: Vec<String>,
    pub params: CausalityParams,
}

fn standardized(col: &[f64]) -> Vec<f64> {
    let (mean, std) = mean_std(col);
    if std > 0.0 {
        col.iter().map(|v| (v - mean) / std).collect()
    } else {
        vec![0.0; col.len()]
    }
}

/// Per-segment VIF filtering and OLS t-tests, plus optional Granger tests.
///
/// `breakpoints` maps each analyzed indicator to its segment ends; the last
/// end must equal the trace length.
pub fn identify_sensitive(
    obs: TraceObservations<'_>,
    breakpoints: &BTreeMap<Indicator, Vec<usize>>,
    params: &CausalityParams,
) -> Result<SensitivityReport> {
    if !(0.0..=1.0).contains(&params.alpha) {
        return Err(Error::config("alpha must lie in [0, 1]"));
    }
    if obs.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if obs.aligned_features.len() != obs.len() {
        return Err(Error::LengthMismatch(format!(
            "{} samples but {} aligned feature rows",
            obs.len(),
            obs.aligned_features.len()
        )));
    }
    let n = obs.len();
    let features = obs.feature_names;
    let alpha = params.alpha;
    let mut records = Vec::new();
    let mut segments = Vec::new();
    let mut notes = Vec::new();

    for (&indicator, ends) in breakpoints {
        if ends.last() != Some(&n) || ends.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::LengthMismatch(format!(
                "{indicator}: breakpoints {ends:?} do not partition {n} samples"
            )));
        }
        let series = obs.series(indicator);
        let mut start = 0;
        for &end in ends {
            let seg = [start, end];
            start = end;
            let columns: Vec<Vec<f64>> = (0..features.len())
                .map(|j| {
                    standardized(
                        &obs.aligned_features[seg[0]..seg[1]]
                            .iter()
                            .map(|r| r[j])
                            .collect::<Vec<_>>(),
                    )
                })
                .collect();
            let mut analysis = SegmentAnalysis {
                indicator,
                segment: seg,
                retained: vec![],
                dropped: vec![],
                r_squared: None,
                skipped: None,
            };
            let vif = match vif_filter(&columns, params.vif_threshold) {
                Ok(v) => v,
                Err(e) => {
                    analysis.skipped = Some(e.to_string());
                    segments.push(analysis);
                    continue;
                }
            };
            analysis.retained = vif.retained.iter().map(|&j| features[j]).collect();
            analysis.dropped = vif.dropped.iter().map(|&j| features[j]).collect();
            let len = seg[1] - seg[0];
            if len <= vif.retained.len() + 1 {
                analysis.skipped = Some(format!(
                    "{len} samples cannot support {} regressors",
                    vif.retained.len()
                ));
                segments.push(analysis);
                continue;
            }
            let mut design = vec![vec![1.0; len]];
            design.extend(vif.retained.iter().map(|&j| columns[j].clone()));
            match ols_fit_columns(&design, &series[seg[0]..seg[1]]) {
                Ok(fit) => {
                    analysis.r_squared = Some(fit.r_squared);
                    for (pos, &j) in vif.retained.iter().enumerate() {
                        let p = fit.p_values[pos + 1];
                        records.push(SignificanceRecord {
                            feature: features[j],
                            indicator,
                            test: TestKind::Ols,
                            segment: Some(seg),
                            effect: fit.coefficients[pos + 1],
                            p_value: p,
                            significant: p < alpha,
                        });
                    }
                }
                Err(e) => analysis.skipped = Some(e.to_string()),
            }
            segments.push(analysis);
        }
    }

    if params.granger {
        for &indicator in breakpoints.keys() {
            let series = obs.series(indicator);
            for (j, &feature) in features.iter().enumerate() {
                match granger_test(&obs.feature_column(j), &series, params.max_lag, alpha) {
                    Ok(g) => records.push(SignificanceRecord {
                        feature,
                        indicator,
                        test: TestKind::Granger,
                        segment: None,
                        effect: g.lag as f64,
                        p_value: g.p_value,
                        significant: g.p_value < alpha,
                    }),
                    Err(e) => notes.push(format!("granger {feature} -> {indicator}: {e}")),
                }
            }
        }
    }

    if !records.iter().any(|r| r.test == TestKind::Ols) {
        let reasons: Vec<String> = segments
            .iter()
            .filter_map(|s| {
                s.skipped
                    .as_ref()
                    .map(|r| format!("{} {:?}: {r}", s.indicator, s.segment))
            })
            .collect();
        return Err(Error::NoAnalyzableSegments(if reasons.is_empty() {
            "no indicator was segmented".into()
        } else {
            reasons.join("; ")
        }));
    }
    for s in &segments {
        if let Some(r) = &s.skipped {
            notes.push(format!(
                "skipped {} segment {:?}: {r}",
                s.indicator, s.segment
            ));
        }
    }

    let mut scores: Vec<FeatureScore> = features
        .iter()
        .map(|&feature| {
            let count = |kind: TestKind, sig: bool| {
                records
                    .iter()
                    .filter(|r| r.feature == feature && r.test == kind && (!sig || r.significant))
                    .count()
            };
            let ols_hits = count(TestKind::Ols, true);
            let ols_tests = count(TestKind::Ols, false);
            let chance_p = binomial_upper_tail(ols_hits, ols_tests, alpha);
            let log_p: f64 = records
                .iter()
                .filter(|r| r.feature == feature && r.test == TestKind::Ols)
                .map(|r| -r.p_value.max(MIN_P).log10())
                .sum();
            FeatureScore {
                feature,
                ols_hits,
                ols_tests,
                evidence: if ols_tests == 0 {
                    0.0
                } else {
                    log_p / ols_tests as f64
                },
                granger_hits: count(TestKind::Granger, true),
                granger_tests: count(TestKind::Granger, false),
                chance_p,
                sensitive: ols_hits > 0 && chance_p < alpha,
            }
        })
        .collect();
    scores.sort_by(|a, b| {
        b.evidence
            .total_cmp(&a.evidence)
            .then(b.ols_hits.cmp(&a.ols_hits))
            .then(b.granger_hits.cmp(&a.granger_hits))
            .then(a.feature.name().cmp(b.feature.name()))
    });
    let ranking = scores
        .iter()
        .filter(|s| s.ols_hits + s.granger_hits > 0)
        .map(|s| s.feature)
        .collect();
    let sensitive_features = scores
        .iter()
        .filter(|s| s.sensitive)
        .map(|s| s.feature)
        .collect();

    Ok(SensitivityReport {
        ranking,
        sensitive_features,
        scores,
        segments,
        records,
        notes,
        params: params.clone(),
    })
}

//! Granger causality F-test with AIC lag selection.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::serde_ext;
use crate::stats::{f_sf, ols_fit, OlsFit};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrangerResult {
    /// Lag chosen by AIC on the unrestricted model.
    pub lag: usize,
    #[serde(with = "serde_ext::float")]
    pub f_stat: f64,
    pub p_value: f64,
    pub df_num: usize,
    pub df_den: usize,
    pub rss_restricted: f64,
    pub rss_unrestricted: f64,
    /// Observations used, identical for every candidate lag.
    pub n_obs: usize,
    pub alpha: f64,
    pub causal: bool,
}

fn lagged_design(effect: &[f64], cause: Option<&[f64]>, lag: usize, start: usize) -> DMatrix<f64> {
    let rows = effect.len() - start;
    let cols = 1 + lag * if cause.is_some() { 2 } else { 1 };
    DMatrix::from_fn(rows, cols, |r, c| {
        let t = start + r;
        if c == 0 {
            1.0
        } else if c <= lag {
            effect[t - c]
        } else {
            cause.expect("cause columns")[t - (c - lag)]
        }
    })
}

fn fit(effect: &[f64], cause: Option<&[f64]>, lag: usize, start: usize) -> Result<OlsFit> {
    let y = DVector::from_column_slice(&effect[start..]);
    ols_fit(&lagged_design(effect, cause, lag, start), &y)
}

/// Tests whether lags of `cause` improve prediction of `effect` beyond its own lags.
///
/// Every lag in `1..=max_lag` is fitted on the same sample (`t >= max_lag`) and
/// the unrestricted model with the lowest AIC is tested. Lags whose design is
/// rank deficient are skipped.
pub fn granger_test(
    cause: &[f64],
    effect: &[f64],
    max_lag: usize,
    alpha: f64,
) -> Result<GrangerResult> {
    if cause.len() != effect.len() {
        return Err(Error::LengthMismatch(format!(
            "cause has {} samples, effect has {}",
            cause.len(),
            effect.len()
        )));
    }
    if max_lag == 0 {
        return Err(Error::config("max_lag must be at least 1"));
    }
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::config("alpha must lie in [0, 1]"));
    }
    let n = effect.len();
    if n < max_lag + 2 * max_lag + 2 {
        return Err(Error::InsufficientData(format!(
            "{n} samples cannot support {max_lag} lags"
        )));
    }
    let first = effect[0];
    if effect.iter().all(|&v| v == first) {
        return Err(Error::DegenerateVariance(
            "effect series is constant".into(),
        ));
    }

    let start = max_lag;
    let n_obs = n - start;
    let mut best: Option<(usize, f64, OlsFit)> = None;
    let mut last_error = None;
    for lag in 1..=max_lag {
        match fit(effect, Some(cause), lag, start) {
            Ok(u) => {
                let k = (2 * lag + 1) as f64;
                let aic = if u.rss > 0.0 {
                    n_obs as f64 * (u.rss / n_obs as f64).ln() + 2.0 * k
                } else {
                    f64::NEG_INFINITY
                };
                if best.as_ref().is_none_or(|(_, a, _)| aic < *a) {
                    best = Some((lag, aic, u));
                }
            }
            Err(e) => last_error = Some(e),
        }
    }
    let Some((lag, _, unrestricted)) = best else {
        return Err(last_error.unwrap_or(Error::InsufficientData("no lag could be fitted".into())));
    };
    let restricted = fit(effect, None, lag, start)?;

    let df_num = lag;
    let df_den = n_obs - (2 * lag + 1);
    let (rss_r, rss_u) = (restricted.rss, unrestricted.rss);
    let (f_stat, p_value) = if rss_u > 0.0 {
        let f = (((rss_r - rss_u) / df_num as f64) / (rss_u / df_den as f64)).max(0.0);
        (f, f_sf(f, df_num as f64, df_den as f64))
    } else if rss_r > 0.0 {
        (f64::INFINITY, 0.0)
    } else {
        (0.0, 1.0)
    };
    Ok(GrangerResult {
        lag,
        f_stat,
        p_value,
        df_num,
        df_den,
        rss_restricted: rss_r,
        rss_unrestricted: rss_u,
        n_obs,
        alpha,
        causal: p_value < alpha,
    })
}

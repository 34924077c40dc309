//! Ordinary least squares with coefficient t-tests.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::dist::student_t_two_sided_p;
use crate::error::{Error, Result};

/// Relative size of an `R` diagonal entry below which a column counts as dependent.
pub const RANK_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OlsFit {
    pub coefficients: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub t_stats: Vec<f64>,
    pub p_values: Vec<f64>,
    pub residuals: Vec<f64>,
    pub rss: f64,
    pub r_squared: f64,
    pub n: usize,
    pub dof: usize,
}

/// Fits `y ~ X` where `columns` are the design columns (include an intercept column yourself).
pub fn ols_fit_columns(columns: &[Vec<f64>], y: &[f64]) -> Result<OlsFit> {
    let n = y.len();
    if let Some(c) = columns.iter().find(|c| c.len() != n) {
        return Err(Error::LengthMismatch(format!(
            "design column has {} rows, response has {n}",
            c.len()
        )));
    }
    let x = DMatrix::from_fn(n, columns.len(), |i, j| columns[j][i]);
    ols_fit(&x, &DVector::from_column_slice(y))
}

/// Least squares via column-pivoted QR; p-values are two-sided with `n - k` dof.
pub fn ols_fit(x: &DMatrix<f64>, y: &DVector<f64>) -> Result<OlsFit> {
    let (n, k) = x.shape();
    if y.len() != n {
        return Err(Error::LengthMismatch(format!(
            "design has {n} rows, response has {}",
            y.len()
        )));
    }
    if k == 0 {
        return Err(Error::InsufficientData("design has no columns".into()));
    }
    if n <= k {
        return Err(Error::InsufficientData(format!(
            "{n} observations cannot support {k} coefficients"
        )));
    }
    if x.iter().chain(y.iter()).any(|v| !v.is_finite()) {
        return Err(Error::InsufficientData(
            "non-finite value in regression".into(),
        ));
    }

    let (order, r, qty) = pivoted_qr(x, y);
    let rank = numerical_rank(&r);
    if rank < k {
        let mut columns: Vec<usize> = order[rank..].to_vec();
        columns.sort_unstable();
        return Err(Error::Collinear { columns });
    }

    let r = r.view((0, 0), (k, k)).into_owned();
    let z = r
        .solve_upper_triangular(&qty.rows(0, k).into_owned())
        .ok_or(Error::Collinear { columns: vec![] })?;
    let r_inv = r
        .solve_upper_triangular(&DMatrix::identity(k, k))
        .ok_or(Error::Collinear { columns: vec![] })?;

    let mut coefficients = vec![0.0; k];
    let mut unscaled_var = vec![0.0; k];
    for (pos, &col) in order.iter().enumerate() {
        coefficients[col] = z[pos];
        unscaled_var[col] = r_inv.row(pos).iter().map(|v| v * v).sum();
    }

    let beta = DVector::from_column_slice(&coefficients);
    let residuals = y - x * &beta;
    let rss = residuals.norm_squared();
    let dof = n - k;
    let sigma2 = rss / dof as f64;

    let mean_y = y.mean();
    let tss: f64 = y.iter().map(|v| (v - mean_y) * (v - mean_y)).sum();
    if tss == 0.0 {
        return Err(Error::DegenerateVariance("response is constant".into()));
    }

    let std_errors: Vec<f64> = unscaled_var.iter().map(|v| (sigma2 * v).sqrt()).collect();
    let mut t_stats = Vec::with_capacity(k);
    let mut p_values = Vec::with_capacity(k);
    for (b, se) in coefficients.iter().zip(&std_errors) {
        let (t, p) = if *se > 0.0 {
            let t = b / se;
            (t, student_t_two_sided_p(t, dof as f64))
        } else if *b == 0.0 {
            (0.0, 1.0)
        } else {
            (b.signum() * f64::INFINITY, 0.0)
        };
        t_stats.push(t);
        p_values.push(p);
    }

    Ok(OlsFit {
        coefficients,
        std_errors,
        t_stats,
        p_values,
        residuals: residuals.iter().copied().collect(),
        rss,
        r_squared: 1.0 - rss / tss,
        n,
        dof,
    })
}

/// Residual sum of squares of `y` on the numerically independent part of `x`.
///
/// Dependent columns are dropped instead of reported, so this never fails on
/// rank deficiency.
pub fn rss_tolerant(x: &DMatrix<f64>, y: &DVector<f64>) -> f64 {
    if x.ncols() == 0 {
        return y.norm_squared();
    }
    let (_, r, qty) = pivoted_qr(x, y);
    let rank = numerical_rank(&r);
    qty.rows(rank, qty.len() - rank).norm_squared()
}

/// Returns (original column at each pivot position, R, Qᵀy).
fn pivoted_qr(x: &DMatrix<f64>, y: &DVector<f64>) -> (Vec<usize>, DMatrix<f64>, DVector<f64>) {
    let k = x.ncols();
    let qr = x.clone().col_piv_qr();
    let mut order = DMatrix::from_fn(1, k, |_, j| j);
    qr.p().permute_columns(&mut order);
    let mut qty = y.clone();
    qr.q_tr_mul(&mut qty);
    (order.iter().copied().collect(), qr.r(), qty)
}

fn numerical_rank(r: &DMatrix<f64>) -> usize {
    let diag = r.nrows().min(r.ncols());
    let lead = (0..diag).map(|i| r[(i, i)].abs()).fold(0.0, f64::max);
    if lead == 0.0 {
        return 0;
    }
    (0..diag)
        .take_while(|&i| r[(i, i)].abs() > RANK_TOLERANCE * lead)
        .count()
}

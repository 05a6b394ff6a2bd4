//! Least-squares linear models via pseudo-inverse, with RMSE and linear
//! correlation.
//!
//! The fit is the minimum-norm least-squares solution: the design matrix
//! (with an intercept column of ones appended) is reduced by QR, and the
//! small triangular factor is decomposed by SVD with singular values below
//! `REL_TOL * sigma_max` treated as zero. Duplicated or collinear columns
//! therefore never produce non-finite coefficients.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Relative singular-value cutoff for the pseudo-inverse.
pub const REL_TOL: f64 = 1e-12;

/// Fitted linear model; one coefficient per input column plus an intercept.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    pub coefficients: DVector<f64>,
    pub intercept: f64,
}

/// Minimum-norm least-squares fit of `y` on `x` with an intercept.
///
/// The intercept column participates in the minimum-norm objective like any
/// other column.
pub fn fit_pseudoinverse(x: &DMatrix<f64>, y: &DVector<f64>) -> Result<LinearModel> {
    let rows = x.nrows();
    let cols = x.ncols();
    if rows == 0 {
        return Err(Error::EmptyInput("design matrix has zero rows"));
    }
    if y.len() != rows {
        return Err(Error::DimensionMismatch {
            context: "fit_pseudoinverse target length",
            expected: rows,
            found: y.len(),
        });
    }
    if x.iter().any(|v| !v.is_finite()) || y.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidData(
            "non-finite entry in regression input".into(),
        ));
    }

    // Design = [x | 1]; QR reduces to the (cols+1)-square triangular factor,
    // which shares the singular values of the design matrix.
    let design = x.clone().insert_column(cols, 1.0);
    let k = design.ncols().min(rows);
    let qr = design.qr();
    let mut qty = y.clone();
    qr.q_tr_mul(&mut qty);
    let qty = qty.rows(0, k).into_owned();
    let r = qr.r();

    let svd = r.svd(true, true);
    let sigma_max = svd.singular_values.max();
    let beta = svd
        .solve(&qty, REL_TOL * sigma_max)
        .map_err(|e| Error::InvalidData(format!("svd solve failed: {e}")))?;

    let intercept = beta[cols];
    Ok(LinearModel {
        coefficients: beta.rows(0, cols).into_owned(),
        intercept,
    })
}

/// `y_hat = x * coefficients + intercept`.
pub fn predict(model: &LinearModel, x: &DMatrix<f64>) -> Result<DVector<f64>> {
    if x.ncols() != model.coefficients.len() {
        return Err(Error::DimensionMismatch {
            context: "predict column count",
            expected: model.coefficients.len(),
            found: x.ncols(),
        });
    }
    Ok(x * &model.coefficients + DVector::from_element(x.nrows(), model.intercept))
}

/// Root mean square error, in the units of `y`.
pub fn rmse(yhat: &DVector<f64>, y: &DVector<f64>) -> Result<f64> {
    if yhat.len() != y.len() {
        return Err(Error::DimensionMismatch {
            context: "rmse vector length",
            expected: y.len(),
            found: yhat.len(),
        });
    }
    if y.is_empty() {
        return Err(Error::EmptyInput("rmse of empty vectors"));
    }
    let sum_sq: f64 = yhat.iter().zip(y.iter()).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok((sum_sq / y.len() as f64).sqrt())
}

/// Pearson correlation coefficient, clamped to [-1, 1].
///
/// Errors with [`Error::ConstantVector`] when either input has zero
/// variance; the caller decides the penalty.
pub fn corrcoef(yhat: &DVector<f64>, y: &DVector<f64>) -> Result<f64> {
    if yhat.len() != y.len() {
        return Err(Error::DimensionMismatch {
            context: "corrcoef vector length",
            expected: y.len(),
            found: yhat.len(),
        });
    }
    if y.len() < 2 {
        return Err(Error::EmptyInput("corrcoef needs at least 2 samples"));
    }
    // structural constancy check; the variance of a constant vector can
    // round away from zero through the mean
    if yhat.iter().all(|v| *v == yhat[0]) || y.iter().all(|v| *v == y[0]) {
        return Err(Error::ConstantVector);
    }
    let n = y.len() as f64;
    let mean_a = yhat.sum() / n;
    let mean_b = y.sum() / n;
    let mut cov = 0.0;
    let mut var_a = 0.0;
    let mut var_b = 0.0;
    for (a, b) in yhat.iter().zip(y.iter()) {
        let da = a - mean_a;
        let db = b - mean_b;
        cov += da * db;
        var_a += da * da;
        var_b += db * db;
    }
    if var_a == 0.0 || var_b == 0.0 {
        return Err(Error::ConstantVector);
    }
    Ok((cov / (var_a * var_b).sqrt()).clamp(-1.0, 1.0))
}

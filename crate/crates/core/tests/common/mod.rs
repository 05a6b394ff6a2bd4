//! Shared test oracles, independent of the library's solver paths.

// index-based Gaussian elimination reads clearer than iterator chains here
#![allow(clippy::needless_range_loop)]

use nalgebra::{DMatrix, DVector};
use num::rational::BigRational;
use num::{One, ToPrimitive, Zero};

/// Exact-rational least squares with an intercept column: forms the normal
/// equations of `[x | 1]` over `BigRational` (f64 inputs convert exactly)
/// and solves them by Gaussian elimination. Valid for full-rank systems.
///
/// Returns (coefficients, intercept).
pub fn rational_least_squares(x: &DMatrix<f64>, y: &DVector<f64>) -> (Vec<f64>, f64) {
    let m = x.nrows();
    let k = x.ncols() + 1;
    let rat = |v: f64| BigRational::from_float(v).expect("finite input");
    let design = |i: usize, j: usize| -> BigRational {
        if j < x.ncols() {
            rat(x[(i, j)])
        } else {
            BigRational::one()
        }
    };

    // augmented system [D^T D | D^T y]
    let mut aug = vec![vec![BigRational::zero(); k + 1]; k];
    for p in 0..k {
        for q in p..k {
            let mut s = BigRational::zero();
            for i in 0..m {
                s += design(i, p) * design(i, q);
            }
            aug[p][q] = s.clone();
            aug[q][p] = s;
        }
        let mut s = BigRational::zero();
        for i in 0..m {
            s += design(i, p) * rat(y[i]);
        }
        aug[p][k] = s;
    }

    // exact Gauss-Jordan; any nonzero pivot works in rational arithmetic
    for col in 0..k {
        let pivot_row = (col..k)
            .find(|&r| !aug[r][col].is_zero())
            .expect("full-rank system");
        aug.swap(col, pivot_row);
        let pivot = aug[col][col].clone();
        for r in 0..k {
            if r != col && !aug[r][col].is_zero() {
                let factor = &aug[r][col] / &pivot;
                for c in col..=k {
                    let delta = &factor * &aug[col][c];
                    aug[r][c] -= delta;
                }
            }
        }
    }

    let solution: Vec<f64> = (0..k)
        .map(|r| (&aug[r][k] / &aug[r][r]).to_f64().expect("representable"))
        .collect();
    (solution[..k - 1].to_vec(), solution[k - 1])
}

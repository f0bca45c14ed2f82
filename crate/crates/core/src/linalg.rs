//! Symmetric eigendecomposition by cyclic Jacobi rotations.

use nalgebra::DMatrix;
use thiserror::Error;

pub const SYMMETRY_TOL: f64 = 1e-9;
const MAX_SWEEPS: usize = 100;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("matrix is {0}x{1}, expected square")]
    NotSquare(usize, usize),
    #[error("matrix is not symmetric (|a[{i}][{j}] - a[{j}][{i}]| = {diff:e})")]
    NotSymmetric { i: usize, j: usize, diff: f64 },
    #[error("Jacobi sweeps did not converge (off-diagonal norm {0:e})")]
    NonConvergence(f64),
}

/// Eigenpairs sorted by descending eigenvalue; `vectors` holds them as
/// orthonormal columns.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricEigen {
    pub values: Vec<f64>,
    pub vectors: DMatrix<f64>,
}

fn off_diagonal_sq(a: &DMatrix<f64>) -> f64 {
    let n = a.nrows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[(i, j)] * a[(i, j)];
            }
        }
    }
    s
}

pub fn check_symmetric(a: &DMatrix<f64>, tol: f64) -> Result<(), LinalgError> {
    if a.nrows() != a.ncols() {
        return Err(LinalgError::NotSquare(a.nrows(), a.ncols()));
    }
    for i in 0..a.nrows() {
        for j in (i + 1)..a.ncols() {
            let diff = (a[(i, j)] - a[(j, i)]).abs();
            if diff > tol || diff.is_nan() {
                return Err(LinalgError::NotSymmetric { i, j, diff });
            }
        }
    }
    Ok(())
}

/// Each eigenvector's largest-magnitude component is made positive.
pub fn eigen_symmetric(a: &DMatrix<f64>) -> Result<SymmetricEigen, LinalgError> {
    check_symmetric(a, SYMMETRY_TOL)?;
    let n = a.nrows();
    // work on the exactly symmetrized matrix
    let mut m = (a + a.transpose()) * 0.5;
    let mut v = DMatrix::<f64>::identity(n, n);
    let scale = m.norm_squared();
    let target = (f64::EPSILON * f64::EPSILON) * scale;

    let mut converged = off_diagonal_sq(&m) <= target;
    let mut sweeps = 0;
    while !converged && sweeps < MAX_SWEEPS {
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (m[(q, q)] - m[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, q)] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = c * mpk - s * mqk;
                    m[(q, k)] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
        sweeps += 1;
        converged = off_diagonal_sq(&m) <= target;
    }
    if !converged {
        let off = off_diagonal_sq(&m).sqrt();
        // rounding can stall just above the target; accept anything tiny
        if off > 1e-12 * scale.sqrt().max(1.0) {
            return Err(LinalgError::NonConvergence(off));
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(j, j)].total_cmp(&m[(i, i)]));
    let values = order.iter().map(|&i| m[(i, i)]).collect();
    let mut vectors = DMatrix::<f64>::zeros(n, n);
    for (col, &src) in order.iter().enumerate() {
        vectors.set_column(col, &v.column(src));
    }
    orient_columns(&mut vectors);
    Ok(SymmetricEigen { values, vectors })
}

/// Flips every column whose largest-magnitude entry is negative; returns
/// the applied signs.
pub fn orient_columns(m: &mut DMatrix<f64>) -> Vec<f64> {
    let mut signs = Vec::with_capacity(m.ncols());
    for j in 0..m.ncols() {
        let mut best = 0.0f64;
        for x in m.column(j).iter() {
            if x.abs() > best.abs() + 1e-12 {
                best = *x;
            }
        }
        let sign = if best < 0.0 { -1.0 } else { 1.0 };
        if sign < 0.0 {
            m.column_mut(j).neg_mut();
        }
        signs.push(sign);
    }
    signs
}

//! Dense linear algebra helpers on top of `ndarray` + `faer`.
//!
//! The matrices here are small (≤ a few hundred rows: transfer matrices up to
//! 4ⁿ with n ≤ 3, and R-matrices |𝔾|·16ⁿ), so plain dense algorithms are
//! fine. Eigen- and singular-value decompositions go through `faer`; LU-based
//! inverses and the matrix exponential are implemented directly.

use faer::Mat;
use ndarray::Array2;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// General (non-symmetric) eigendecomposition of a real matrix: returns the
/// eigenvalues and the matrix of right eigenvectors (column k ↔ value k).
pub fn eig(a: &Array2<f64>) -> Result<(Vec<Complex64>, Array2<Complex64>)> {
    let n = square_dim(a)?;
    let m = Mat::from_fn(n, n, |i, j| a[[i, j]]);
    let e = m
        .eigen()
        .map_err(|e| Error::Numerical(format!("eigendecomposition failed: {e:?}")))?;
    let s = e.S();
    let u = e.U();
    let vals: Vec<Complex64> = (0..n).map(|i| s[i]).collect();
    let vecs = Array2::from_shape_fn((n, n), |(i, j)| u[(i, j)]);
    Ok((vals, vecs))
}

/// Singular values of a real matrix, descending.
pub fn singular_values(a: &Array2<f64>) -> Result<Vec<f64>> {
    let m = Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[[i, j]]);
    let svd = m
        .svd()
        .map_err(|e| Error::Numerical(format!("SVD failed: {e:?}")))?;
    let s = svd.S();
    Ok((0..a.nrows().min(a.ncols())).map(|i| s[i]).collect())
}

/// Singular values of a complex matrix, descending.
pub fn singular_values_c(a: &Array2<Complex64>) -> Result<Vec<f64>> {
    let m = Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[[i, j]]);
    let svd = m
        .svd()
        .map_err(|e| Error::Numerical(format!("SVD failed: {e:?}")))?;
    let s = svd.S();
    Ok((0..a.nrows().min(a.ncols())).map(|i| s[i].re).collect())
}

/// Spectral norm (largest singular value).
pub fn opnorm(a: &Array2<f64>) -> Result<f64> {
    Ok(singular_values(a)?.first().copied().unwrap_or(0.0))
}

/// Nuclear norm (sum of singular values) of a complex matrix.
pub fn nuclear_norm_c(a: &Array2<Complex64>) -> Result<f64> {
    Ok(singular_values_c(a)?.iter().sum())
}

/// Eigenvalues of a Hermitian complex matrix, ascending.
pub fn hermitian_eigenvalues(a: &Array2<Complex64>) -> Result<Vec<f64>> {
    let n = square_dim_c(a)?;
    let m = Mat::from_fn(n, n, |i, j| a[[i, j]]);
    let e = m
        .self_adjoint_eigen(faer::Side::Lower)
        .map_err(|e| Error::Numerical(format!("Hermitian eigendecomposition failed: {e:?}")))?;
    let s = e.S();
    let mut vals: Vec<f64> = (0..n).map(|i| s[i].re).collect();
    vals.sort_by(f64::total_cmp);
    Ok(vals)
}

/// Inverse of a real matrix by partial-pivot LU.
pub fn inv(a: &Array2<f64>) -> Result<Array2<f64>> {
    let n = square_dim(a)?;
    let mut lu = a.clone();
    let mut out = Array2::eye(n);
    for col in 0..n {
        let (piv, maxval) = (col..n)
            .map(|r| (r, lu[[r, col]].abs()))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .expect("nonempty");
        if maxval < 1e-300 {
            return Err(Error::Numerical("singular matrix in inverse".into()));
        }
        if piv != col {
            for j in 0..n {
                lu.swap([piv, j], [col, j]);
                out.swap([piv, j], [col, j]);
            }
        }
        let d = lu[[col, col]];
        for j in 0..n {
            lu[[col, j]] /= d;
            out[[col, j]] /= d;
        }
        for r in 0..n {
            if r != col {
                let f = lu[[r, col]];
                if f != 0.0 {
                    for j in 0..n {
                        lu[[r, j]] -= f * lu[[col, j]];
                        out[[r, j]] -= f * out[[col, j]];
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Inverse of a complex matrix by partial-pivot LU.
pub fn inv_c(a: &Array2<Complex64>) -> Result<Array2<Complex64>> {
    let n = square_dim_c(a)?;
    let mut lu = a.clone();
    let mut out = Array2::from_shape_fn((n, n), |(i, j)| {
        if i == j {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    for col in 0..n {
        let (piv, maxval) = (col..n)
            .map(|r| (r, lu[[r, col]].norm()))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .expect("nonempty");
        if maxval < 1e-300 {
            return Err(Error::Numerical("singular matrix in complex inverse".into()));
        }
        if piv != col {
            for j in 0..n {
                lu.swap([piv, j], [col, j]);
                out.swap([piv, j], [col, j]);
            }
        }
        let d = lu[[col, col]];
        for j in 0..n {
            lu[[col, j]] /= d;
            out[[col, j]] /= d;
        }
        for r in 0..n {
            if r != col {
                let f = lu[[r, col]];
                if f.norm_sqr() != 0.0 {
                    for j in 0..n {
                        let lj = lu[[col, j]];
                        let oj = out[[col, j]];
                        lu[[r, j]] -= f * lj;
                        out[[r, j]] -= f * oj;
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Matrix exponential by scaling-and-squaring with a truncated Taylor series.
pub fn expm(a: &Array2<f64>) -> Result<Array2<f64>> {
    let n = square_dim(a)?;
    // 1-norm based scaling so the Taylor argument has norm ≤ 1/2.
    let norm1 = (0..n)
        .map(|j| (0..n).map(|i| a[[i, j]].abs()).sum::<f64>())
        .fold(0.0f64, f64::max);
    let s = if norm1 > 0.5 {
        (norm1 / 0.5).log2().ceil() as u32
    } else {
        0
    };
    let scaled = a.mapv(|v| v / 2f64.powi(s as i32));
    let mut term = Array2::<f64>::eye(n);
    let mut sum = Array2::<f64>::eye(n);
    for k in 1..=40u32 {
        term = term.dot(&scaled) / k as f64;
        sum += &term;
        let tnorm = term.iter().map(|v| v.abs()).fold(0.0f64, f64::max);
        if tnorm < 1e-18 {
            break;
        }
    }
    let mut out = sum;
    for _ in 0..s {
        out = out.dot(&out);
    }
    Ok(out)
}

/// Kronecker product of two real matrices.
pub fn kron(a: &Array2<f64>, b: &Array2<f64>) -> Array2<f64> {
    let (ar, ac) = a.dim();
    let (br, bc) = b.dim();
    Array2::from_shape_fn((ar * br, ac * bc), |(i, j)| {
        a[[i / br, j / bc]] * b[[i % br, j % bc]]
    })
}

/// Frobenius norm of a real matrix.
pub fn fro_norm(a: &Array2<f64>) -> f64 {
    a.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn square_dim(a: &Array2<f64>) -> Result<usize> {
    if a.nrows() != a.ncols() {
        return Err(Error::dim("matrix must be square"));
    }
    Ok(a.nrows())
}

fn square_dim_c(a: &Array2<Complex64>) -> Result<usize> {
    if a.nrows() != a.ncols() {
        return Err(Error::dim("matrix must be square"));
    }
    Ok(a.nrows())
}

//! Dense symmetric kernels used by the solver and the extraction code.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, SymmetricEigen};

use crate::error::{Error, Result};

/// Symmetric part `(A + Aᵀ) / 2`.
pub fn sym(a: &DMatrix<f64>) -> DMatrix<f64> {
    (a + a.transpose()) * 0.5
}

/// Eigendecomposition of a symmetric matrix with eigenvalues sorted in
/// decreasing order (columns of the returned vectors match).
pub fn eig_sym(a: &DMatrix<f64>) -> Result<(DVector<f64>, DMatrix<f64>)> {
    if !a.iter().all(|v| v.is_finite()) {
        return Err(Error::Solver("eigendecomposition of a non-finite matrix".into()));
    }
    let n = a.nrows();
    let eig = SymmetricEigen::try_new(sym(a), f64::EPSILON, 0)
        .ok_or_else(|| Error::Solver("symmetric eigensolver did not converge".into()))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let values = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let mut vectors = DMatrix::zeros(n, n);
    for (k, &i) in order.iter().enumerate() {
        vectors.set_column(k, &eig.eigenvectors.column(i));
    }
    Ok((values, vectors))
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn min_eigenvalue(a: &DMatrix<f64>) -> f64 {
    if a.nrows() == 0 {
        return 0.0;
    }
    sym(a)
        .symmetric_eigenvalues()
        .iter()
        .fold(f64::INFINITY, |m, &v| m.min(v))
}

/// Cholesky factor of a symmetric positive definite matrix.
pub fn chol(a: &DMatrix<f64>) -> Result<Cholesky<f64, Dyn>> {
    Cholesky::new(a.clone()).ok_or_else(|| Error::Solver("matrix is not positive definite".into()))
}

/// Nearest PSD matrix in Frobenius norm: negative eigenvalues set to zero.
pub fn psd_project(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let (vals, vecs) = eig_sym(a)?;
    let clipped = DMatrix::from_diagonal(&vals.map(|v| v.max(0.0)));
    Ok(sym(&(&vecs * clipped * vecs.transpose())))
}

/// Singular values of a symmetric matrix (absolute eigenvalues), decreasing.
pub fn singular_values_sym(a: &DMatrix<f64>) -> Result<Vec<f64>> {
    let (vals, _) = eig_sym(a)?;
    let mut s: Vec<f64> = vals.iter().map(|v| v.abs()).collect();
    s.sort_by(|a, b| b.total_cmp(a));
    Ok(s)
}

/// Largest `alpha` with `X + alpha * dX` PSD given the Cholesky factor of
/// `X`; `f64::INFINITY` if every step keeps it PSD.
pub fn max_step(x_chol: &Cholesky<f64, Dyn>, dx: &DMatrix<f64>) -> f64 {
    if dx.nrows() == 0 {
        return f64::INFINITY;
    }
    let l = x_chol.l();
    let Some(t) = l.solve_lower_triangular(dx) else {
        return 0.0;
    };
    let Some(t) = l.solve_lower_triangular(&t.transpose()) else {
        return 0.0;
    };
    let lmin = min_eigenvalue(&t);
    if !lmin.is_finite() {
        return 0.0;
    }
    if lmin >= 0.0 {
        f64::INFINITY
    } else {
        -1.0 / lmin
    }
}

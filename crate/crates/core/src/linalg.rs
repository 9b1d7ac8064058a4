//! Dense symmetric linear-algebra kernels shared by the solvers.
//!
//! Everything here works on small real matrices (a handful of antennas), so
//! the routines favour clarity over blocking or in-place tricks.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

pub type Matrix = DMatrix<f64>;

/// Symmetry tolerance applied by [`validate_covariance`] callers throughout the crate.
pub const PSD_TOL: f64 = 1e-9;

/// Returns `(m + m^T) / 2`.
pub fn symmetrize(m: &Matrix) -> Matrix {
    (m + m.transpose()) * 0.5
}

/// `I + H X H^T`.
pub fn gram_plus_identity(h: &Matrix, x: &Matrix) -> Matrix {
    let mut g = h * x * h.transpose();
    for i in 0..g.nrows() {
        g[(i, i)] += 1.0;
    }
    symmetrize(&g)
}

/// Natural log-determinant of a symmetric positive definite matrix.
///
/// Uses a Cholesky factor; falls back to the eigenvalue sum when the
/// factorisation breaks down numerically.
pub fn log_det_spd(m: &Matrix) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    match m.clone().cholesky() {
        Some(chol) => 2.0 * chol.l_dirty().diagonal().iter().map(|d| d.ln()).sum::<f64>(),
        None => log_det_eig(m),
    }
}

/// Natural log-determinant through the symmetric eigenvalues.
pub fn log_det_eig(m: &Matrix) -> f64 {
    SymmetricEigen::new(symmetrize(m))
        .eigenvalues
        .iter()
        .map(|&l| l.max(f64::MIN_POSITIVE).ln())
        .sum()
}

/// Symmetric eigendecomposition with eigenvalues sorted in descending order.
pub fn sym_eigen_sorted(m: &Matrix) -> (DVector<f64>, Matrix) {
    let eig = SymmetricEigen::new(symmetrize(m));
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let mut vectors = Matrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

pub fn min_eigenvalue(m: &Matrix) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    SymmetricEigen::new(symmetrize(m))
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// `V f(D) V^T` for a symmetric input with eigenpairs `(D, V)`.
pub fn spectral_map(m: &Matrix, f: impl Fn(f64) -> f64) -> Matrix {
    let eig = SymmetricEigen::new(symmetrize(m));
    let mapped = eig.eigenvalues.map(f);
    let v = &eig.eigenvectors;
    symmetrize(&(v * Matrix::from_diagonal(&mapped) * v.transpose()))
}

/// Inverse square root of a symmetric positive definite matrix.
pub fn inv_sqrt_spd(m: &Matrix) -> Result<Matrix> {
    let lmin = min_eigenvalue(m);
    if !(lmin > 0.0) {
        return Err(Error::InvalidInput(format!(
            "matrix is not positive definite (smallest eigenvalue {lmin:e})"
        )));
    }
    Ok(spectral_map(m, |l| 1.0 / l.sqrt()))
}

/// True iff `q` is symmetric within `tol` and its smallest eigenvalue is at least `-tol`.
pub fn validate_covariance(q: &Matrix, tol: f64) -> Result<bool> {
    if !q.is_square() {
        return Err(Error::Dimension(format!(
            "covariance must be square, got {}x{}",
            q.nrows(),
            q.ncols()
        )));
    }
    let n = q.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            if (q[(i, j)] - q[(j, i)]).abs() > tol {
                return Ok(false);
            }
        }
    }
    if q.iter().any(|v| !v.is_finite()) {
        return Ok(false);
    }
    Ok(min_eigenvalue(q) >= -tol)
}

/// Nearest PSD matrix in Frobenius norm: symmetrise, clamp negative eigenvalues, reassemble.
pub fn project_psd(q: &Matrix) -> Matrix {
    let mut out = spectral_map(q, |l| l.max(0.0));
    // reassembly round-off can leave eigenvalues at -1e-16 scale
    let lmin = min_eigenvalue(&out);
    if lmin < 0.0 {
        for i in 0..out.nrows() {
            out[(i, i)] -= lmin;
        }
    }
    out
}

pub fn trace(m: &Matrix) -> f64 {
    m.trace()
}

pub fn max_abs(m: &Matrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

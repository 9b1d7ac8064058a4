//! Givens-rotation parameterization of covariance matrices.
//!
//! A covariance is written `Q = V diag(loadings) V^T` with
//! `V = prod_{p<q} G_pq(theta_pq)`, the product taken in lexicographic `(p, q)`
//! order. Any `(angles, loadings >= 0)` is PSD by construction.

use crate::error::{Error, Result};
use crate::linalg::{sym_eigen_sorted, symmetrize, Matrix};

#[derive(Debug, Clone, PartialEq)]
pub struct RotationParam {
    pub angles: Vec<f64>,
    pub loadings: Vec<f64>,
}

impl RotationParam {
    pub fn new(angles: Vec<f64>, loadings: Vec<f64>) -> Result<Self> {
        let nt = loadings.len();
        if angles.len() != angle_count(nt) {
            return Err(Error::Dimension(format!(
                "{} angles given, {} expected for nt = {nt}",
                angles.len(),
                angle_count(nt)
            )));
        }
        if loadings.iter().any(|l| !(*l >= 0.0) || !l.is_finite()) {
            return Err(Error::InvalidInput("loadings must be nonnegative".into()));
        }
        Ok(Self { angles, loadings })
    }

    pub fn nt(&self) -> usize {
        self.loadings.len()
    }

    pub fn total_power(&self) -> f64 {
        self.loadings.iter().sum()
    }
}

pub fn angle_count(nt: usize) -> usize {
    nt * nt.saturating_sub(1) / 2
}

fn apply_givens_right(v: &mut Matrix, p: usize, q: usize, theta: f64) {
    // V <- V * G_pq(theta)
    let (s, c) = theta.sin_cos();
    for r in 0..v.nrows() {
        let a = v[(r, p)];
        let b = v[(r, q)];
        v[(r, p)] = c * a + s * b;
        v[(r, q)] = -s * a + c * b;
    }
}

/// `prod_{p<q} G_pq(theta_pq)` with `G_pq` the identity except for
/// `[[cos, -sin], [sin, cos]]` at rows/columns `p, q`.
pub fn build_rotation(angles: &[f64], nt: usize) -> Result<Matrix> {
    if angles.len() != angle_count(nt) {
        return Err(Error::Dimension(format!(
            "{} angles given, {} expected for nt = {nt}",
            angles.len(),
            angle_count(nt)
        )));
    }
    let mut v = Matrix::identity(nt, nt);
    let mut k = 0;
    for p in 0..nt {
        for q in (p + 1)..nt {
            apply_givens_right(&mut v, p, q, angles[k]);
            k += 1;
        }
    }
    Ok(v)
}

/// `V diag(loadings) V^T`.
pub fn assemble_covariance(rp: &RotationParam) -> Matrix {
    let nt = rp.nt();
    let v = build_rotation(&rp.angles, nt).expect("RotationParam holds a consistent angle count");
    let mut scaled = v.clone();
    for (j, l) in rp.loadings.iter().enumerate() {
        scaled.column_mut(j).scale_mut(*l);
    }
    symmetrize(&(scaled * v.transpose()))
}

/// Angles reproducing a rotation (orthogonal, determinant +1) exactly.
///
/// Peels the leading block `G_12 ... G_1n` off column one, whose entries have
/// the spherical form `(c2 c3..cn, s2 c3..cn, s3 c4..cn, ..., sn)`, then recurses
/// on the trailing `(n-1) x (n-1)` block.
pub fn extract_angles(v: &Matrix) -> Result<Vec<f64>> {
    let n = v.nrows();
    if !v.is_square() {
        return Err(Error::Dimension("rotation must be square".into()));
    }
    let mut w = v.clone();
    let mut out = Vec::with_capacity(angle_count(n));
    for start in 0..n.saturating_sub(1) {
        let m = n - start;
        let col: Vec<f64> = (0..m).map(|i| w[(start + i, start)]).collect();
        // theta for (start, start+k), k = 1..m-1
        let mut thetas = vec![0.0; m - 1];
        let mut head_norm = col[0].hypot(col[1]);
        thetas[0] = col[1].atan2(col[0]);
        for k in 2..m {
            thetas[k - 1] = col[k].atan2(head_norm);
            head_norm = head_norm.hypot(col[k]);
        }
        // undo the block: W <- G_{1m}^T ... G_{12}^T W
        for k in 1..m {
            let (s, c) = thetas[k - 1].sin_cos();
            let (p, q) = (start, start + k);
            for col_idx in 0..n {
                let a = w[(p, col_idx)];
                let b = w[(q, col_idx)];
                w[(p, col_idx)] = c * a + s * b;
                w[(q, col_idx)] = -s * a + c * b;
            }
        }
        out.extend(thetas);
    }
    Ok(out)
}

/// Rotation parameters of a PSD matrix via its eigendecomposition.
pub fn decompose_covariance(q: &Matrix) -> Result<RotationParam> {
    let (values, mut vectors) = sym_eigen_sorted(q);
    let n = vectors.ncols();
    if n > 0 && vectors.determinant() < 0.0 {
        // column signs do not change V D V^T
        vectors.column_mut(n - 1).neg_mut();
    }
    let angles = extract_angles(&vectors)?;
    RotationParam::new(angles, values.iter().map(|l| l.max(0.0)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    fn givens(nt: usize, p: usize, q: usize, t: f64) -> Matrix {
        let mut g = Matrix::identity(nt, nt);
        g[(p, p)] = t.cos();
        g[(p, q)] = -t.sin();
        g[(q, p)] = t.sin();
        g[(q, q)] = t.cos();
        g
    }

    #[test]
    fn zero_angles_give_identity() {
        assert_eq!(build_rotation(&[0.0; 3], 3).unwrap(), Matrix::identity(3, 3));
    }

    #[test]
    fn single_block_quarter_turn() {
        let v = build_rotation(&[FRAC_PI_2], 2).unwrap();
        let expected = Matrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]);
        assert_abs_diff_eq!(v, expected, epsilon = 1e-15);
    }

    #[test]
    fn three_by_three_product_order() {
        let (a, b, c) = (0.3, -1.1, 2.0);
        let v = build_rotation(&[a, b, c], 3).unwrap();
        let direct = givens(3, 0, 1, a) * givens(3, 0, 2, b) * givens(3, 1, 2, c);
        assert_abs_diff_eq!(v, direct, epsilon = 1e-14);
        assert_abs_diff_eq!(v.transpose() * &v, Matrix::identity(3, 3), epsilon = 1e-12);
    }

    #[test]
    fn wrong_angle_count() {
        assert!(build_rotation(&[0.1], 3).is_err());
    }

    #[test]
    fn assemble_examples() {
        let rp = RotationParam::new(vec![0.0], vec![3.0, 1.5]).unwrap();
        assert_abs_diff_eq!(
            assemble_covariance(&rp),
            Matrix::from_row_slice(2, 2, &[3.0, 0.0, 0.0, 1.5]),
            epsilon = 1e-15
        );
        let rp = RotationParam::new(vec![FRAC_PI_4], vec![2.0, 0.0]).unwrap();
        assert_abs_diff_eq!(
            assemble_covariance(&rp),
            Matrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]),
            epsilon = 1e-14
        );
    }

    #[test]
    fn extraction_round_trip() {
        for angles in [vec![0.4, -2.2, 1.3], vec![3.0, 0.1, -0.7], vec![0.0, 0.0, 0.0]] {
            let v = build_rotation(&angles, 3).unwrap();
            let back = build_rotation(&extract_angles(&v).unwrap(), 3).unwrap();
            assert_abs_diff_eq!(back, v, epsilon = 1e-12);
        }
        let angles: Vec<f64> = (0..6).map(|i| 0.37 * i as f64 - 1.0).collect();
        let v = build_rotation(&angles, 4).unwrap();
        let back = build_rotation(&extract_angles(&v).unwrap(), 4).unwrap();
        assert_abs_diff_eq!(back, v, epsilon = 1e-12);
    }

    #[test]
    fn decompose_round_trip() {
        let q = Matrix::from_row_slice(3, 3, &[2.0, 0.3, -0.4, 0.3, 1.0, 0.2, -0.4, 0.2, 0.5]);
        let rp = decompose_covariance(&q).unwrap();
        assert_abs_diff_eq!(assemble_covariance(&rp), q, epsilon = 1e-12);
        assert_abs_diff_eq!(rp.total_power(), q.trace(), epsilon = 1e-12);
    }
}

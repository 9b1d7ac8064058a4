//! Whitening transforms that absorb interference-plus-noise into a modified
//! channel, turning interference-limited subproblems into their standard
//! interference-free forms.
//!
//! For `K = I + H X H^T = E D E^T` the whitened channel is `D^{-1/2} E^T H`,
//! and `|I + K^{-1} H Q H^T| = |I + (D^{-1/2} E^T H) Q (D^{-1/2} E^T H)^T|`
//! for every `Q` by Sylvester's determinant identity.

use crate::linalg::{gram_plus_identity, sym_eigen_sorted, Matrix};
use crate::types::ChannelPair;

/// Eigenvalues of `I + PSD` are analytically at least one.
const UNIT_FLOOR_SLACK: f64 = 1e-14;

/// `D^{-1/2} E^T H` where `I + H X H^T = E D E^T`.
pub fn whiten(h: &Matrix, interference: &Matrix) -> Matrix {
    let k = gram_plus_identity(h, interference);
    let (values, vectors) = sym_eigen_sorted(&k);
    let scale = values.map(|d| {
        let d = if d < 1.0 + UNIT_FLOOR_SLACK { 1.0 } else { d };
        1.0 / d.sqrt()
    });
    Matrix::from_diagonal(&scale) * vectors.transpose() * h
}

/// User 2's channel with user 1's signal folded into the noise.
pub fn whiten_p2p(h2: &Matrix, q1: &Matrix) -> Matrix {
    whiten(h2, q1)
}

/// `(H1w, H2w)` for the user-2 wiretap problem: both receivers see `q1` as noise.
pub fn whiten_wiretap(ch: &ChannelPair, q1: &Matrix) -> (Matrix, Matrix) {
    (whiten(ch.h1(), q1), whiten(ch.h2(), q1))
}

/// `(H1w, H2w)` for the multicast problem: both private signals are noise.
pub fn whiten_multicast(ch: &ChannelPair, q1: &Matrix, q2: &Matrix) -> (Matrix, Matrix) {
    let interference = q1 + q2;
    (whiten(ch.h1(), &interference), whiten(ch.h2(), &interference))
}

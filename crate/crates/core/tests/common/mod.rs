//! Shared helpers for the integration tests: reference channel instances,
//! random draws and rate formulas written directly on determinants.
#![allow(dead_code)]

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use secnoma::types::ChannelPair;

pub type Matrix = DMatrix<f64>;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn pair(h1: &[&[f64]], h2: &[&[f64]]) -> ChannelPair {
    ChannelPair::from_rows(h1, h2).unwrap()
}

/// 2x2 instance used for the three-scenario comparison at power 12.
pub fn square_pair() -> ChannelPair {
    pair(&[&[0.3, 2.5], &[2.2, 1.8]], &[&[1.3, 1.2], &[1.5, 3.9]])
}

/// 2x2 Gaussian draw used for the region and TDMA comparison at power 10.
pub fn gaussian_square_pair() -> ChannelPair {
    pair(&[&[0.3861, 0.6355], &[0.9995, 0.6259]], &[&[0.4977, 0.9658], &[0.9245, 0.6116]])
}

/// Three transmit antennas, receivers with 2 and 1 antennas; powers 2, 4, 10.
pub fn three_tx_pair() -> ChannelPair {
    pair(
        &[&[0.1560, -0.6372, -0.4055], &[-1.1450, -0.1417, 0.0708]],
        &[&[-1.5032, 0.5503, -0.0334]],
    )
}

/// Three transmit antennas, two antennas per receiver; power 10.
pub fn equal_rx_pair() -> ChannelPair {
    pair(
        &[&[-1.3784, 0.2593, -0.2040], &[-1.0689, -2.4811, -1.2978]],
        &[&[-0.3403, 0.1358, -1.9706], &[-2.2982, -1.8135, 0.2904]],
    )
}

/// Single-antenna receivers `[1 0.4]` and `[0.4 1]`; power 10.
pub fn scalar_pair() -> ChannelPair {
    pair(&[&[1.0, 0.4]], &[&[0.4, 1.0]])
}

pub fn gaussian(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

pub fn random_pair(nt: usize, n1: usize, n2: usize, rng: &mut ChaCha8Rng) -> ChannelPair {
    ChannelPair::new(gaussian(n1, nt, rng), gaussian(n2, nt, rng)).unwrap()
}

/// PSD matrix with trace exactly `t`: Wishart, rank one or rotated diagonal.
pub fn random_psd(n: usize, t: f64, rng: &mut ChaCha8Rng) -> Matrix {
    let m = match rng.random_range(0..4) {
        0 => {
            let v = gaussian(n, 1, rng);
            &v * v.transpose()
        }
        1 => {
            let u = gaussian(n, n, rng).qr().q();
            let d = Matrix::from_diagonal(&nalgebra::DVector::from_fn(n, |_, _| rng.random::<f64>()));
            &u * d * u.transpose()
        }
        _ => {
            let g = gaussian(n, n, rng);
            &g * g.transpose()
        }
    };
    let tr = m.trace();
    if tr <= 0.0 {
        return Matrix::zeros(n, n);
    }
    m * (t / tr)
}

/// Random symmetric direction with unit Frobenius norm.
pub fn random_symmetric(n: usize, rng: &mut ChaCha8Rng) -> Matrix {
    let g = gaussian(n, n, rng);
    let s = &g + g.transpose();
    let norm = s.norm();
    s / norm
}

/// `log2 det(I + H Q H^T) / 2` through an LU determinant.
pub fn half_ld(h: &Matrix, q: &Matrix) -> f64 {
    let m = Matrix::identity(h.nrows(), h.nrows()) + h * q * h.transpose();
    0.5 * m.determinant().log2()
}

/// Rate of `signal` at a receiver that treats `interference` as noise.
pub fn interfered(h: &Matrix, interference: &Matrix, signal: &Matrix) -> f64 {
    half_ld(h, &(interference + signal)) - half_ld(h, interference)
}

pub fn max_abs_diff(a: &Matrix, b: &Matrix) -> f64 {
    (a - b).amax()
}

/// `[r0, r1, r2]` written out per scenario; order `12` unless `swap`.
pub fn reference_rates(
    ch: &ChannelPair,
    kind: secnoma::types::ScenarioKind,
    q0: &Matrix,
    q1: &Matrix,
    q2: &Matrix,
    swap: bool,
) -> [f64; 3] {
    let (h1, h2) = (ch.h1(), ch.h2());
    let others = q1 + q2;
    let r0 = interfered(h1, &others, q0).min(interfered(h2, &others, q0));
    let (ha, hb, qa, qb) = if swap { (h2, h1, q2, q1) } else { (h1, h2, q1, q2) };
    let (conf_a, conf_b) = if swap {
        (kind.user2_confidential(), kind.user1_confidential())
    } else {
        (kind.user1_confidential(), kind.user2_confidential())
    };
    let zero = Matrix::zeros(qa.nrows(), qa.ncols());
    let mut ra = interfered(ha, &zero, qa);
    if conf_a {
        ra -= interfered(hb, &zero, qa);
    }
    let mut rb = interfered(hb, qa, qb);
    if conf_b {
        rb -= interfered(ha, qa, qb);
    }
    if swap {
        [r0, rb, ra]
    } else {
        [r0, ra, rb]
    }
}

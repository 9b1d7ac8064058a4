//! Capacity-achieving covariance of the point-to-point MIMO link.
//!
//! With `H = U diag(tau) V^T`, the optimal input is `V diag((mu - 1/tau^2)^+) V^T`
//! where the water level `mu` exhausts the power budget.

use std::f64::consts::LN_2;

use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// Singular values below this fraction of the largest one are treated as zero.
pub const RANK_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct WaterfillSolution {
    pub covariance: Matrix,
    /// Rate in bits per channel use.
    pub rate: f64,
    pub water_level: f64,
    /// Set when the channel has no usable mode (all-zero matrix).
    pub degenerate: bool,
}

/// Exact water level for the noise floors `1/tau_i^2`.
///
/// Active-set descent over the sorted floors: start with every mode active
/// and drop the highest floor while the level would not clear it.
pub fn water_level(floors: &[f64], p: f64) -> Result<f64> {
    if floors.is_empty() {
        return Err(Error::InvalidInput("water level needs at least one mode".into()));
    }
    if !(p >= 0.0) || !p.is_finite() {
        return Err(Error::InvalidInput(format!("invalid power {p}")));
    }
    if floors.iter().any(|g| !(g.is_finite() && *g > 0.0)) {
        return Err(Error::InvalidInput("noise floors must be positive and finite".into()));
    }
    let mut sorted = floors.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut active = sorted.len();
    let mut sum: f64 = sorted.iter().sum();
    loop {
        let mu = (p + sum) / active as f64;
        if active == 1 || mu > sorted[active - 1] {
            return Ok(mu);
        }
        active -= 1;
        sum -= sorted[active];
    }
}

/// Water-filling over the right singular vectors of `h` with total power `p`.
pub fn waterfill(h: &Matrix, p: f64) -> Result<WaterfillSolution> {
    if !(p >= 0.0) || !p.is_finite() {
        return Err(Error::InvalidInput(format!("invalid power {p}")));
    }
    let nt = h.ncols();
    let zero = |degenerate, water_level| WaterfillSolution {
        covariance: Matrix::zeros(nt, nt),
        rate: 0.0,
        water_level,
        degenerate,
    };
    if h.nrows() == 0 || h.iter().all(|v| *v == 0.0) {
        return Ok(zero(true, 0.0));
    }

    let svd = h.clone().svd(false, true);
    let v_t = svd
        .v_t
        .ok_or_else(|| Error::Internal("SVD did not return right singular vectors".into()))?;
    let tau_max = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let modes: Vec<(f64, usize)> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, &t)| t > RANK_TOL * tau_max)
        .map(|(i, &t)| (t, i))
        .collect();
    let floors: Vec<f64> = modes.iter().map(|(t, _)| 1.0 / (t * t)).collect();
    let mu = water_level(&floors, p)?;
    if p == 0.0 {
        return Ok(zero(false, mu));
    }

    let mut covariance = Matrix::zeros(nt, nt);
    let mut rate = 0.0;
    for ((tau, row), floor) in modes.iter().zip(&floors) {
        let load = (mu - floor).max(0.0);
        if load == 0.0 {
            continue;
        }
        let v = v_t.row(*row).transpose();
        covariance += &v * v.transpose() * load;
        rate += 0.5 * (tau * tau * load).ln_1p() / LN_2;
    }
    Ok(WaterfillSolution {
        covariance: crate::linalg::symmetrize(&covariance),
        rate,
        water_level: mu,
        degenerate: false,
    })
}

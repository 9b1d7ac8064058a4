//! Secrecy-rate maximization for the MIMO wiretap channel.

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::rates::half_log2_det;
use crate::search::{argmax, rotation_search, scale_to_budget, Layout, SolverOptions};
use crate::waterfill::waterfill;

#[derive(Debug, Clone)]
pub struct WiretapSolution {
    pub covariance: Matrix,
    pub rate: f64,
    /// False when some start hit the iteration cap.
    pub converged: bool,
}

/// `1/2 log2 |I + Hm Q Hm^T| - 1/2 log2 |I + He Q He^T|`, unclamped.
pub fn secrecy_rate(hm: &Matrix, he: &Matrix, q: &Matrix) -> Result<f64> {
    if hm.ncols() != he.ncols() || !q.is_square() || q.nrows() != hm.ncols() {
        return Err(Error::Dimension(format!(
            "legitimate channel has {} columns, eavesdropper {}, covariance is {}x{}",
            hm.ncols(),
            he.ncols(),
            q.nrows(),
            q.ncols()
        )));
    }
    Ok(half_log2_det(hm, q) - half_log2_det(he, q))
}

/// Maximizes the secrecy rate over `tr(Q) <= p`. A nonpositive optimum is
/// reported as the zero covariance with rate 0.
pub fn solve_wiretap(hm: &Matrix, he: &Matrix, p: f64, opts: &SolverOptions) -> Result<WiretapSolution> {
    if !(p >= 0.0) || !p.is_finite() {
        return Err(Error::InvalidInput(format!("invalid power {p}")));
    }
    let nt = hm.ncols();
    let zero = Matrix::zeros(nt, nt);
    secrecy_rate(hm, he, &zero)?;
    if p == 0.0 {
        return Ok(WiretapSolution { covariance: zero, rate: 0.0, converged: true });
    }

    let objective = |q: &Matrix| half_log2_det(hm, q) - half_log2_det(he, q);
    let warm = waterfill(hm, p)?.covariance;
    let layout = Layout { nt, budget: p, slack: true };
    let found = rotation_search(layout, &objective, std::slice::from_ref(&warm), opts);

    let mut candidates = vec![found.covariance.clone()];
    candidates.extend(scale_to_budget(&found.covariance, p));
    candidates.push(warm);
    candidates.push(zero.clone());
    let values: Vec<f64> = candidates.iter().map(objective).collect();
    let best = argmax(&values);
    if values[best] <= 0.0 {
        return Ok(WiretapSolution { covariance: zero, rate: 0.0, converged: found.converged });
    }
    Ok(WiretapSolution {
        covariance: candidates.swap_remove(best),
        rate: values[best],
        converged: found.converged,
    })
}

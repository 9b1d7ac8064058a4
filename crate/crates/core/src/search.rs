//! Multi-start quasi-Newton search over covariances in rotation form.
//!
//! The search vector is `[angles, logits, slack?]`. Loadings are
//! `budget * sigmoid(slack) * softmax(logits)`, or `budget * softmax(logits)`
//! when the budget must be used in full, so every point is feasible.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;

use crate::bfgs::{minimize, BfgsOptions};
use crate::linalg::Matrix;
use crate::rotation::{angle_count, assemble_covariance, decompose_covariance, RotationParam};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub max_iters: usize,
    pub n_starts: usize,
    pub seed: u64,
    pub f_tol: f64,
    pub grad_tol: f64,
    pub fd_step: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            max_iters: 500,
            n_starts: 8,
            seed: 0,
            f_tol: 1e-9,
            grad_tol: 1e-7,
            fd_step: 1e-6,
        }
    }
}

impl SolverOptions {
    pub fn with_seed(seed: u64) -> Self {
        Self { seed, ..Self::default() }
    }

    pub(crate) fn bfgs(&self) -> BfgsOptions {
        BfgsOptions {
            max_iters: self.max_iters,
            f_tol: self.f_tol,
            grad_tol: self.grad_tol,
            fd_step: self.fd_step,
        }
    }
}

const LOGIT_FLOOR: f64 = 1e-8;
const SLACK_CAP: f64 = 1.0 - 1e-9;

#[derive(Debug, Clone, Copy)]
pub(crate) struct Layout {
    pub nt: usize,
    pub budget: f64,
    pub slack: bool,
}

impl Layout {
    #[cfg(test)]
    pub fn len(&self) -> usize {
        angle_count(self.nt) + self.nt + usize::from(self.slack)
    }

    pub fn decode(&self, x: &[f64]) -> Matrix {
        let na = angle_count(self.nt);
        let logits = &x[na..na + self.nt];
        let top = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let weights: Vec<f64> = logits.iter().map(|l| (l - top).exp()).collect();
        let total: f64 = weights.iter().sum();
        let fill = if self.slack {
            1.0 / (1.0 + (-x[na + self.nt]).exp())
        } else {
            1.0
        };
        let loadings = weights.iter().map(|w| self.budget * fill * w / total).collect();
        assemble_covariance(&RotationParam { angles: x[..na].to_vec(), loadings })
    }

    pub fn encode(&self, q: &Matrix) -> Option<Vec<f64>> {
        let rp = decompose_covariance(q).ok()?;
        let used = rp.total_power();
        let mut x = rp.angles;
        x.extend(rp.loadings.iter().map(|l| (l / self.budget.max(f64::MIN_POSITIVE) + LOGIT_FLOOR).ln()));
        if self.slack {
            let fill = (used / self.budget).clamp(1e-6, SLACK_CAP);
            x.push((fill / (1.0 - fill)).ln());
        }
        Some(x)
    }

    fn random_start(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let mut x: Vec<f64> = (0..angle_count(self.nt))
            .map(|_| rng.random_range(0.0..std::f64::consts::PI))
            .collect();
        // flat simplex: normalized exponentials, logits are their logs
        x.extend((0..self.nt).map(|_| {
            let e: f64 = Exp1.sample(rng);
            e.max(1e-300).ln()
        }));
        if self.slack {
            let fill: f64 = rng.random_range(0.05..0.95);
            x.push((fill / (1.0 - fill)).ln());
        }
        x
    }
}

#[derive(Debug, Clone)]
pub(crate) struct SearchOutcome {
    pub covariance: Matrix,
    pub converged: bool,
}

/// Maximizes `objective` over covariances with trace at most (or exactly,
/// without slack) `layout.budget`. Starts: each warm covariance, then
/// `opts.n_starts` random points on seed `opts.seed`, stream = start index.
pub(crate) fn rotation_search<F>(layout: Layout, objective: &F, warm: &[Matrix], opts: &SolverOptions) -> SearchOutcome
where
    F: Fn(&Matrix) -> f64 + Sync,
{
    let mut starts: Vec<Vec<f64>> = warm.iter().filter_map(|q| layout.encode(q)).collect();
    for k in 0..opts.n_starts {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        rng.set_stream(k as u64);
        starts.push(layout.random_start(&mut rng));
    }
    let bfgs = opts.bfgs();
    let runs: Vec<(Vec<f64>, f64, bool)> = starts
        .par_iter()
        .map(|x0| {
            let r = minimize(|x| -objective(&layout.decode(x)), x0, &bfgs);
            (r.x, -r.value, r.converged)
        })
        .collect();
    let mut best = 0;
    for (i, run) in runs.iter().enumerate() {
        if run.1 > runs[best].1 {
            best = i;
        }
    }
    SearchOutcome {
        covariance: layout.decode(&runs[best].0),
        converged: runs.iter().all(|r| r.2),
    }
}

/// Index of the largest value, first one on ties.
pub(crate) fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

pub(crate) fn scale_to_budget(q: &Matrix, budget: f64) -> Option<Matrix> {
    let t = q.trace();
    (t > 0.0).then(|| q * (budget / t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn decoded_points_are_feasible() {
        let layout = Layout { nt: 3, budget: 4.0, slack: true };
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let x: Vec<f64> = (0..layout.len()).map(|_| rng.random_range(-5.0..5.0)).collect();
            let q = layout.decode(&x);
            assert!(q.trace() <= 4.0 + 1e-12);
            assert!(crate::linalg::min_eigenvalue(&q) >= -1e-12);
        }
        let full = Layout { slack: false, ..layout };
        let q = full.decode(&[0.3, 0.2, 0.1, 1.0, -2.0, 0.5]);
        assert_abs_diff_eq!(q.trace(), 4.0, epsilon = 1e-12);
    }

    #[test]
    fn encode_then_decode() {
        let layout = Layout { nt: 2, budget: 3.0, slack: true };
        let q = Matrix::from_row_slice(2, 2, &[1.0, 0.4, 0.4, 1.5]);
        let back = layout.decode(&layout.encode(&q).unwrap());
        assert_abs_diff_eq!(back, q, epsilon = 1e-6);
    }
}

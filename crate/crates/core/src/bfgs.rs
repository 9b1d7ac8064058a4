//! Small dense BFGS minimizer with finite-difference gradients.

use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BfgsOptions {
    pub max_iters: usize,
    /// Stop when one step improves the objective by less than this.
    pub f_tol: f64,
    pub grad_tol: f64,
    /// Relative central-difference step.
    pub fd_step: f64,
}

impl Default for BfgsOptions {
    fn default() -> Self {
        Self {
            max_iters: 500,
            f_tol: 1e-9,
            grad_tol: 1e-7,
            fd_step: 1e-6,
        }
    }
}

#[derive(Debug, Clone)]
pub struct BfgsResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

pub fn fd_gradient<F: Fn(&[f64]) -> f64>(f: &F, x: &[f64], rel_step: f64) -> DVector<f64> {
    let mut probe = x.to_vec();
    DVector::from_iterator(
        x.len(),
        (0..x.len()).map(|i| {
            let h = rel_step * x[i].abs().max(1.0);
            probe[i] = x[i] + h;
            let up = f(&probe);
            probe[i] = x[i] - h;
            let down = f(&probe);
            probe[i] = x[i];
            (up - down) / (2.0 * h)
        }),
    )
}

/// Minimizes `f` from `x0`. Non-finite objective values count as `+inf`.
pub fn minimize<F: Fn(&[f64]) -> f64>(f: F, x0: &[f64], opts: &BfgsOptions) -> BfgsResult {
    let n = x0.len();
    let eval = |x: &[f64]| {
        let v = f(x);
        if v.is_finite() {
            v
        } else {
            f64::INFINITY
        }
    };
    let mut x = DVector::from_column_slice(x0);
    let mut fx = eval(x.as_slice());
    if n == 0 {
        return BfgsResult { x: vec![], value: fx, iterations: 0, converged: true };
    }
    let mut g = fd_gradient(&eval, x.as_slice(), opts.fd_step);
    let mut hinv = DMatrix::<f64>::identity(n, n);

    for it in 0..opts.max_iters {
        if !g.iter().all(|v| v.is_finite()) {
            return BfgsResult { x: x.as_slice().to_vec(), value: fx, iterations: it, converged: false };
        }
        if g.norm() < opts.grad_tol {
            return BfgsResult { x: x.as_slice().to_vec(), value: fx, iterations: it, converged: true };
        }
        let mut dir = -(&hinv * &g);
        let mut slope = g.dot(&dir);
        if slope >= 0.0 {
            hinv = DMatrix::identity(n, n);
            dir = -g.clone();
            slope = -g.norm_squared();
        }

        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let trial = &x + &dir * step;
            let ft = eval(trial.as_slice());
            if ft <= fx + 1e-4 * step * slope {
                accepted = Some((trial, ft));
                break;
            }
            step *= 0.5;
        }
        let Some((x_new, f_new)) = accepted else {
            return BfgsResult { x: x.as_slice().to_vec(), value: fx, iterations: it, converged: true };
        };

        let g_new = fd_gradient(&eval, x_new.as_slice(), opts.fd_step);
        let s = &x_new - &x;
        let y = &g_new - &g;
        let sy = s.dot(&y);
        if sy > 1e-12 * s.norm() * y.norm() {
            let rho = 1.0 / sy;
            let hy = &hinv * &y;
            let yhy = y.dot(&hy);
            hinv += (&s * s.transpose()) * (rho * (1.0 + rho * yhy))
                - (&hy * s.transpose() + &s * hy.transpose()) * rho;
        }
        let improvement = fx - f_new;
        x = x_new;
        fx = f_new;
        g = g_new;
        if improvement < opts.f_tol {
            return BfgsResult { x: x.as_slice().to_vec(), value: fx, iterations: it + 1, converged: true };
        }
    }
    BfgsResult { x: x.as_slice().to_vec(), value: fx, iterations: opts.max_iters, converged: false }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn quadratic_bowl() {
        let r = minimize(
            |x| (x[0] - 1.0).powi(2) + 10.0 * (x[1] + 2.0).powi(2),
            &[5.0, 5.0],
            &BfgsOptions::default(),
        );
        assert!(r.converged);
        assert_abs_diff_eq!(r.x[0], 1.0, epsilon = 1e-4);
        assert_abs_diff_eq!(r.x[1], -2.0, epsilon = 1e-4);
    }

    #[test]
    fn rosenbrock() {
        let opts = BfgsOptions { f_tol: 1e-14, ..Default::default() };
        let r = minimize(
            |x| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2),
            &[-1.2, 1.0],
            &opts,
        );
        assert_abs_diff_eq!(r.x[0], 1.0, epsilon = 1e-3);
        assert_abs_diff_eq!(r.x[1], 1.0, epsilon = 2e-3);
    }

    #[test]
    fn gradient_of_cubic() {
        let g = fd_gradient(&|x: &[f64]| x[0].powi(3) + 2.0 * x[1], &[2.0, 0.0], 1e-6);
        assert_abs_diff_eq!(g[0], 12.0, epsilon = 1e-6);
        assert_abs_diff_eq!(g[1], 2.0, epsilon = 1e-8);
    }
}

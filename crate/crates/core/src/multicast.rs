//! Max-min multicast covariance design for two receivers.

use crate::bfgs::minimize;
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::rates::half_log2_det;
use crate::search::{argmax, rotation_search, Layout, SolverOptions};
use crate::waterfill::waterfill;

/// Slack on the two cross-evaluation tests; exact ties pick the cheaper case.
pub const CASE_SLACK: f64 = 1e-10;

const SMOOTHING: [f64; 3] = [1e3, 1e4, 1e5];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MulticastCase {
    /// User 1's water-filling optimum already serves user 2.
    Case1,
    /// User 2's water-filling optimum already serves user 1.
    Case2,
    /// Neither single-user optimum works; the two rates must be balanced.
    Case3,
}

#[derive(Debug, Clone)]
pub struct MulticastSolution {
    pub covariance: Matrix,
    pub rate: f64,
    pub case: MulticastCase,
    pub converged: bool,
}

fn check(h1w: &Matrix, h2w: &Matrix, p0: f64) -> Result<()> {
    if h1w.ncols() != h2w.ncols() {
        return Err(Error::Dimension(format!(
            "channels have {} and {} columns",
            h1w.ncols(),
            h2w.ncols()
        )));
    }
    if !(p0 >= 0.0) || !p0.is_finite() {
        return Err(Error::InvalidInput(format!("invalid power {p0}")));
    }
    Ok(())
}

fn classify_with(h1w: &Matrix, h2w: &Matrix, q01: &Matrix, q02: &Matrix) -> MulticastCase {
    if half_log2_det(h1w, q01) <= half_log2_det(h2w, q01) + CASE_SLACK {
        MulticastCase::Case1
    } else if half_log2_det(h1w, q02) >= half_log2_det(h2w, q02) - CASE_SLACK {
        MulticastCase::Case2
    } else {
        MulticastCase::Case3
    }
}

pub fn case_classify(h1w: &Matrix, h2w: &Matrix, p0: f64) -> Result<MulticastCase> {
    check(h1w, h2w, p0)?;
    let q01 = waterfill(h1w, p0)?.covariance;
    let q02 = waterfill(h2w, p0)?.covariance;
    Ok(classify_with(h1w, h2w, &q01, &q02))
}

/// Smooth lower bound of `min(a, b)` that is within `ln 2 / beta` of it.
fn softmin(a: f64, b: f64, beta: f64) -> f64 {
    a.min(b) - (-beta * (a - b).abs()).exp().ln_1p() / beta
}

/// Maximizer of a concave function on `[0, 1]`.
fn golden_max<F: Fn(f64) -> f64>(f: F) -> (f64, f64) {
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (0.0, 1.0);
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > 1e-12 {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = f(d);
        }
    }
    let mut best = (0.5 * (a + b), f(0.5 * (a + b)));
    for t in [0.0, 1.0] {
        let v = f(t);
        if v > best.1 {
            best = (t, v);
        }
    }
    best
}

/// Maximizes `min_j 1/2 log2 |I + Hjw Q Hjw^T|` over `tr(Q) <= p0`.
pub fn solve_multicast(h1w: &Matrix, h2w: &Matrix, p0: f64, opts: &SolverOptions) -> Result<MulticastSolution> {
    check(h1w, h2w, p0)?;
    let nt = h1w.ncols();
    if p0 == 0.0 {
        return Ok(MulticastSolution {
            covariance: Matrix::zeros(nt, nt),
            rate: 0.0,
            case: MulticastCase::Case1,
            converged: true,
        });
    }
    let q01 = waterfill(h1w, p0)?.covariance;
    let q02 = waterfill(h2w, p0)?.covariance;
    let true_min = |q: &Matrix| half_log2_det(h1w, q).min(half_log2_det(h2w, q));
    let case = classify_with(h1w, h2w, &q01, &q02);
    let pick = match case {
        MulticastCase::Case1 => Some(q01.clone()),
        MulticastCase::Case2 => Some(q02.clone()),
        MulticastCase::Case3 => None,
    };
    if let Some(q) = pick {
        return Ok(MulticastSolution { rate: true_min(&q), covariance: q, case, converged: true });
    }

    let layout = Layout { nt, budget: p0, slack: false };
    let smoothed = |beta: f64| move |q: &Matrix| softmin(half_log2_det(h1w, q), half_log2_det(h2w, q), beta);
    let blend = (&q01 + &q02) * 0.5;
    let found = rotation_search(layout, &smoothed(SMOOTHING[0]), &[q01.clone(), q02.clone(), blend], opts);
    let mut converged = found.converged;
    let mut q = found.covariance;
    for beta in &SMOOTHING[1..] {
        let f = smoothed(*beta);
        if let Some(x0) = layout.encode(&q) {
            let r = minimize(|x| -f(&layout.decode(x)), &x0, &opts.bfgs());
            converged &= r.converged;
            let next = layout.decode(&r.x);
            if true_min(&next) >= true_min(&q) {
                q = next;
            }
        }
    }

    // the objective is concave in Q, so it is unimodal along any segment
    let mut value = true_min(&q);
    for _ in 0..50 {
        let before = value;
        for target in [&q01, &q02] {
            let (t, v) = golden_max(|t| true_min(&(&q * (1.0 - t) + target * t)));
            if v > value {
                q = &q * (1.0 - t) + target * t;
                value = v;
            }
        }
        if value - before < 1e-13 {
            break;
        }
    }

    let candidates = [q, q01, q02];
    let values: Vec<f64> = candidates.iter().map(true_min).collect();
    let best = argmax(&values);
    Ok(MulticastSolution {
        covariance: candidates[best].clone(),
        rate: values[best],
        case,
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use nalgebra::DVector;

    fn diag(v: &[f64]) -> Matrix {
        Matrix::from_diagonal(&DVector::from_row_slice(v))
    }

    #[test]
    fn identical_users_take_case_one() {
        let h = Matrix::from_row_slice(2, 2, &[0.3, 2.5, 2.2, 1.8]);
        assert_eq!(case_classify(&h, &h, 3.0).unwrap(), MulticastCase::Case1);
        let sol = solve_multicast(&h, &h, 3.0, &SolverOptions::default()).unwrap();
        assert_abs_diff_eq!(sol.covariance, waterfill(&h, 3.0).unwrap().covariance, epsilon = 1e-14);
    }

    #[test]
    fn weaker_user_decides() {
        let sol = solve_multicast(&diag(&[1.0]), &diag(&[10.0]), 1.0, &SolverOptions::default()).unwrap();
        assert_eq!(sol.case, MulticastCase::Case1);
        assert_abs_diff_eq!(sol.covariance[(0, 0)], 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(sol.rate, 0.5, epsilon = 1e-14);
        let sol = solve_multicast(&diag(&[10.0]), &diag(&[1.0]), 1.0, &SolverOptions::default()).unwrap();
        assert_eq!(sol.case, MulticastCase::Case2);
    }

    #[test]
    fn crossing_channels_balance_the_two_rates() {
        let (a, b) = (diag(&[2.0, 0.5]), diag(&[0.5, 2.0]));
        assert_eq!(case_classify(&a, &b, 4.0).unwrap(), MulticastCase::Case3);
        let sol = solve_multicast(&a, &b, 4.0, &SolverOptions::default()).unwrap();
        let (r1, r2) = (half_log2_det(&a, &sol.covariance), half_log2_det(&b, &sol.covariance));
        assert!((r1 - r2).abs() < 1e-4, "{r1} vs {r2}");
        // by symmetry the optimum is the equal split 2 I
        let even = 0.5 * (9.0f64 * 1.5).log2();
        assert_abs_diff_eq!(sol.rate, even, epsilon = 1e-6);
        assert!(sol.covariance.trace() <= 4.0 + 1e-9);
    }

    #[test]
    fn softmin_bounds() {
        assert!(softmin(1.0, 2.0, 1e3) <= 1.0);
        assert_abs_diff_eq!(softmin(1.0, 1.0, 1e3), 1.0 - 2f64.ln() / 1e3, epsilon = 1e-15);
    }

    #[test]
    fn golden_section_on_parabola() {
        let (t, v) = golden_max(|t| -(t - 0.3) * (t - 0.3));
        assert_abs_diff_eq!(t, 0.3, epsilon = 1e-6);
        assert_abs_diff_eq!(v, 0.0, epsilon = 1e-12);
    }
}

//! Weighted-sum-rate maximization without a common message.
//!
//! Outer bisection on the power multiplier `lambda`; inner block successive
//! maximization where each block maximizes a concave minorizer in closed form.
//! For every scenario the user-1 objective splits into a concave log-det term
//! plus a convex remainder; the remainder is replaced by its tangent, whose
//! negative gradient is the price matrix `A`. The block penalty is then
//! `lambda I + A` in all three scenarios.

use std::f64::consts::LN_2;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{gram_plus_identity, inv_sqrt_spd, min_eigenvalue, project_psd, symmetrize, Matrix};
use crate::rates::user_rates;
use crate::region::RateRegion;
use crate::split::grid;
use crate::types::{ChannelPair, EncodingOrder, RateTriple, RegionPoint, Scenario, ScenarioKind};

const S_REGULARIZATION: f64 = 1e-12;
const ASCENT_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WsrConfig {
    pub w1: f64,
    pub w2: f64,
    pub lambda_min: f64,
    pub lambda_max: f64,
    /// Bisection stops when the multiplier bracket is narrower than this.
    pub eps2: f64,
    /// Inner iterations stop when the weighted sum rate moves less than this.
    pub eps3: f64,
    pub max_inner: usize,
}

impl WsrConfig {
    pub fn new(w1: f64, w2: f64) -> Result<Self> {
        let cfg = Self {
            w1,
            w2,
            lambda_min: 1e-6,
            lambda_max: 10.0 * w1.max(w2),
            eps2: 1e-3,
            eps3: 1e-6,
            max_inner: 1000,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.w1 >= 0.0 && self.w2 >= 0.0) || self.w1 + self.w2 == 0.0 {
            return Err(Error::InvalidInput("weights must be nonnegative and not both zero".into()));
        }
        if !(self.lambda_min > 0.0 && self.lambda_min < self.lambda_max) {
            return Err(Error::InvalidInput(format!(
                "invalid multiplier bracket [{}, {}]",
                self.lambda_min, self.lambda_max
            )));
        }
        if !(self.eps2 > 0.0 && self.eps3 > 0.0) || self.max_inner == 0 {
            return Err(Error::InvalidInput("tolerances and iteration cap must be positive".into()));
        }
        Ok(())
    }

    fn swapped(&self) -> Self {
        Self { w1: self.w2, w2: self.w1, ..*self }
    }
}

/// Gradient of `1/2 log2 |I + H X H^T|` with respect to `X`.
fn resolvent(h: &Matrix, x: &Matrix) -> Matrix {
    let inv = gram_plus_identity(h, x)
        .cholesky()
        .expect("I + H X H^T is positive definite for PSD X")
        .inverse();
    symmetrize(&(h.transpose() * inv * h)) / (2.0 * LN_2)
}

/// Price for user 1 in scenario A: negative gradient of `w2 R2` in `Q1`.
pub fn price_matrix_a(ch: &ChannelPair, q1: &Matrix, q2: &Matrix, w2: f64) -> Matrix {
    (resolvent(ch.h2(), q1) - resolvent(ch.h2(), &(q1 + q2))) * w2
}

/// Price for user 1 in scenario B: negative gradient of the convex part
/// `-(w1 + w2)/2 log2|I + H2 Q1 H2^T| + w2/2 log2|I + H2 (Q1 + Q2) H2^T|`.
pub fn price_matrix_b(ch: &ChannelPair, q1: &Matrix, q2: &Matrix, w1: f64, w2: f64) -> Matrix {
    resolvent(ch.h2(), q1) * (w1 + w2) - resolvent(ch.h2(), &(q1 + q2)) * w2
}

/// Price for user 1 in scenario C. The concave part is `(w1 + w2)/2 log2|I + H1 Q1 H1^T|`.
pub fn price_matrix_c1(ch: &ChannelPair, q1: &Matrix, q2: &Matrix, w1: f64, w2: f64) -> Matrix {
    let total = q1 + q2;
    resolvent(ch.h2(), q1) * (w1 + w2) - resolvent(ch.h2(), &total) * w2 + resolvent(ch.h1(), &total) * w2
}

/// Price for user 2 in scenario C: negative gradient of `-w2/2 log2|I + H1 (Q1 + Q2) H1^T|` in `Q2`.
pub fn price_matrix_c2(ch: &ChannelPair, q1: &Matrix, q2: &Matrix, w2: f64) -> Matrix {
    resolvent(ch.h1(), &(q1 + q2)) * w2
}

/// Maximizer of `w ln|I + R^{-1} H Q H^T| - tr(S Q)` over PSD `Q`.
pub fn closed_form_block(w: f64, s: &Matrix, r: &Matrix, h: &Matrix) -> Result<Matrix> {
    let nt = h.ncols();
    if s.nrows() != nt || !s.is_square() || r.nrows() != h.nrows() || !r.is_square() {
        return Err(Error::Dimension("closed-form block dimensions disagree".into()));
    }
    if w <= 0.0 {
        return Ok(Matrix::zeros(nt, nt));
    }
    let s_reg = symmetrize(s) + Matrix::identity(nt, nt) * S_REGULARIZATION;
    if !(min_eigenvalue(&s_reg) > 0.0) {
        return Err(Error::InvalidInput("penalty matrix is not positive definite".into()));
    }
    let s_half_inv = inv_sqrt_spd(&s_reg)?;
    let r_half_inv = inv_sqrt_spd(&symmetrize(r))?;
    let effective = &r_half_inv * h * &s_half_inv;
    let svd = effective.svd(false, true);
    let v_t = svd
        .v_t
        .ok_or_else(|| Error::Internal("SVD did not return right singular vectors".into()))?;
    let mut inner = Matrix::zeros(nt, nt);
    for (k, sigma) in svd.singular_values.iter().enumerate() {
        if *sigma <= 0.0 {
            continue;
        }
        let load = w - 1.0 / (sigma * sigma);
        if load > 0.0 {
            let v = v_t.row(k).transpose();
            inner += &v * v.transpose() * load;
        }
    }
    Ok(symmetrize(&(&s_half_inv * inner * &s_half_inv)))
}

/// Weighted sum rate in order 12, unclamped.
fn weighted_sum(ch: &ChannelPair, kind: ScenarioKind, cfg: &WsrConfig, q1: &Matrix, q2: &Matrix) -> Result<f64> {
    let (r1, r2) = user_rates(ch, kind, q1, q2, EncodingOrder::OneTwo)?;
    Ok(cfg.w1 * r1 + cfg.w2 * r2)
}

#[derive(Debug, Clone)]
pub struct InnerSolution {
    pub q1: Matrix,
    pub q2: Matrix,
    pub wsr: f64,
    pub iterations: usize,
    /// Lagrangian after every block pass, starting from the initial point.
    pub lagrangian: Vec<f64>,
}

fn update_q1(ch: &ChannelPair, kind: ScenarioKind, cfg: &WsrConfig, lambda: f64, q1: &Matrix, q2: &Matrix) -> Result<Matrix> {
    let nt = ch.nt();
    let eye = Matrix::identity(nt, nt);
    let id_n1 = Matrix::identity(ch.n1(), ch.n1());
    let nat = 1.0 / (2.0 * LN_2);
    match kind {
        ScenarioKind::A => {
            let s = &eye * lambda + price_matrix_a(ch, q1, q2, cfg.w2);
            closed_form_block(cfg.w1 * nat, &s, &id_n1, ch.h1())
        }
        ScenarioKind::B => {
            let s = &eye * lambda + price_matrix_b(ch, q1, q2, cfg.w1, cfg.w2);
            closed_form_block(cfg.w1 * nat, &s, &id_n1, ch.h1())
        }
        ScenarioKind::C => {
            let s = &eye * lambda + price_matrix_c1(ch, q1, q2, cfg.w1, cfg.w2);
            closed_form_block((cfg.w1 + cfg.w2) * nat, &s, &id_n1, ch.h1())
        }
    }
}

fn update_q2(ch: &ChannelPair, kind: ScenarioKind, cfg: &WsrConfig, lambda: f64, q1: &Matrix, q2: &Matrix) -> Result<Matrix> {
    let nt = ch.nt();
    let eye = Matrix::identity(nt, nt);
    let nat = 1.0 / (2.0 * LN_2);
    let r = gram_plus_identity(ch.h2(), q1);
    let s = match kind {
        ScenarioKind::A | ScenarioKind::B => &eye * lambda,
        ScenarioKind::C => &eye * lambda + price_matrix_c2(ch, q1, q2, cfg.w2),
    };
    closed_form_block(cfg.w2 * nat, &s, &r, ch.h2())
}

/// Block successive maximization at a fixed multiplier, order 12, from
/// `Q1 = Q2 = p/(2 nt) I`.
pub fn bsmm_inner(ch: &ChannelPair, kind: ScenarioKind, cfg: &WsrConfig, lambda: f64, p: f64) -> Result<InnerSolution> {
    cfg.validate()?;
    if !(lambda > 0.0) {
        return Err(Error::InvalidInput(format!("multiplier must be positive, got {lambda}")));
    }
    let nt = ch.nt();
    let start = Matrix::identity(nt, nt) * (p / (2.0 * nt as f64));
    let (mut q1, mut q2) = (start.clone(), start);
    let lagrangian = |q1: &Matrix, q2: &Matrix, wsr: f64| wsr - lambda * (q1.trace() + q2.trace() - p);
    let mut wsr = weighted_sum(ch, kind, cfg, &q1, &q2)?;
    let mut trace = vec![lagrangian(&q1, &q2, wsr)];
    let mut iterations = 0;
    while iterations < cfg.max_inner {
        iterations += 1;
        let before = *trace.last().expect("trace starts non-empty");
        q1 = project_psd(&update_q1(ch, kind, cfg, lambda, &q1, &q2)?);
        let mid = lagrangian(&q1, &q2, weighted_sum(ch, kind, cfg, &q1, &q2)?);
        q2 = project_psd(&update_q2(ch, kind, cfg, lambda, &q1, &q2)?);
        let next_wsr = weighted_sum(ch, kind, cfg, &q1, &q2)?;
        let after = lagrangian(&q1, &q2, next_wsr);
        for (from, to) in [(before, mid), (mid, after)] {
            if to < from - ASCENT_SLACK * from.abs().max(1.0) {
                return Err(Error::Internal(format!(
                    "block update decreased the Lagrangian from {from} to {to} at lambda {lambda}"
                )));
            }
        }
        trace.push(after);
        let moved = (next_wsr - wsr).abs();
        wsr = next_wsr;
        if moved < cfg.eps3 {
            break;
        }
    }
    Ok(InnerSolution { q1, q2, wsr, iterations, lagrangian: trace })
}

#[derive(Debug, Clone)]
pub struct WsrSolution {
    pub q1: Matrix,
    pub q2: Matrix,
    pub rates: RateTriple,
    pub lambda: f64,
    /// Final multiplier bracket; `(lambda_min, lambda_min)` when power is not binding.
    pub bracket: (f64, f64),
    pub wsr: f64,
}

struct Bisected {
    q1: Matrix,
    q2: Matrix,
    lambda: f64,
    bracket: (f64, f64),
}

fn bisect(ch: &ChannelPair, kind: ScenarioKind, cfg: &WsrConfig, p: f64) -> Result<Bisected> {
    let power = |s: &InnerSolution| s.q1.trace() + s.q2.trace();
    let mut hi = cfg.lambda_max;
    let mut at_hi = bsmm_inner(ch, kind, cfg, hi, p)?;
    if power(&at_hi) > p {
        hi *= 10.0;
        at_hi = bsmm_inner(ch, kind, cfg, hi, p)?;
        if power(&at_hi) > p {
            return Err(Error::Bracket {
                lambda_min: cfg.lambda_min,
                lambda_max: hi,
                detail: format!("power {} still exceeds budget {p} at the upper end", power(&at_hi)),
            });
        }
    }
    let mut lo = cfg.lambda_min;
    let at_lo = bsmm_inner(ch, kind, cfg, lo, p)?;
    if power(&at_lo) <= p {
        return Ok(Bisected { q1: at_lo.q1, q2: at_lo.q2, lambda: lo, bracket: (lo, lo) });
    }
    while hi - lo >= cfg.eps2 {
        let mid = 0.5 * (lo + hi);
        let s = bsmm_inner(ch, kind, cfg, mid, p)?;
        if power(&s) < p {
            hi = mid;
            at_hi = s;
        } else {
            lo = mid;
        }
    }
    Ok(Bisected { q1: at_hi.q1, q2: at_hi.q2, lambda: hi, bracket: (lo, hi) })
}

fn solve_order(ch: &ChannelPair, scenario: Scenario, cfg: &WsrConfig, p: f64, order: EncodingOrder) -> Result<WsrSolution> {
    let kind = scenario.kind;
    let (q1, q2, lambda, bracket) = match order {
        EncodingOrder::OneTwo => {
            let b = bisect(ch, kind, cfg, p)?;
            (b.q1, b.q2, b.lambda, b.bracket)
        }
        EncodingOrder::TwoOne => {
            let b = bisect(&ch.swapped(), kind, &cfg.swapped(), p)?;
            (b.q2, b.q1, b.lambda, b.bracket)
        }
        EncodingOrder::NotApplicable => {
            return Err(Error::InvalidInput("weighted sum rate needs an encoding order".into()))
        }
    };
    let score = |a: &Matrix, b: &Matrix| -> Result<f64> {
        let (r1, r2) = user_rates(ch, kind, a, b, order)?;
        Ok(cfg.w1 * r1 + cfg.w2 * r2)
    };
    let (mut q1, mut q2) = (q1, q2);
    let used = q1.trace() + q2.trace();
    if used > 0.0 {
        let f = p / used;
        let (s1, s2) = (&q1 * f, &q2 * f);
        if score(&s1, &s2)? > score(&q1, &q2)? {
            q1 = s1;
            q2 = s2;
        }
    }
    let (r1, r2) = user_rates(ch, kind, &q1, &q2, order)?;
    Ok(WsrSolution {
        wsr: cfg.w1 * r1 + cfg.w2 * r2,
        rates: RateTriple::new(0.0, r1, r2, order),
        q1,
        q2,
        lambda,
        bracket,
    })
}

/// Weighted-sum-rate optimum over `tr(Q1 + Q2) <= p`; both orders for A and C.
pub fn wsr_solve(ch: &ChannelPair, scenario: Scenario, cfg: &WsrConfig, p: f64) -> Result<WsrSolution> {
    cfg.validate()?;
    if scenario.common_enabled {
        return Err(Error::InvalidInput(
            "weighted sum rate design does not support a common message".into(),
        ));
    }
    if !(p > 0.0) || !p.is_finite() {
        return Err(Error::InvalidInput(format!("power must be positive, got {p}")));
    }
    let mut best: Option<WsrSolution> = None;
    for order in scenario.kind.orders() {
        let s = solve_order(ch, scenario, cfg, p, *order)?;
        if best.as_ref().is_none_or(|b| s.wsr > b.wsr) {
            best = Some(s);
        }
    }
    Ok(best.expect("every scenario has at least one order"))
}

/// Gradients of `w1 R1 + w2 R2` (order 12) with respect to `Q1` and `Q2`.
pub fn wsr_gradients(ch: &ChannelPair, kind: ScenarioKind, q1: &Matrix, q2: &Matrix, w1: f64, w2: f64) -> (Matrix, Matrix) {
    let total = q1 + q2;
    let (g11, g21) = (resolvent(ch.h1(), q1), resolvent(ch.h2(), q1));
    let (g1t, g2t) = (resolvent(ch.h1(), &total), resolvent(ch.h2(), &total));
    match kind {
        ScenarioKind::A => (&g11 * w1 + (&g2t - &g21) * w2, &g2t * w2),
        ScenarioKind::B => ((&g11 - &g21) * w1 + (&g2t - &g21) * w2, &g2t * w2),
        ScenarioKind::C => (
            (&g11 - &g21) * w1 + (&g2t - &g21 - &g1t + &g11) * w2,
            (&g2t - &g1t) * w2,
        ),
    }
}

/// Largest violation of the first-order conditions at `(Q1, Q2, lambda)`, order 12.
pub fn kkt_residual(
    ch: &ChannelPair,
    kind: ScenarioKind,
    q1: &Matrix,
    q2: &Matrix,
    lambda: f64,
    weights: (f64, f64),
    p: f64,
) -> f64 {
    let nt = ch.nt();
    let (g1, g2) = wsr_gradients(ch, kind, q1, q2, weights.0, weights.1);
    let eye = Matrix::identity(nt, nt) * lambda;
    let stationarity = |q: &Matrix, g: &Matrix| (q - project_psd(&(q + g - &eye))).norm();
    let slackness = if lambda == 0.0 { 0.0 } else { (lambda * (p - q1.trace() - q2.trace())).abs() };
    stationarity(q1, &g1)
        .max(stationarity(q2, &g2))
        .max(slackness)
        .max((-lambda).max(0.0))
}

/// Frontier traced by `w1 = 0, sigma, ..., 1` with `w2 = 1 - w1`.
pub fn wsr_frontier(ch: &ChannelPair, scenario: Scenario, p: f64, sigma: f64) -> Result<(RateRegion, Vec<RateTriple>)> {
    if !(sigma > 0.0 && sigma <= 1.0) {
        return Err(Error::InvalidInput(format!("weight step {sigma} outside (0, 1]")));
    }
    let points: Vec<RateTriple> = grid(sigma, 1.0)
        .par_iter()
        .map(|w1| {
            let cfg = WsrConfig::new(*w1, 1.0 - w1)?;
            Ok(wsr_solve(ch, scenario, &cfg, p)?.rates)
        })
        .collect::<Result<_>>()?;
    let region = RateRegion::from_points(points.iter().map(|r| RegionPoint::from(*r)).collect(), scenario, p);
    Ok((region, points))
}

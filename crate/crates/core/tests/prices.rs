mod common;

use common::*;

use secnoma::search::SolverOptions;
use secnoma::types::{ChannelPair, Scenario, ScenarioKind};
use secnoma::waterfill::waterfill;
use secnoma::wiretap::solve_wiretap;
use secnoma::wsr::{
    bsmm_inner, kkt_residual, price_matrix_a, price_matrix_b, price_matrix_c1, price_matrix_c2, wsr_gradients,
    wsr_solve, WsrConfig,
};

/// Non-concave remainder of the weighted sum in each scenario, order 12.
/// The prices are minus its gradients.
fn remainder_q1(ch: &ChannelPair, kind: ScenarioKind, q1: &Matrix, q2: &Matrix, w: (f64, f64)) -> f64 {
    let (h1, h2) = (ch.h1(), ch.h2());
    let total = q1 + q2;
    let (w1, w2) = w;
    match kind {
        ScenarioKind::A => w2 * (half_ld(h2, &total) - half_ld(h2, q1)),
        ScenarioKind::B => w2 * half_ld(h2, &total) - (w1 + w2) * half_ld(h2, q1),
        ScenarioKind::C => w2 * half_ld(h2, &total) - (w1 + w2) * half_ld(h2, q1) - w2 * half_ld(h1, &total),
    }
}

fn remainder_q2(ch: &ChannelPair, q1: &Matrix, q2: &Matrix, w2: f64) -> f64 {
    -w2 * half_ld(ch.h1(), &(q1 + q2))
}

/// `<G, E>` from central differences of `f` along symmetric `E`.
fn directional(f: impl Fn(f64) -> f64, step: f64) -> f64 {
    (f(step) - f(-step)) / (2.0 * step)
}

fn inner(a: &Matrix, b: &Matrix) -> f64 {
    a.component_mul(b).sum()
}

#[test]
fn scalar_price_values() {
    let s = |v: f64| Matrix::from_element(1, 1, v);
    let ch = pair(&[&[1.0]], &[&[1.0]]);
    let nat = 1.0 / (2.0 * std::f64::consts::LN_2);
    // d/dq1 of w2 [1/2 log2(1 + q1 + q2) - 1/2 log2(1 + q1)] at q1 = 0, q2 = 1 is (1/2 - 1) nat
    assert!((price_matrix_a(&ch, &s(0.0), &s(1.0), 1.0)[(0, 0)] - 0.5 * nat).abs() < 1e-15);
    assert!((price_matrix_b(&ch, &s(0.0), &s(0.0), 1.0, 1.0)[(0, 0)] - nat).abs() < 1e-15);
    assert!((nat - 0.7213).abs() < 1e-4);
}

#[test]
fn prices_match_finite_differences() {
    let mut r = rng(11);
    for trial in 0..50 {
        let nt = 1 + trial % 3;
        let ch = random_pair(nt, 1 + (trial / 3) % 3, 1 + trial % 2 + 1, &mut r);
        let p = 0.5 + 10.0 * rand::Rng::random::<f64>(&mut r);
        // interior points keep q +- step*E positive definite
        let eye = Matrix::identity(nt, nt) * 0.05;
        let q1 = random_psd(nt, p / 2.0, &mut r) + &eye;
        let q2 = random_psd(nt, p / 2.0, &mut r) + &eye;
        let w = (rand::Rng::random::<f64>(&mut r), rand::Rng::random::<f64>(&mut r));
        let step = 1e-5;
        let cases: [(ScenarioKind, Matrix); 3] = [
            (ScenarioKind::A, price_matrix_a(&ch, &q1, &q2, w.1)),
            (ScenarioKind::B, price_matrix_b(&ch, &q1, &q2, w.0, w.1)),
            (ScenarioKind::C, price_matrix_c1(&ch, &q1, &q2, w.0, w.1)),
        ];
        for (kind, price) in cases {
            for _ in 0..3 {
                let e = random_symmetric(nt, &mut r);
                let fd = directional(|t| remainder_q1(&ch, kind, &(&q1 + &e * t), &q2, w), step);
                let an = -inner(&price, &e);
                assert!(
                    (fd - an).abs() <= 1e-5 * an.abs().max(price.norm()).max(1e-3),
                    "{kind:?} trial {trial}: fd {fd} analytic {an}"
                );
            }
        }
        let c2 = price_matrix_c2(&ch, &q1, &q2, w.1);
        let e = random_symmetric(nt, &mut r);
        let fd = directional(|t| remainder_q2(&ch, &q1, &(&q2 + &e * t), w.1), step);
        let an = -inner(&c2, &e);
        assert!((fd - an).abs() <= 1e-5 * an.abs().max(c2.norm()).max(1e-3), "C2 trial {trial}: {fd} vs {an}");
    }
}

#[test]
fn gradients_match_finite_differences() {
    let mut r = rng(12);
    for trial in 0..20 {
        let ch = random_pair(2, 2, 1 + trial % 2, &mut r);
        let eye = Matrix::identity(2, 2) * 0.1;
        let q1 = random_psd(2, 3.0, &mut r) + &eye;
        let q2 = random_psd(2, 3.0, &mut r) + &eye;
        let w = (0.3, 0.8);
        for kind in [ScenarioKind::A, ScenarioKind::B, ScenarioKind::C] {
            let (g1, g2) = wsr_gradients(&ch, kind, &q1, &q2, w.0, w.1);
            let total = |a: &Matrix, b: &Matrix| {
                let [_, r1, r2] = reference_rates(&ch, kind, &Matrix::zeros(2, 2), a, b, false);
                w.0 * r1 + w.1 * r2
            };
            let e = random_symmetric(2, &mut r);
            let fd1 = directional(|t| total(&(&q1 + &e * t), &q2), 1e-5);
            let fd2 = directional(|t| total(&q1, &(&q2 + &e * t)), 1e-5);
            assert!((fd1 - inner(&g1, &e)).abs() < 1e-6, "{kind:?}");
            assert!((fd2 - inner(&g2, &e)).abs() < 1e-6, "{kind:?}");
        }
    }
}

#[test]
fn inner_loop_ascends_and_stops_quickly() {
    let ch = three_tx_pair();
    let cfg = WsrConfig::new(1.0, 1.0).unwrap();
    let lambda = 0.5 * (cfg.lambda_min + cfg.lambda_max);
    let sol = bsmm_inner(&ch, ScenarioKind::A, &cfg, lambda, 10.0).unwrap();
    assert!(sol.iterations < 200, "{} iterations", sol.iterations);
    for pair in sol.lagrangian.windows(2) {
        assert!(pair[1] >= pair[0] - 1e-9 * pair[0].abs().max(1.0));
    }
}

#[test]
fn weights_on_one_user_reduce_to_single_user_solvers() {
    let d = |a: f64, b: f64| Matrix::from_diagonal(&nalgebra::DVector::from_row_slice(&[a, b]));
    let ch = ChannelPair::new(d(1.0, 1.0), d(2.0, 1.0)).unwrap();
    let s = wsr_solve(&ch, Scenario::without_common(ScenarioKind::A), &WsrConfig::new(0.0, 1.0).unwrap(), 1.0).unwrap();
    assert!((s.rates.r2 - 0.5 * (4.5f64 * 1.125).log2()).abs() < 1e-3, "{}", s.rates.r2);

    let ch = square_pair();
    let opts = SolverOptions::default();
    let wt = solve_wiretap(ch.h1(), ch.h2(), 12.0, &opts).unwrap().rate;
    for kind in [ScenarioKind::B, ScenarioKind::C] {
        let s = wsr_solve(&ch, Scenario::without_common(kind), &WsrConfig::new(1.0, 0.0).unwrap(), 12.0).unwrap();
        assert!((s.rates.r1 - wt).abs() < 1e-3, "{kind:?}: {} vs {wt}", s.rates.r1);
    }
    let wf = waterfill(ch.h1(), 12.0).unwrap().rate;
    let s = wsr_solve(&ch, Scenario::without_common(ScenarioKind::A), &WsrConfig::new(1.0, 0.0).unwrap(), 12.0).unwrap();
    assert!((s.rates.r1 - wf).abs() < 1e-3);
}

#[test]
fn kkt_residual_examples() {
    // w = (0, 1) on a scalar channel: water-filling q2 = p, lambda = w2 nat h^2 / (1 + h^2 p)
    let ch = pair(&[&[1.0]], &[&[2.0]]);
    let nat = 1.0 / (2.0 * std::f64::consts::LN_2);
    let p = 1.0;
    let lambda = nat * 4.0 / (1.0 + 4.0 * p);
    let s = |v: f64| Matrix::from_element(1, 1, v);
    let at = kkt_residual(&ch, ScenarioKind::A, &s(0.0), &s(p), lambda, (0.0, 1.0), p);
    assert!(at < 1e-8, "{at}");

    // converged inner point at a fixed multiplier; its own trace is the budget
    let ch = three_tx_pair();
    let cfg = WsrConfig::new(0.5, 0.5).unwrap();
    let sol = bsmm_inner(&ch, ScenarioKind::A, &cfg, 0.05, 4.0).unwrap();
    let budget = sol.q1.trace() + sol.q2.trace();
    let base = kkt_residual(&ch, ScenarioKind::A, &sol.q1, &sol.q2, 0.05, (0.5, 0.5), budget);
    let eig = sol.q1.clone().symmetric_eigen();
    let mut bumped = eig.eigenvalues.clone();
    bumped[0] += 0.1;
    let q1 = &eig.eigenvectors * Matrix::from_diagonal(&bumped) * eig.eigenvectors.transpose();
    let moved = kkt_residual(&ch, ScenarioKind::A, &q1, &sol.q2, 0.05, (0.5, 0.5), budget);
    assert!(moved >= 10.0 * base, "{base} -> {moved}");
}

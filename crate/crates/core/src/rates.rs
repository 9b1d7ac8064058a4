//! Rate expressions of the two-user broadcast channel.
//!
//! All rates are `1/2 log2 det(.)` in bits per channel use. Ratios of the
//! form `|I + K^{-1} H Q H^T|` are evaluated as `|K + H Q H^T| / |K|`, which
//! keeps every determinant argument symmetric positive definite.

use std::f64::consts::LN_2;

use crate::error::{Error, Result};
use crate::linalg::{gram_plus_identity, log_det_spd, Matrix};
use crate::types::{ChannelPair, CovarianceTriple, EncodingOrder, RateTriple, Scenario, ScenarioKind};

fn check_dims(h: &Matrix, q: &Matrix) -> Result<()> {
    if !q.is_square() || q.nrows() != h.ncols() {
        return Err(Error::Dimension(format!(
            "covariance {}x{} does not match channel with {} transmit antennas",
            q.nrows(),
            q.ncols(),
            h.ncols()
        )));
    }
    Ok(())
}

/// `1/2 log2 |I + H Q H^T|`.
pub fn p2p_rate(h: &Matrix, q: &Matrix) -> Result<f64> {
    check_dims(h, q)?;
    Ok(half_log2_det(h, q))
}

pub(crate) fn half_log2_det(h: &Matrix, q: &Matrix) -> f64 {
    0.5 * log_det_spd(&gram_plus_identity(h, q)) / LN_2
}

/// Rate of a signal with covariance `signal` seen through `h` while `interference`
/// is treated as noise: `1/2 log2 |I + (I + H X H^T)^{-1} H Q H^T|`.
pub(crate) fn interfered_rate(h: &Matrix, interference: &Matrix, signal: &Matrix) -> f64 {
    let total = interference + signal;
    half_log2_det(h, &total) - half_log2_det(h, interference)
}

/// Per-user multicast terms `(R01, R02)`.
pub fn common_rate_terms(ch: &ChannelPair, q: &CovarianceTriple) -> Result<(f64, f64)> {
    check_dims(ch.h1(), &q.q0)?;
    let interference = &q.q1 + &q.q2;
    Ok((
        interfered_rate(ch.h1(), &interference, &q.q0),
        interfered_rate(ch.h2(), &interference, &q.q0),
    ))
}

/// `R0 = min(R01, R02)`.
pub fn common_rate(ch: &ChannelPair, q: &CovarianceTriple) -> Result<f64> {
    let (a, b) = common_rate_terms(ch, q)?;
    Ok(a.min(b))
}

/// Private rate of the user encoded first: `1/2 log2 |I + H1 Q1 H1^T|`.
pub fn private_rate_user1(ch: &ChannelPair, q1: &Matrix) -> Result<f64> {
    p2p_rate(ch.h1(), q1)
}

/// Private rate of user 2 treating user 1's signal as interference.
pub fn private_rate_user2(ch: &ChannelPair, q1: &Matrix, q2: &Matrix) -> Result<f64> {
    check_dims(ch.h2(), q1)?;
    check_dims(ch.h2(), q2)?;
    Ok(interfered_rate(ch.h2(), q1, q2))
}

/// Secrecy rate of user 1 against user 2. May be negative.
pub fn conf_rate_user1(ch: &ChannelPair, q1: &Matrix) -> Result<f64> {
    check_dims(ch.h1(), q1)?;
    Ok(half_log2_det(ch.h1(), q1) - half_log2_det(ch.h2(), q1))
}

/// Secrecy rate of user 2 against user 1 when user 1's signal is interference at both. May be negative.
pub fn conf_rate_user2(ch: &ChannelPair, q1: &Matrix, q2: &Matrix) -> Result<f64> {
    check_dims(ch.h1(), q1)?;
    check_dims(ch.h1(), q2)?;
    Ok(interfered_rate(ch.h2(), q1, q2) - interfered_rate(ch.h1(), q1, q2))
}

/// Unclamped `(R1, R2)` for a scenario in encoding order 12 (user 1 first).
pub(crate) fn user_rates_12(
    ch: &ChannelPair,
    kind: ScenarioKind,
    q1: &Matrix,
    q2: &Matrix,
) -> Result<(f64, f64)> {
    let r1 = if kind.user1_confidential() {
        conf_rate_user1(ch, q1)?
    } else {
        private_rate_user1(ch, q1)?
    };
    let r2 = if kind.user2_confidential() {
        conf_rate_user2(ch, q1, q2)?
    } else {
        private_rate_user2(ch, q1, q2)?
    };
    Ok((r1, r2))
}

/// Unclamped `(R1, R2)` in the requested order. Order 21 exchanges the user
/// labels of channels and covariances, evaluates, and maps the rates back.
pub fn user_rates(
    ch: &ChannelPair,
    kind: ScenarioKind,
    q1: &Matrix,
    q2: &Matrix,
    order: EncodingOrder,
) -> Result<(f64, f64)> {
    match order {
        EncodingOrder::OneTwo => user_rates_12(ch, kind, q1, q2),
        EncodingOrder::TwoOne => {
            if kind == ScenarioKind::B {
                return Err(Error::UnsupportedOrder {
                    scenario: 'B',
                    order: "21",
                });
            }
            let (r2, r1) = user_rates_12(&ch.swapped(), kind, q2, q1)?;
            Ok((r1, r2))
        }
        EncodingOrder::NotApplicable => Err(Error::InvalidInput(
            "an encoding order (12 or 21) is required to evaluate user rates".into(),
        )),
    }
}

/// All three rates of a scenario for a covariance triple, unclamped.
pub fn evaluate_triple(
    ch: &ChannelPair,
    scenario: Scenario,
    q: &CovarianceTriple,
    order: EncodingOrder,
) -> Result<RateTriple> {
    if q.nt() != ch.nt() {
        return Err(Error::Dimension(format!(
            "covariances are {}x{} but the channel has {} transmit antennas",
            q.nt(),
            q.nt(),
            ch.nt()
        )));
    }
    let (r1, r2) = user_rates(ch, scenario.kind, &q.q1, &q.q2, order)?;
    let r0 = common_rate(ch, q)?;
    Ok(RateTriple::new(r0, r1, r2, order))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn scalar_pair(h1: f64, h2: f64) -> ChannelPair {
        ChannelPair::from_rows(&[&[h1]], &[&[h2]]).unwrap()
    }

    fn s(v: f64) -> Matrix {
        Matrix::from_element(1, 1, v)
    }

    #[test]
    fn common_rate_scalar_and_zero() {
        let ch = scalar_pair(1.0, 1.0);
        let q = CovarianceTriple::new(s(4.0), s(0.0), s(0.0), 4.0).unwrap();
        assert_abs_diff_eq!(common_rate(&ch, &q).unwrap(), 0.5 * 5f64.log2(), epsilon = 1e-14);
        let z = CovarianceTriple::zeros(1, 1.0);
        assert_eq!(common_rate(&ch, &z).unwrap(), 0.0);
    }

    #[test]
    fn private_rates_by_hand() {
        let ch = scalar_pair(1.0, 1.0);
        assert_abs_diff_eq!(private_rate_user1(&ch, &s(3.0)).unwrap(), 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(private_rate_user2(&ch, &s(0.0), &s(3.0)).unwrap(), 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(private_rate_user2(&ch, &s(1.0), &s(2.0)).unwrap(), 0.5, epsilon = 1e-14);
        assert_eq!(private_rate_user2(&ch, &s(1.0), &s(0.0)).unwrap(), 0.0);

        let diag = ChannelPair::new(
            Matrix::from_diagonal(&nalgebra::DVector::from_vec(vec![2.0, 1.0])),
            Matrix::identity(2, 2),
        )
        .unwrap();
        let q1 = Matrix::from_diagonal(&nalgebra::DVector::from_vec(vec![0.875, 0.125]));
        let expected = 0.5 * (4.5f64 * 1.125).log2();
        assert_abs_diff_eq!(private_rate_user1(&diag, &q1).unwrap(), expected, epsilon = 1e-14);
        assert_abs_diff_eq!(expected, 1.1700, epsilon = 1e-4);
    }

    #[test]
    fn confidential_rates_by_hand() {
        let ch = scalar_pair(2.0, 1.0);
        assert_abs_diff_eq!(conf_rate_user1(&ch, &s(1.0)).unwrap(), 0.5 * 2.5f64.log2(), epsilon = 1e-14);
        let rev = scalar_pair(1.0, 2.0);
        let r = conf_rate_user1(&rev, &s(1.0)).unwrap();
        assert!(r < 0.0);
        assert_abs_diff_eq!(r, 0.5 * 0.4f64.log2(), epsilon = 1e-14);
        // roles swap when q1 = 0
        assert_abs_diff_eq!(
            conf_rate_user2(&rev, &s(0.0), &s(1.0)).unwrap(),
            0.5 * 2.5f64.log2(),
            epsilon = 1e-14
        );
        let same = scalar_pair(1.0, 1.0);
        assert_abs_diff_eq!(conf_rate_user2(&same, &s(0.7), &s(2.3)).unwrap(), 0.0, epsilon = 1e-14);
        assert_eq!(conf_rate_user2(&same, &s(0.7), &s(0.0)).unwrap(), 0.0);
    }

    #[test]
    fn scenario_b_rejects_swapped_order() {
        let ch = scalar_pair(2.0, 1.0);
        let q = CovarianceTriple::zeros(1, 1.0);
        let err = evaluate_triple(&ch, Scenario::with_common(ScenarioKind::B), &q, EncodingOrder::TwoOne);
        assert!(matches!(err, Err(Error::UnsupportedOrder { .. })));
    }

    #[test]
    fn zero_covariances_give_origin() {
        let ch = scalar_pair(2.0, 1.0);
        let q = CovarianceTriple::zeros(1, 1.0);
        for kind in [ScenarioKind::A, ScenarioKind::B, ScenarioKind::C] {
            let r = evaluate_triple(&ch, Scenario::with_common(kind), &q, EncodingOrder::OneTwo).unwrap();
            assert_eq!(r.as_array(), [0.0, 0.0, 0.0]);
        }
    }

    #[test]
    fn swapped_order_exchanges_roles() {
        let ch = scalar_pair(2.0, 1.0);
        let (r1, r2) = user_rates(&ch, ScenarioKind::A, &s(1.0), &s(2.0), EncodingOrder::TwoOne).unwrap();
        // user 2 interference free, user 1 sees user 2's signal
        assert_abs_diff_eq!(r2, 0.5 * 3f64.log2(), epsilon = 1e-14);
        assert_abs_diff_eq!(r1, 0.5 * (1.0 + 4.0 / 9.0f64).log2(), epsilon = 1e-14);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let ch = scalar_pair(1.0, 1.0);
        assert!(matches!(private_rate_user1(&ch, &Matrix::zeros(2, 2)), Err(Error::Dimension(_))));
    }
}

//! Power-splitting design: one subproblem per message, then the region sweep.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::multicast::solve_multicast;
use crate::rates::{common_rate, user_rates};
use crate::region::RateRegion;
use crate::search::SolverOptions;
use crate::transforms::{whiten_multicast, whiten_p2p, whiten_wiretap};
use crate::types::{
    ChannelPair, CovarianceTriple, EncodingOrder, PowerSplit, RateTriple, RegionPoint, Scenario, ScenarioKind,
};
use crate::waterfill::waterfill;
use crate::wiretap::solve_wiretap;

/// Budgets below this fraction of the total power are treated as zero.
pub const ZERO_BUDGET: f64 = 1e-12;

/// Largest allowed gap between whitened-solver rates and direct evaluation.
pub const AGREEMENT_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct SplitSolution {
    pub covariances: CovarianceTriple,
    pub rates: RateTriple,
    pub converged: bool,
}

struct Designed {
    q0: Matrix,
    q1: Matrix,
    q2: Matrix,
    /// Rates reported by the subproblem solvers on their own channels.
    solver_rates: [f64; 3],
    converged: bool,
}

fn budget(alpha: f64, p: f64) -> f64 {
    let b = alpha * p;
    if b < ZERO_BUDGET * p {
        0.0
    } else {
        b
    }
}

/// Design in order 12: user 1 first, user 2 sees it as interference.
fn design_12(ch: &ChannelPair, scenario: Scenario, split: &PowerSplit, p: f64, opts: &SolverOptions) -> Result<Designed> {
    let kind = scenario.kind;
    let (p0, p1, p2) = (budget(split.alpha0(), p), budget(split.alpha1(), p), budget(split.alpha2(), p));
    let mut converged = true;

    let (q1, r1) = if kind == ScenarioKind::A {
        let w = waterfill(ch.h1(), p1)?;
        (w.covariance, w.rate)
    } else {
        let w = solve_wiretap(ch.h1(), ch.h2(), p1, opts)?;
        converged &= w.converged;
        (w.covariance, w.rate)
    };

    let (q2, r2) = if kind == ScenarioKind::C {
        let (h1w, h2w) = whiten_wiretap(ch, &q1);
        let w = solve_wiretap(&h2w, &h1w, p2, opts)?;
        converged &= w.converged;
        (w.covariance, w.rate)
    } else {
        let w = waterfill(&whiten_p2p(ch.h2(), &q1), p2)?;
        (w.covariance, w.rate)
    };

    let (q0, r0) = if p0 > 0.0 {
        let (h1w, h2w) = whiten_multicast(ch, &q1, &q2);
        let m = solve_multicast(&h1w, &h2w, p0, opts)?;
        converged &= m.converged;
        (m.covariance, m.rate)
    } else {
        (Matrix::zeros(ch.nt(), ch.nt()), 0.0)
    };

    Ok(Designed { q0, q1, q2, solver_rates: [r0, r1, r2], converged })
}

/// Covariances and rates for one split in one encoding order.
///
/// Order 21 is designed on the relabelled problem (channels and user fractions
/// exchanged) and mapped back. Rates are always evaluated on the original
/// channels and must agree with what the subproblem solvers reported.
pub fn solve_split(
    ch: &ChannelPair,
    scenario: Scenario,
    split: &PowerSplit,
    p: f64,
    order: EncodingOrder,
    opts: &SolverOptions,
) -> Result<SplitSolution> {
    if !(p >= 0.0) || !p.is_finite() {
        return Err(Error::InvalidInput(format!("invalid power {p}")));
    }
    if !scenario.common_enabled && split.alpha0() * p > ZERO_BUDGET * p {
        return Err(Error::InvalidInput("common message disabled but alpha0 > 0".into()));
    }
    let d = match order {
        EncodingOrder::OneTwo => design_12(ch, scenario, split, p, opts)?,
        EncodingOrder::TwoOne => {
            if scenario.kind == ScenarioKind::B {
                return Err(Error::UnsupportedOrder { scenario: 'B', order: "21" });
            }
            let d = design_12(&ch.swapped(), scenario, &split.swapped(), p, opts)?;
            let [r0, r2, r1] = d.solver_rates;
            Designed { q1: d.q2, q2: d.q1, solver_rates: [r0, r1, r2], ..d }
        }
        EncodingOrder::NotApplicable => {
            return Err(Error::InvalidInput("power splitting needs an encoding order".into()))
        }
    };

    let covariances = CovarianceTriple::new(d.q0, d.q1, d.q2, p)?;
    let (r1, r2) = user_rates(ch, scenario.kind, &covariances.q1, &covariances.q2, order)?;
    let r0 = common_rate(ch, &covariances)?;
    let evaluated = [r0, r1, r2];
    for (k, (a, b)) in evaluated.iter().zip(&d.solver_rates).enumerate() {
        if (a - b).abs() > AGREEMENT_TOL * a.abs().max(1.0) {
            return Err(Error::Internal(format!(
                "rate {k} evaluates to {a} on the original channels but the solver reported {b}"
            )));
        }
    }
    Ok(SplitSolution {
        covariances,
        rates: RateTriple::new(r0, r1, r2, order),
        converged: d.converged,
    })
}

/// `0, eps1, 2 eps1, ...` up to `upper`, always ending exactly at `upper`.
pub fn grid(eps1: f64, upper: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut k = 0usize;
    loop {
        let v = k as f64 * eps1;
        if v >= upper - 1e-12 {
            break;
        }
        out.push(v);
        k += 1;
    }
    out.push(upper.max(0.0));
    out
}

/// All splits visited by the sweep. Without a common message only `alpha1`
/// varies and `alpha2 = 1 - alpha1`.
pub fn split_grid(eps1: f64, common_enabled: bool) -> Result<Vec<PowerSplit>> {
    if !(eps1 > 0.0 && eps1 <= 0.5) {
        return Err(Error::InvalidInput(format!("grid step {eps1} outside (0, 0.5]")));
    }
    let mut out = Vec::new();
    for a1 in grid(eps1, 1.0) {
        if common_enabled {
            for a2 in grid(eps1, 1.0 - a1) {
                out.push(PowerSplit::new((1.0 - a1 - a2).max(0.0), a1, a2)?);
            }
        } else {
            out.push(PowerSplit::new(0.0, a1, 1.0 - a1)?);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub region: RateRegion,
    /// Every grid point before hull reduction, in grid order.
    pub raw: Vec<RegionPoint>,
    pub converged: bool,
}

/// Runs every split on the grid in every allowed order and returns the region.
pub fn sweep_region(ch: &ChannelPair, scenario: Scenario, p: f64, eps1: f64, opts: &SolverOptions) -> Result<SweepResult> {
    let splits = split_grid(eps1, scenario.common_enabled)?;
    if !(p >= 0.0) || !p.is_finite() {
        return Err(Error::InvalidInput(format!("invalid power {p}")));
    }
    if p == 0.0 {
        let origin = vec![RegionPoint::from(RateTriple::origin())];
        return Ok(SweepResult {
            region: RateRegion::from_points(origin.clone(), scenario, p),
            raw: origin,
            converged: true,
        });
    }
    let jobs: Vec<(PowerSplit, EncodingOrder)> = splits
        .iter()
        .flat_map(|s| scenario.kind.orders().iter().map(move |o| (*s, *o)))
        .collect();
    let solved: Vec<(RegionPoint, bool)> = jobs
        .par_iter()
        .map(|(split, order)| {
            let sol = solve_split(ch, scenario, split, p, *order, opts)?;
            Ok((RegionPoint::new(sol.rates, Some(*split)), sol.converged))
        })
        .collect::<Result<_>>()?;
    let converged = solved.iter().all(|s| s.1);
    let raw: Vec<RegionPoint> = solved.into_iter().map(|s| s.0).collect();
    Ok(SweepResult {
        region: RateRegion::from_points(raw.clone(), scenario, p),
        raw,
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use nalgebra::DVector;

    fn fig2() -> ChannelPair {
        ChannelPair::from_rows(&[&[0.3, 2.5], &[2.2, 1.8]], &[&[1.3, 1.2], &[1.5, 3.9]]).unwrap()
    }

    #[test]
    fn grid_has_both_endpoints() {
        assert_eq!(grid(0.25, 1.0), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        let g = grid(0.3, 1.0);
        assert_eq!(g.first(), Some(&0.0));
        assert_eq!(g.last(), Some(&1.0));
        assert_eq!(split_grid(0.5, true).unwrap().len(), 6);
        assert_eq!(split_grid(0.05, false).unwrap().len(), 21);
        assert!(split_grid(0.0, true).is_err());
    }

    #[test]
    fn pure_multicast_split() {
        let sol = solve_split(
            &fig2(),
            Scenario::with_common(ScenarioKind::A),
            &PowerSplit::new(1.0, 0.0, 0.0).unwrap(),
            12.0,
            EncodingOrder::OneTwo,
            &SolverOptions::default(),
        )
        .unwrap();
        assert!(sol.rates.r0 > 0.0);
        assert_eq!((sol.rates.r1, sol.rates.r2), (0.0, 0.0));
    }

    #[test]
    fn all_power_to_user_one_is_wiretap() {
        let ch = fig2();
        let opts = SolverOptions::default();
        let sol = solve_split(
            &ch,
            Scenario::without_common(ScenarioKind::C),
            &PowerSplit::new(0.0, 1.0, 0.0).unwrap(),
            12.0,
            EncodingOrder::OneTwo,
            &opts,
        )
        .unwrap();
        let direct = solve_wiretap(ch.h1(), ch.h2(), 12.0, &opts).unwrap();
        assert_abs_diff_eq!(sol.rates.r1, direct.rate, epsilon = 1e-9);
    }

    #[test]
    fn diagonal_private_split_by_hand() {
        let d = |v: &[f64]| Matrix::from_diagonal(&DVector::from_row_slice(v));
        let ch = ChannelPair::new(d(&[2.0, 1.0]), d(&[1.0, 3.0])).unwrap();
        let sol = solve_split(
            &ch,
            Scenario::with_common(ScenarioKind::A),
            &PowerSplit::new(0.0, 0.5, 0.5).unwrap(),
            2.0,
            EncodingOrder::OneTwo,
            &SolverOptions::default(),
        )
        .unwrap();
        // user 1 on floors 1/4, 1 with power 1: level 1.125
        assert_abs_diff_eq!(sol.rates.r1, 0.5 * (4.5f64 * 1.125).log2(), epsilon = 1e-12);
        // user 2 sees gains 1/(1+0.875) and 9/(1+9*0.125) on the two modes
        let g = [1.0 / 1.875, 9.0 / 2.125];
        let floors = [1.0 / g[0], 1.0 / g[1]];
        let mu = crate::waterfill::water_level(&floors, 1.0).unwrap();
        let r2: f64 = g.iter().zip(&floors).map(|(gi, f)| 0.5 * (1.0 + gi * (mu - f).max(0.0)).log2()).sum();
        assert_abs_diff_eq!(sol.rates.r2, r2, epsilon = 1e-12);
    }

    #[test]
    fn zero_power_region_is_origin() {
        let r = sweep_region(&fig2(), Scenario::with_common(ScenarioKind::C), 0.0, 0.1, &SolverOptions::default()).unwrap();
        assert_eq!(r.region.triples(), vec![RateTriple::origin()]);
    }

    #[test]
    fn order_21_forbidden_for_b() {
        let err = solve_split(
            &fig2(),
            Scenario::with_common(ScenarioKind::B),
            &PowerSplit::new(0.0, 0.5, 0.5).unwrap(),
            1.0,
            EncodingOrder::TwoOne,
            &SolverOptions::default(),
        );
        assert!(matches!(err, Err(Error::UnsupportedOrder { .. })));
    }
}

//! Reference regions: orthogonal time sharing and a Monte-Carlo covariance search.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::multicast::solve_multicast;
use crate::rates::evaluate_triple;
use crate::region::{pareto_indices, RateRegion};
use crate::rotation::{angle_count, assemble_covariance, decompose_covariance, RotationParam};
use crate::search::SolverOptions;
use crate::types::{ChannelPair, CovarianceTriple, EncodingOrder, RateTriple, RegionPoint, Scenario, ScenarioKind};
use crate::waterfill::waterfill;
use crate::wiretap::solve_wiretap;

/// Best rate of each user when it alone gets the whole power.
fn lone_user_rates(ch: &ChannelPair, kind: ScenarioKind, p: f64, opts: &SolverOptions) -> Result<(f64, f64)> {
    let r1 = if kind.user1_confidential() {
        solve_wiretap(ch.h1(), ch.h2(), p, opts)?.rate
    } else {
        waterfill(ch.h1(), p)?.rate
    };
    let r2 = if kind.user2_confidential() {
        solve_wiretap(ch.h2(), ch.h1(), p, opts)?.rate
    } else {
        waterfill(ch.h2(), p)?.rate
    };
    Ok((r1, r2))
}

/// Best single-message rates `(R0, R1, R2)` when that message gets the whole power.
pub fn single_message_rates(ch: &ChannelPair, kind: ScenarioKind, p: f64, opts: &SolverOptions) -> Result<[f64; 3]> {
    let r0 = solve_multicast(ch.h1(), ch.h2(), p, opts)?.rate;
    let (r1, r2) = lone_user_rates(ch, kind, p, opts)?;
    Ok([r0, r1, r2])
}

/// Equal-length slots, one per message, each at full power `p`. Without a
/// common message there are two slots.
pub fn tdma_point(ch: &ChannelPair, scenario: Scenario, p: f64, opts: &SolverOptions) -> Result<RateTriple> {
    let [r0, r1, r2] = single_message_rates(ch, scenario.kind, p, opts)?;
    Ok(if scenario.common_enabled {
        RateTriple::new(r0 / 3.0, r1 / 3.0, r2 / 3.0, EncodingOrder::NotApplicable)
    } else {
        RateTriple::new(0.0, r1 / 2.0, r2 / 2.0, EncodingOrder::NotApplicable)
    })
}

pub fn tdma_region(ch: &ChannelPair, scenario: Scenario, p: f64, opts: &SolverOptions) -> Result<RateRegion> {
    let point = tdma_point(ch, scenario, p, opts)?;
    Ok(RateRegion::from_points(vec![point.into()], scenario, p))
}

/// Segment between the two single-user full-power points.
pub fn oma_timeshare(ch: &ChannelPair, scenario: Scenario, p: f64, opts: &SolverOptions) -> Result<RateRegion> {
    if scenario.common_enabled {
        return Err(Error::InvalidInput("time sharing baseline is defined without a common message".into()));
    }
    let (r1, r2) = lone_user_rates(ch, scenario.kind, p, opts)?;
    let ends = vec![
        RateTriple::new(0.0, r1, 0.0, EncodingOrder::NotApplicable).into(),
        RateTriple::new(0.0, 0.0, r2, EncodingOrder::NotApplicable).into(),
    ];
    Ok(RateRegion::from_points(ends, scenario, p))
}

/// Flat Dirichlet sample of length `k`.
fn flat_simplex(rng: &mut ChaCha8Rng, k: usize) -> Vec<f64> {
    let e: Vec<f64> = (0..k).map(|_| Exp1.sample(rng)).collect();
    let total: f64 = e.iter().sum();
    e.iter().map(|v| v / total).collect()
}

/// Random unit-trace PSD matrix. Families with weights 2:1:1: Wishart
/// `G G^T`, rank one `v v^T`, rotated diagonal with flat-simplex loadings.
fn unit_trace_sample(rng: &mut ChaCha8Rng, nt: usize) -> Matrix {
    let family = rng.random_range(0..4u8);
    let m = match family {
        0 | 1 => {
            let g = Matrix::from_fn(nt, nt, |_, _| StandardNormal.sample(rng));
            &g * g.transpose()
        }
        2 => {
            let v = DVector::<f64>::from_fn(nt, |_, _| StandardNormal.sample(rng));
            &v * v.transpose()
        }
        _ => {
            let angles = (0..angle_count(nt))
                .map(|_| rng.random_range(0.0..std::f64::consts::TAU))
                .collect();
            assemble_covariance(&RotationParam { angles, loadings: flat_simplex(rng, nt) })
        }
    };
    let t = m.trace();
    if t > 0.0 {
        m / t
    } else {
        Matrix::identity(nt, nt) / nt as f64
    }
}

/// Power shares: half of the draws are flat on the whole simplex, the other
/// half flat on a uniformly chosen face, so that boundary allocations such as
/// a single message at full power are sampled too.
fn power_shares(rng: &mut ChaCha8Rng, k: usize) -> Vec<f64> {
    if rng.random_bool(0.5) {
        return flat_simplex(rng, k);
    }
    let mask: u32 = rng.random_range(1..(1u32 << k));
    let active: Vec<usize> = (0..k).filter(|i| mask & (1 << i) != 0).collect();
    let mut shares = vec![0.0; k];
    for (i, v) in active.iter().zip(flat_simplex(rng, active.len())) {
        shares[*i] = v;
    }
    shares
}

/// Covariance triple for sample `index` of stream `seed`. Confidential
/// scenarios also draw an idle share so that total power below `p` is explored.
pub fn oracle_sample(nt: usize, scenario: Scenario, p: f64, seed: u64, index: u64) -> Result<CovarianceTriple> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let idle = usize::from(scenario.kind != ScenarioKind::A);
    let messages = if scenario.common_enabled { 3 } else { 2 };
    let shares = power_shares(&mut rng, messages + idle);
    let q0 = if scenario.common_enabled {
        unit_trace_sample(&mut rng, nt) * (shares[2] * p)
    } else {
        Matrix::zeros(nt, nt)
    };
    let q1 = unit_trace_sample(&mut rng, nt) * (shares[0] * p);
    let q2 = unit_trace_sample(&mut rng, nt) * (shares[1] * p);
    CovarianceTriple::new(q0, q1, q2, p)
}

fn evaluate_one(ch: &ChannelPair, scenario: Scenario, q: &CovarianceTriple) -> Result<Vec<RegionPoint>> {
    scenario
        .kind
        .orders()
        .iter()
        .map(|o| Ok(evaluate_triple(ch, scenario, q, *o)?.clamped().into()))
        .collect()
}

/// Region of the given covariance triples, each evaluated in every allowed order.
pub fn evaluate_samples(ch: &ChannelPair, scenario: Scenario, p: f64, samples: &[CovarianceTriple]) -> Result<RateRegion> {
    let points: Vec<Vec<RegionPoint>> = samples
        .par_iter()
        .map(|q| evaluate_one(ch, scenario, q))
        .collect::<Result<_>>()?;
    Ok(RateRegion::from_points(points.into_iter().flatten().collect(), scenario, p))
}

/// Random move of a parent triple: a random nonempty subset of the messages
/// takes Gaussian steps on its rotation angles and loadings (clipped at
/// zero); the result is rescaled into the budget if needed.
fn perturb(parent: &CovarianceTriple, common: bool, p: f64, rng: &mut ChaCha8Rng) -> Result<CovarianceTriple> {
    let scale = 10f64.powf(rng.random_range(-4.0..-0.5));
    let first = usize::from(!common);
    let subset: u8 = rng.random_range(1..(1u8 << (3 - first)));
    let mut moved = Vec::with_capacity(3);
    for (k, q) in [&parent.q0, &parent.q1, &parent.q2].into_iter().enumerate() {
        if k < first || subset & (1 << (k - first)) == 0 {
            moved.push(q.clone());
            continue;
        }
        let mut rp = decompose_covariance(q)?;
        for a in rp.angles.iter_mut() {
            *a += scale * rng.sample::<f64, _>(StandardNormal);
        }
        for l in rp.loadings.iter_mut() {
            *l = (*l + scale * p * rng.sample::<f64, _>(StandardNormal)).max(0.0);
        }
        moved.push(assemble_covariance(&rp));
    }
    let used: f64 = moved.iter().map(|m| m.trace()).sum();
    if used > p {
        for m in moved.iter_mut() {
            *m *= p / used;
        }
    }
    let q2 = moved.pop().expect("three matrices");
    let q1 = moved.pop().expect("three matrices");
    let q0 = moved.pop().expect("three matrices");
    CovarianceTriple::new(q0, q1, q2, p)
}

/// Rounds of local refinement after the global draw.
pub const REFINE_ROUNDS: usize = 8;

/// Monte-Carlo inner approximation of the best achievable region.
///
/// Half of the samples are drawn globally; the other half, over
/// [`REFINE_ROUNDS`] rounds, perturb the samples currently on the frontier.
/// Sample `i` always uses stream `i` of `seed`.
pub fn random_search_region(ch: &ChannelPair, scenario: Scenario, p: f64, n_samples: usize, seed: u64) -> Result<RateRegion> {
    if !(p >= 0.0) || !p.is_finite() {
        return Err(Error::InvalidInput(format!("invalid power {p}")));
    }
    let global = n_samples - n_samples / 2;
    let mut pool: Vec<CovarianceTriple> = (0..global as u64)
        .into_par_iter()
        .map(|i| oracle_sample(ch.nt(), scenario, p, seed, i))
        .collect::<Result<_>>()?;
    let mut next = global as u64;
    let per_round = (n_samples - global).div_ceil(REFINE_ROUNDS);
    for round in 0..REFINE_ROUNDS {
        let parents = frontier_samples(ch, scenario, &pool)?;
        let count = per_round.min(n_samples - global - round * per_round);
        if parents.is_empty() || count == 0 {
            break;
        }
        let children: Vec<CovarianceTriple> = (0..count as u64)
            .into_par_iter()
            .map(|j| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(next + j);
                perturb(&parents[j as usize % parents.len()], scenario.common_enabled, p, &mut rng)
            })
            .collect::<Result<_>>()?;
        next += count as u64;
        pool = parents;
        pool.extend(children);
    }
    evaluate_samples(ch, scenario, p, &pool)
}

/// Samples that contribute a point to the current frontier, in pool order.
fn frontier_samples(ch: &ChannelPair, scenario: Scenario, pool: &[CovarianceTriple]) -> Result<Vec<CovarianceTriple>> {
    let per: Vec<Vec<RegionPoint>> = pool
        .par_iter()
        .map(|q| evaluate_one(ch, scenario, q))
        .collect::<Result<_>>()?;
    let owner: Vec<usize> = per.iter().enumerate().flat_map(|(i, v)| std::iter::repeat_n(i, v.len())).collect();
    let flat: Vec<RegionPoint> = per.into_iter().flatten().collect();
    let mut chosen: Vec<usize> = pareto_indices(&flat).into_iter().map(|k| owner[k]).collect();
    chosen.dedup();
    Ok(chosen.into_iter().map(|i| pool[i].clone()).collect())
}

//! Rate regions: convex hull with the origin, reduced to its Pareto surface.
//!
//! A region is the set of rate triples dominated by some convex combination of
//! its points and the origin (time sharing plus rate reduction).

use std::collections::BTreeMap;

use microlp::{ComparisonOp, LinearExpr, OptimizationDirection, Problem, SolveOutcome};

use crate::types::{RateTriple, RegionPoint, Scenario};

/// Relative tolerance used when deciding that a hull point dominates another.
pub const HULL_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct RateRegion {
    pub points: Vec<RegionPoint>,
    pub scenario: Scenario,
    pub p_total: f64,
}

impl RateRegion {
    /// Builds the region from raw points, keeping only the Pareto surface of the hull.
    pub fn from_points(points: Vec<RegionPoint>, scenario: Scenario, p_total: f64) -> Self {
        Self { points: pareto_surface(points), scenario, p_total }
    }

    pub fn triples(&self) -> Vec<RateTriple> {
        self.points.iter().map(|p| p.rates).collect()
    }

    /// Largest `t` with `x + t (1,..,1)` still inside the region, over the
    /// coordinates the region or `x` actually use. Negative means outside.
    pub fn margin(&self, x: &RateTriple) -> f64 {
        let arrays: Vec<[f64; 3]> = self.points.iter().map(|p| clamp(p.rates)).collect();
        hull_margin(&arrays, clamp(*x))
    }

    pub fn contains(&self, x: &RateTriple, tol: f64) -> bool {
        self.margin(x) >= -tol
    }

    /// Largest value of coordinate `axis` (0, 1, 2) over the region.
    pub fn max_rate(&self, axis: usize) -> f64 {
        self.points.iter().map(|p| clamp(p.rates)[axis]).fold(0.0, f64::max)
    }

    /// Point with the largest coordinate `axis`, ties broken by the larger sum of the rest.
    pub fn argmax_rate(&self, axis: usize) -> Option<&RegionPoint> {
        self.points.iter().max_by(|a, b| {
            let (a, b) = (clamp(a.rates), clamp(b.rates));
            a[axis]
                .total_cmp(&b[axis])
                .then((a[0] + a[1] + a[2]).total_cmp(&(b[0] + b[1] + b[2])))
        })
    }
}

fn clamp(r: RateTriple) -> [f64; 3] {
    r.clamped().as_array()
}

fn hull_margin(points: &[[f64; 3]], x: [f64; 3]) -> f64 {
    let dims: Vec<usize> = (0..3)
        .filter(|&d| x[d] > 0.0 || points.iter().any(|p| p[d] > 0.0))
        .collect();
    if dims.is_empty() {
        return f64::INFINITY;
    }
    let mut lp = Problem::new(OptimizationDirection::Maximize);
    let t = lp.add_var(1.0, (f64::NEG_INFINITY, f64::INFINITY));
    let lambdas: Vec<_> = points.iter().map(|_| lp.add_var(0.0, (0.0, f64::INFINITY))).collect();
    for &d in &dims {
        let mut e = LinearExpr::empty();
        for (l, p) in lambdas.iter().zip(points) {
            if p[d] != 0.0 {
                e.add(*l, p[d]);
            }
        }
        e.add(t, -1.0);
        lp.add_constraint(e, ComparisonOp::Ge, x[d]);
    }
    let mut total = LinearExpr::empty();
    for l in &lambdas {
        total.add(*l, 1.0);
    }
    lp.add_constraint(total, ComparisonOp::Le, 1.0);
    match lp.solve() {
        Ok(SolveOutcome::Solution(sol)) => sol.objective(),
        _ => f64::NEG_INFINITY,
    }
}

/// Total strict improvement over `x` achievable by a hull combination of `others`.
fn domination_gain(others: &[[f64; 3]], x: [f64; 3], dims: &[usize]) -> f64 {
    if others.is_empty() {
        return 0.0;
    }
    let mut lp = Problem::new(OptimizationDirection::Maximize);
    let slacks: Vec<_> = dims.iter().map(|_| lp.add_var(1.0, (0.0, f64::INFINITY))).collect();
    let lambdas: Vec<_> = others.iter().map(|_| lp.add_var(0.0, (0.0, f64::INFINITY))).collect();
    for (k, &d) in dims.iter().enumerate() {
        let mut e = LinearExpr::empty();
        for (l, p) in lambdas.iter().zip(others) {
            if p[d] != 0.0 {
                e.add(*l, p[d]);
            }
        }
        e.add(slacks[k], -1.0);
        lp.add_constraint(e, ComparisonOp::Ge, x[d]);
    }
    let mut total = LinearExpr::empty();
    for l in &lambdas {
        total.add(*l, 1.0);
    }
    lp.add_constraint(total, ComparisonOp::Le, 1.0);
    match lp.solve() {
        Ok(SolveOutcome::Solution(sol)) => sol.objective(),
        _ => 0.0,
    }
}

/// Removes points weakly dominated by another point. Duplicates keep the first.
fn discrete_pareto(mut pts: Vec<(usize, [f64; 3])>) -> Vec<(usize, [f64; 3])> {
    // descending lexicographic order: no later point can dominate an earlier one
    pts.sort_by(|a, b| {
        b.1[0]
            .total_cmp(&a.1[0])
            .then(b.1[1].total_cmp(&a.1[1]))
            .then(b.1[2].total_cmp(&a.1[2]))
            .then(a.0.cmp(&b.0))
    });
    // staircase of kept (y, z): z is decreasing in y
    let mut stairs: BTreeMap<u64, f64> = BTreeMap::new();
    let key = |y: f64| (y + 0.0).to_bits();
    let mut kept = Vec::new();
    for (i, p) in pts {
        let (y, z) = (p[1], p[2]);
        if stairs.range(key(y)..).next().is_some_and(|(_, &zz)| zz >= z) {
            continue;
        }
        let covered: Vec<u64> = stairs
            .range(..=key(y))
            .rev()
            .take_while(|(_, &zz)| zz <= z)
            .map(|(k, _)| *k)
            .collect();
        for k in covered {
            stairs.remove(&k);
        }
        stairs.insert(key(y), z);
        kept.push((i, p));
    }
    kept
}

/// Upper concave chain of a 2D staircase stored in coordinates 1 and 2.
fn chain_2d(mut pts: Vec<(usize, [f64; 3])>) -> Vec<(usize, [f64; 3])> {
    pts.sort_by(|a, b| a.1[1].total_cmp(&b.1[1]));
    let mut hull: Vec<(usize, [f64; 3])> = Vec::new();
    for p in pts {
        while hull.len() >= 2 {
            let a = hull[hull.len() - 2].1;
            let b = hull[hull.len() - 1].1;
            let cross = (b[1] - a[1]) * (p.1[2] - a[2]) - (b[2] - a[2]) * (p.1[1] - a[1]);
            let scale = (p.1[1] - a[1]).abs().max((p.1[2] - a[2]).abs()).max(1.0);
            if cross >= -HULL_TOL * scale * scale {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    hull
}

/// Weight directions `(a, b, c) / n` with positive integers summing to `n`.
fn probe_directions(n: usize) -> Vec<[f64; 3]> {
    let mut out = Vec::new();
    for a in 1..n {
        for b in 1..(n - a) {
            let c = n - a - b;
            out.push([a as f64, b as f64, c as f64].map(|v| v / n as f64));
        }
    }
    out
}

/// Drops every point that a hull combination of the others strictly improves.
///
/// Candidates are tested against the growing kept set only: first the
/// maximizers of a fan of weighted sums, then the rest by decreasing sum.
/// A last pass rechecks the kept points against each other.
fn prune_3d(front: Vec<(usize, [f64; 3])>, dims: &[usize]) -> Vec<(usize, [f64; 3])> {
    let scale = front.iter().flat_map(|(_, p)| p.iter()).fold(0.0f64, |m, v| m.max(*v));
    let tol = HULL_TOL * scale.max(1.0);
    let mut order: Vec<usize> = Vec::with_capacity(front.len());
    let mut seen = vec![false; front.len()];
    for w in probe_directions(12) {
        let best = (0..front.len())
            .max_by(|&a, &b| {
                let (pa, pb) = (front[a].1, front[b].1);
                let (va, vb) = (w[0] * pa[0] + w[1] * pa[1] + w[2] * pa[2], w[0] * pb[0] + w[1] * pb[1] + w[2] * pb[2]);
                va.total_cmp(&vb).then(b.cmp(&a))
            })
            .expect("front is non-empty");
        if !seen[best] {
            seen[best] = true;
            order.push(best);
        }
    }
    let mut rest: Vec<usize> = (0..front.len()).filter(|i| !seen[*i]).collect();
    rest.sort_by(|&a, &b| {
        let (sa, sb): (f64, f64) = (front[a].1.iter().sum(), front[b].1.iter().sum());
        sb.total_cmp(&sa).then(a.cmp(&b))
    });
    order.extend(rest);

    let mut kept: Vec<(usize, [f64; 3])> = Vec::new();
    for i in order {
        let others: Vec<[f64; 3]> = kept.iter().map(|p| p.1).collect();
        if domination_gain(&others, front[i].1, dims) <= tol {
            kept.push(front[i]);
        }
    }
    let mut k = 0;
    while k < kept.len() {
        let others: Vec<[f64; 3]> = kept.iter().enumerate().filter(|(j, _)| *j != k).map(|(_, p)| p.1).collect();
        if domination_gain(&others, kept[k].1, dims) > tol {
            kept.remove(k);
        } else {
            k += 1;
        }
    }
    kept
}

/// Indices of the points forming the Pareto surface of the hull, ascending.
/// Empty when every point is the origin.
pub(crate) fn pareto_indices(points: &[RegionPoint]) -> Vec<usize> {
    let arrays: Vec<(usize, [f64; 3])> = points
        .iter()
        .enumerate()
        .map(|(i, p)| (i, clamp(p.rates)))
        .filter(|(_, a)| a.iter().any(|v| *v > 0.0))
        .collect();
    if arrays.is_empty() {
        return Vec::new();
    }
    let front = discrete_pareto(arrays);
    let dims: Vec<usize> = (0..3).filter(|&d| front.iter().any(|(_, p)| p[d] > 0.0)).collect();
    let kept = if dims.len() <= 2 {
        let mapped: Vec<(usize, [f64; 3])> = front
            .iter()
            .map(|(i, p)| {
                let mut q = [0.0; 3];
                for (slot, d) in dims.iter().enumerate() {
                    q[slot + 3 - dims.len()] = p[*d];
                }
                (*i, q)
            })
            .collect();
        chain_2d(mapped)
    } else {
        prune_3d(front, &dims)
    };
    let mut idx: Vec<usize> = kept.into_iter().map(|(i, _)| i).collect();
    idx.sort_unstable();
    idx
}

fn pareto_surface(points: Vec<RegionPoint>) -> Vec<RegionPoint> {
    let idx = pareto_indices(&points);
    if idx.is_empty() {
        return vec![RegionPoint::from(RateTriple::origin())];
    }
    idx.into_iter().map(|i| points[i]).collect()
}

/// Pareto surface of `conv(points ∪ {0})`, in input order.
pub fn hull_pareto(points: &[RateTriple]) -> Vec<RateTriple> {
    pareto_surface(points.iter().map(|r| RegionPoint::from(*r)).collect())
        .into_iter()
        .map(|p| p.rates)
        .collect()
}

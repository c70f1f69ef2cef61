//! Exact discrete optimal transport.
//!
//! ```text
//! T_c(mu, nu) = min_{pi in Pi(mu, nu)} sum_ij c_ij pi_ij = max_{f_i + g_j <= c_ij} sum_i mu_i f_i + sum_j nu_j g_j
//! ```
//!
//! Weights are rationalized to multiples of `1e-12` and the transportation
//! problem is solved as a min-cost flow by successive shortest paths.
//! Potentials are read off the optimal residual graph and made exactly
//! feasible by a c-transform, so the reported duality gap is a certificate.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::sample::EmpiricalSample;
use crate::error::{Error, Result};

const SCALE: f64 = 1e12;

#[derive(Debug, Clone, PartialEq)]
pub enum CostKind {
    /// Explicit `m x n` cost matrix. With samples, points are row/column indices.
    Matrix(Vec<Vec<f64>>),
    /// `|x - y|^p` with the Euclidean ground metric.
    MetricPower { p: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct CostSpec {
    pub kind: CostKind,
    /// Upper bound on the cost.
    pub delta: f64,
}

impl CostSpec {
    pub fn matrix(c: Vec<Vec<f64>>) -> Result<Self> {
        let mut delta = 0.0f64;
        for row in &c {
            for &v in row {
                if !(v >= 0.0) || !v.is_finite() {
                    return Err(Error::InvalidArgument("costs must be finite and nonnegative".into()));
                }
                delta = delta.max(v);
            }
        }
        Ok(Self { kind: CostKind::Matrix(c), delta })
    }

    pub fn metric_power(p: f64, delta: f64) -> Result<Self> {
        if !(p > 0.0) {
            return Err(Error::InvalidArgument("cost exponent must be positive".into()));
        }
        Ok(Self { kind: CostKind::MetricPower { p }, delta })
    }

    pub fn eval(&self, a: &[f64], b: &[f64]) -> f64 {
        match &self.kind {
            CostKind::Matrix(c) => c[a[0] as usize][b[0] as usize],
            CostKind::MetricPower { p } => {
                let d: f64 = a.iter().zip(b).map(|(u, v)| (u - v) * (u - v)).sum::<f64>().sqrt();
                d.powf(*p)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OtSolution {
    /// Dual objective at the exact marginals: a certified lower bound that
    /// matches the optimum once the rounded problem shares its optimal basis.
    pub cost: f64,
    /// Cost of `plan`, which is optimal for marginals rounded to `1e-12`.
    pub primal_cost: f64,
    pub plan: Vec<Vec<f64>>,
    pub f: Vec<f64>,
    pub g: Vec<f64>,
    pub dual_value: f64,
    pub duality_gap: f64,
}

fn rationalize(w: &[f64]) -> Vec<i64> {
    let mut v: Vec<i64> = w.iter().map(|&x| (x * SCALE).round() as i64).collect();
    let diff = SCALE as i64 - v.iter().sum::<i64>();
    if let Some(big) = (0..v.len()).max_by_key(|&i| v[i]) {
        v[big] += diff;
    }
    v
}

fn check_weights(w: &[f64]) -> Result<f64> {
    if w.is_empty() {
        return Err(Error::EmptySample);
    }
    if w.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) {
        return Err(Error::InvalidArgument("weights must be finite and nonnegative".into()));
    }
    Ok(w.iter().sum())
}

/// Optimal transport between weighted atoms with cost matrix `c` (`mu.len() x nu.len()`).
pub fn ot_solve(mu: &[f64], nu: &[f64], c: &[Vec<f64>]) -> Result<OtSolution> {
    let (sm, sn) = (check_weights(mu)?, check_weights(nu)?);
    if (sm - 1.0).abs() > 1e-12 || (sn - 1.0).abs() > 1e-12 {
        return Err(Error::UnbalancedMarginals(sm, sn));
    }
    if c.len() != mu.len() {
        return Err(Error::DimensionMismatch { expected: mu.len(), got: c.len() });
    }
    if let Some(row) = c.iter().find(|r| r.len() != nu.len()) {
        return Err(Error::DimensionMismatch { expected: nu.len(), got: row.len() });
    }
    if c.iter().flatten().any(|&v| !(v >= 0.0) || !v.is_finite()) {
        return Err(Error::InvalidArgument("costs must be finite and nonnegative".into()));
    }
    let (m, n) = (mu.len(), nu.len());
    let flow = min_cost_flow(&rationalize(mu), &rationalize(nu), c);
    let plan: Vec<Vec<f64>> = flow.iter().map(|r| r.iter().map(|&v| v as f64 / SCALE).collect()).collect();
    let primal_cost: f64 = (0..m).map(|i| (0..n).map(|j| plan[i][j] * c[i][j]).sum::<f64>()).sum();
    let (f, g) = potentials(&flow, c);
    let dual_value: f64 = mu.iter().zip(&f).map(|(a, b)| a * b).sum::<f64>() + nu.iter().zip(&g).map(|(a, b)| a * b).sum::<f64>();
    Ok(OtSolution { cost: dual_value.max(0.0), primal_cost, plan, f, g, dual_value, duality_gap: primal_cost - dual_value })
}

/// `T_c(mu, nu)` for weights on the atoms indexing a cost matrix.
pub fn ot_cost_discrete(mu: &[f64], nu: &[f64], cost: &CostSpec) -> Result<f64> {
    match &cost.kind {
        CostKind::Matrix(c) => Ok(ot_solve(mu, nu, c)?.cost),
        CostKind::MetricPower { .. } => Err(Error::InvalidArgument(
            "metric costs need support points; use ot_cost_points".into(),
        )),
    }
}

/// Transport between weighted point clouds.
pub fn ot_cost_points(
    x: &EmpiricalSample,
    wx: &[f64],
    y: &EmpiricalSample,
    wy: &[f64],
    cost: &CostSpec,
) -> Result<OtSolution> {
    if x.is_empty() || y.is_empty() {
        return Err(Error::EmptySample);
    }
    let c: Vec<Vec<f64>> = x.points().map(|a| y.points().map(|b| cost.eval(a, b)).collect()).collect();
    ot_solve(wx, wy, &c)
}

/// `T_c(P_t, Q_s)` between two empirical measures.
pub fn ot_cost_samples(x: &EmpiricalSample, y: &EmpiricalSample, cost: &CostSpec) -> Result<f64> {
    let wx = vec![1.0 / x.len().max(1) as f64; x.len()];
    let wy = vec![1.0 / y.len().max(1) as f64; y.len()];
    Ok(ot_cost_points(x, &wx, y, &wy, cost)?.cost)
}

struct Edge {
    to: usize,
    cap: i64,
    cost: f64,
    rev: usize,
}

#[derive(PartialEq)]
struct Item(f64, usize);

impl Eq for Item {}

impl Ord for Item {
    fn cmp(&self, o: &Self) -> Ordering {
        o.0.total_cmp(&self.0).then(o.1.cmp(&self.1))
    }
}

impl PartialOrd for Item {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

fn add_edge(g: &mut [Vec<Edge>], u: usize, v: usize, cap: i64, cost: f64) -> usize {
    let (ru, rv) = (g[v].len(), g[u].len());
    g[u].push(Edge { to: v, cap, cost, rev: ru });
    g[v].push(Edge { to: u, cap: 0, cost: -cost, rev: rv });
    rv
}

/// Successive shortest paths with Johnson potentials; returns the flow matrix.
fn min_cost_flow(a: &[i64], b: &[i64], c: &[Vec<f64>]) -> Vec<Vec<i64>> {
    let (m, n) = (a.len(), b.len());
    let (src, snk) = (m + n, m + n + 1);
    let nodes = m + n + 2;
    let mut g: Vec<Vec<Edge>> = (0..nodes).map(|_| Vec::new()).collect();
    for (i, &ai) in a.iter().enumerate() {
        add_edge(&mut g, src, i, ai, 0.0);
    }
    let mut mid = vec![vec![0usize; n]; m];
    for i in 0..m {
        for j in 0..n {
            mid[i][j] = add_edge(&mut g, i, m + j, i64::MAX / 4, c[i][j]);
        }
    }
    for (j, &bj) in b.iter().enumerate() {
        add_edge(&mut g, m + j, snk, bj, 0.0);
    }
    let total: i64 = a.iter().sum();
    let mut pot = vec![0.0; nodes];
    let mut sent = 0i64;
    let mut dist = vec![f64::INFINITY; nodes];
    let mut prev = vec![(usize::MAX, usize::MAX); nodes];
    let mut done = vec![false; nodes];
    while sent < total {
        dist.iter_mut().for_each(|d| *d = f64::INFINITY);
        done.iter_mut().for_each(|d| *d = false);
        dist[src] = 0.0;
        let mut heap = BinaryHeap::new();
        heap.push(Item(0.0, src));
        while let Some(Item(d, u)) = heap.pop() {
            if done[u] {
                continue;
            }
            done[u] = true;
            for (k, e) in g[u].iter().enumerate() {
                if e.cap <= 0 {
                    continue;
                }
                let nd = d + (e.cost + pot[u] - pot[e.to]).max(0.0);
                if nd < dist[e.to] {
                    dist[e.to] = nd;
                    prev[e.to] = (u, k);
                    heap.push(Item(nd, e.to));
                }
            }
        }
        if !done[snk] {
            break;
        }
        let dt = dist[snk];
        for v in 0..nodes {
            if done[v] {
                pot[v] += dist[v].min(dt);
            } else {
                pot[v] += dt;
            }
        }
        let mut push = total - sent;
        let mut v = snk;
        while v != src {
            let (u, k) = prev[v];
            push = push.min(g[u][k].cap);
            v = u;
        }
        let mut v = snk;
        while v != src {
            let (u, k) = prev[v];
            g[u][k].cap -= push;
            let r = g[u][k].rev;
            g[v][r].cap += push;
            v = u;
        }
        sent += push;
    }
    let mut flow = vec![vec![0i64; n]; m];
    for i in 0..m {
        for j in 0..n {
            let e = &g[i][mid[i][j]];
            flow[i][j] = g[e.to][e.rev].cap;
        }
    }
    flow
}

/// Shortest-path potentials on the optimal residual graph, then a c-transform.
fn potentials(flow: &[Vec<i64>], c: &[Vec<f64>]) -> (Vec<f64>, Vec<f64>) {
    let (m, n) = (flow.len(), flow[0].len());
    let scale = c.iter().flatten().fold(1.0f64, |a, &b| a.max(b));
    let eps = 1e-14 * scale;
    // d over rows (0..m) and columns (m..m+n); forward i->j costs c_ij, backward j->i costs -c_ij when flow > 0
    let mut d = vec![0.0f64; m + n];
    for _ in 0..=(m + n) {
        let mut changed = false;
        for i in 0..m {
            for j in 0..n {
                if d[i] + c[i][j] < d[m + j] - eps {
                    d[m + j] = d[i] + c[i][j];
                    changed = true;
                }
                if flow[i][j] > 0 && d[m + j] - c[i][j] < d[i] - eps {
                    d[i] = d[m + j] - c[i][j];
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    let f: Vec<f64> = (0..m).map(|i| -d[i]).collect();
    let g: Vec<f64> = (0..n).map(|j| (0..m).map(|i| c[i][j] - f[i]).fold(f64::INFINITY, f64::min)).collect();
    (f, g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn perms(n: usize) -> Vec<Vec<usize>> {
        if n == 0 {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for p in perms(n - 1) {
            for pos in 0..=p.len() {
                let mut q = p.clone();
                q.insert(pos, n - 1);
                out.push(q);
            }
        }
        out
    }

    #[test]
    fn point_masses() {
        let c = CostSpec::matrix(vec![vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        assert!((ot_cost_discrete(&[1.0, 0.0], &[0.0, 1.0], &c).unwrap() - 1.0).abs() < 1e-15);
        let s = ot_solve(&[0.3, 0.7], &[0.3, 0.7], &[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        assert!(s.cost.abs() < 1e-15);
        assert!((s.plan[0][0] - 0.3).abs() < 1e-15 && s.plan[0][1] == 0.0);
    }

    #[test]
    fn matches_permutation_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let all = perms(5);
        assert_eq!(all.len(), 120);
        for _ in 0..50 {
            let c: Vec<Vec<f64>> = (0..5).map(|_| (0..5).map(|_| rng.random::<f64>()).collect()).collect();
            let w = [0.2; 5];
            let s = ot_solve(&w, &w, &c).unwrap();
            let best = all.iter().map(|p| p.iter().enumerate().map(|(i, &j)| c[i][j]).sum::<f64>() / 5.0).fold(f64::INFINITY, f64::min);
            assert!((s.cost - best).abs() < 1e-9, "{} {}", s.cost, best);
            assert!(s.duality_gap.abs() < 1e-9);
            for (i, row) in c.iter().enumerate() {
                for (j, &cij) in row.iter().enumerate() {
                    assert!(s.f[i] + s.g[j] <= cij + 1e-15);
                }
            }
        }
    }

    #[test]
    fn duality_gap_and_relabeling() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..30 {
            let (m, n) = (rng.random_range(1..7), rng.random_range(1..7));
            let mut mu: Vec<f64> = (0..m).map(|_| rng.random::<f64>()).collect();
            let mut nu: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
            let (zm, zn): (f64, f64) = (mu.iter().sum(), nu.iter().sum());
            mu.iter_mut().for_each(|v| *v /= zm);
            nu.iter_mut().for_each(|v| *v /= zn);
            let c: Vec<Vec<f64>> = (0..m).map(|_| (0..n).map(|_| 3.0 * rng.random::<f64>()).collect()).collect();
            let s = ot_solve(&mu, &nu, &c).unwrap();
            assert!(s.duality_gap.abs() <= 1e-9 * 3.0, "{}", s.duality_gap);
            let rev_mu: Vec<f64> = mu.iter().rev().copied().collect();
            let rev_c: Vec<Vec<f64>> = c.iter().rev().cloned().collect();
            let r = ot_solve(&rev_mu, &nu, &rev_c).unwrap();
            assert!((r.cost - s.cost).abs() < 1e-10);
            for (i, row) in s.plan.iter().enumerate() {
                assert!((row.iter().sum::<f64>() - mu[i]).abs() < 1e-11);
            }
        }
    }

    #[test]
    fn unbalanced_rejected() {
        let c = vec![vec![0.0, 1.0], vec![1.0, 0.0]];
        assert!(matches!(ot_solve(&[0.5, 0.6], &[0.5, 0.5], &c), Err(Error::UnbalancedMarginals(..))));
    }

    #[test]
    fn samples_on_the_line() {
        let cost = CostSpec::metric_power(1.0, 10.0).unwrap();
        let x = EmpiricalSample::from_scalars(vec![0.0, 1.0]);
        let y = EmpiricalSample::from_scalars(vec![0.5]);
        assert!((ot_cost_samples(&x, &y, &cost).unwrap() - 0.5).abs() < 1e-12);
        let y = EmpiricalSample::from_scalars(vec![2.0, 3.0]);
        assert!((ot_cost_samples(&x, &y, &cost).unwrap() - 2.0).abs() < 1e-12);
    }
}

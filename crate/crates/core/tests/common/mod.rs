//! Independent oracles and random instance generators shared by the
//! integration tests. Nothing here calls into the code paths it checks:
//! link costs, path sums and flows are recomputed from scratch.

#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::Rng;
use wasn_deploy::{NodeDeployment, NormalizedFlowMatrix, PhysicalParams, Point};

pub fn random_deployment(rng: &mut impl Rng, n: usize, m: usize, side: f64) -> NodeDeployment {
    let mut pt = || Point::new(rng.gen_range(0.0..side), rng.gen_range(0.0..side));
    let sensors = (0..n).map(|_| pt()).collect();
    let fcs = (0..m).map(|_| pt()).collect();
    NodeDeployment::new(sensors, fcs).unwrap()
}

/// Random valid normalized flow matrix: sensors are ranked by a random
/// permutation and may only forward to higher-ranked sensors or to FCs.
/// Roughly a third of the rows are single-successor.
pub fn random_dag(rng: &mut impl Rng, n: usize, m: usize) -> NormalizedFlowMatrix {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut rank = vec![0; n];
    for (r, &i) in order.iter().enumerate() {
        rank[i] = r;
    }
    let cols = n + m;
    let mut rows = vec![vec![0.0; cols]; n];
    for i in 0..n {
        let allowed: Vec<usize> = (0..cols).filter(|&j| j >= n || rank[j] > rank[i]).collect();
        let k = if rng.gen_bool(0.35) { 1 } else { rng.gen_range(1..=allowed.len().min(4)) };
        let chosen: Vec<usize> = allowed.choose_multiple(rng, k).copied().collect();
        let weights: Vec<f64> = chosen.iter().map(|_| rng.gen_range(0.05..1.0)).collect();
        let total: f64 = weights.iter().sum();
        for (&j, w) in chosen.iter().zip(&weights) {
            rows[i][j] = w / total;
        }
        // absorb rounding so the row sums to one within the validator's tolerance
        let sum: f64 = rows[i].iter().sum();
        rows[i][chosen[0]] += 1.0 - sum;
    }
    NormalizedFlowMatrix::from_rows(m, &rows).unwrap()
}

pub fn oracle_link_cost(p: &NodeDeployment, i: usize, j: usize, params: &PhysicalParams) -> f64 {
    let (a, b) = (p.position(i), p.position(j));
    let d2 = (a.x - b.x).powi(2) + (a.y - b.y).powi(2);
    params.beta * d2 + if j < p.n_sensors() { params.rho } else { 0.0 }
}

/// Ratio-weighted path cost summed over every path out of `i`.
pub fn oracle_path_aggregate(s: &NormalizedFlowMatrix, p: &NodeDeployment, i: usize, params: &PhysicalParams) -> f64 {
    fn walk(s: &NormalizedFlowMatrix, p: &NodeDeployment, at: usize, ratio: f64, cost: f64, params: &PhysicalParams) -> f64 {
        if at >= s.n_sensors() {
            return ratio * cost;
        }
        (0..s.n_nodes())
            .filter(|&j| s.get(at, j) > 1e-12)
            .map(|j| walk(s, p, j, ratio * s.get(at, j), cost + oracle_link_cost(p, at, j, params), params))
            .sum()
    }
    walk(s, p, i, 1.0, 0.0, params)
}

/// Cheapest simple path from sensor `i` to any FC, by exhaustive search.
pub fn oracle_min_path_cost(p: &NodeDeployment, i: usize, params: &PhysicalParams) -> f64 {
    fn walk(p: &NodeDeployment, at: usize, visited: &mut Vec<bool>, cost: f64, params: &PhysicalParams, best: &mut f64) {
        for j in 0..p.n_nodes() {
            if j == at || visited[j] {
                continue;
            }
            let c = cost + oracle_link_cost(p, at, j, params);
            if j >= p.n_sensors() {
                *best = best.min(c);
            } else {
                visited[j] = true;
                walk(p, j, visited, c, params, best);
                visited[j] = false;
            }
        }
    }
    let mut visited = vec![false; p.n_nodes()];
    visited[i] = true;
    let mut best = f64::INFINITY;
    walk(p, i, &mut visited, 0.0, params, &mut best);
    best
}

/// Every acyclic successor assignment (tree routing) of the sensors.
pub fn all_tree_routings(n: usize, m: usize) -> Vec<Vec<usize>> {
    let nodes = n + m;
    let mut out = Vec::new();
    let mut succ = vec![0usize; n];
    fn acyclic(succ: &[usize]) -> bool {
        let n = succ.len();
        (0..n).all(|start| {
            let mut cur = start;
            for _ in 0..=n {
                if cur >= n {
                    return true;
                }
                cur = succ[cur];
            }
            false
        })
    }
    fn rec(k: usize, n: usize, nodes: usize, succ: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k == n {
            if acyclic(succ) {
                out.push(succ.clone());
            }
            return;
        }
        for j in (0..nodes).filter(|&j| j != k) {
            succ[k] = j;
            rec(k + 1, n, nodes, succ, out);
        }
    }
    rec(0, n, nodes, &mut succ, &mut out);
    out
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

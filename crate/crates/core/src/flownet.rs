//! Normalized flow matrices, flow propagation and power coefficients.
//!
//! A normalized flow matrix `S` is `N x (N+M)`: row `i` holds the fraction
//! of sensor `i`'s outgoing data sent to each node. Valid matrices are
//! row-stochastic and acyclic over sensor-to-sensor links, so data always
//! drains into the fusion centers.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::{Error, Result};
use crate::geometry::NodeDeployment;
use crate::routing::{link_cost, PhysicalParams};

/// Ratios at or below this are structurally zero.
pub const ZERO_TOL: f64 = 1e-12;

const ROW_SUM_TOL: f64 = 1e-12;

/// Default cap on the number of enumerated paths.
pub const DEFAULT_PATH_CAP: usize = 1_000_000;

#[inline]
fn active(s: f64) -> bool {
    s > ZERO_TOL
}

/// First violated property of a normalized flow matrix.
#[derive(Clone, Debug, PartialEq, Error)]
pub enum FlowViolation {
    #[error("matrix is not {rows}x{cols}")]
    Shape { rows: usize, cols: usize },
    #[error("ratio s[{row}][{col}] = {value} is outside [0, 1]")]
    OutOfRange { row: usize, col: usize, value: f64 },
    #[error("row {row} sums to {sum}, not 1")]
    RowSum { row: usize, sum: f64 },
    #[error("sensor {sensor} routes to itself")]
    SelfLoop { sensor: usize },
    #[error("sensor links form a cycle through {nodes:?}")]
    Cycle { nodes: Vec<usize> },
}

/// Per-node forwarding ratios.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormalizedFlowMatrix {
    n_sensors: usize,
    n_fcs: usize,
    s: Vec<f64>,
}

impl NormalizedFlowMatrix {
    /// Row-major `n_sensors x (n_sensors + n_fcs)` ratios. Only the shape is
    /// checked here; see [`validate`].
    pub fn new(n_sensors: usize, n_fcs: usize, s: Vec<f64>) -> Result<Self> {
        if s.len() != n_sensors * (n_sensors + n_fcs) {
            return Err(FlowViolation::Shape { rows: n_sensors, cols: n_sensors + n_fcs }.into());
        }
        Ok(Self { n_sensors, n_fcs, s })
    }

    pub fn from_rows(n_fcs: usize, rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n + n_fcs) {
            return Err(FlowViolation::Shape { rows: n, cols: n + n_fcs }.into());
        }
        Self::new(n, n_fcs, rows.concat())
    }

    /// Tree routing: sensor `i` forwards everything to `successors[i]`.
    pub fn from_successors(n_fcs: usize, successors: &[usize]) -> Result<Self> {
        let n = successors.len();
        let cols = n + n_fcs;
        let mut s = vec![0.0; n * cols];
        for (i, &j) in successors.iter().enumerate() {
            if j >= cols {
                return Err(Error::InvalidLink { from: i, to: j });
            }
            s[i * cols + j] = 1.0;
        }
        Self::new(n, n_fcs, s)
    }

    pub fn n_sensors(&self) -> usize {
        self.n_sensors
    }

    pub fn n_fcs(&self) -> usize {
        self.n_fcs
    }

    pub fn n_nodes(&self) -> usize {
        self.n_sensors + self.n_fcs
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.s[i * self.n_nodes() + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let cols = self.n_nodes();
        &self.s[i * cols..(i + 1) * cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.s
    }

    /// Structurally positive successors of sensor `i`.
    pub fn successors(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.row(i).iter().copied().enumerate().filter(|&(_, s)| active(s))
    }

    /// The unique successor of every sensor, if this is a 0/1 tree routing.
    pub fn tree_successors(&self) -> Result<Vec<usize>> {
        (0..self.n_sensors)
            .map(|i| {
                let succ: Vec<_> = self.successors(i).collect();
                match succ.as_slice() {
                    [(j, s)] if (s - 1.0).abs() <= ROW_SUM_TOL => Ok(*j),
                    _ => Err(Error::NotATree { sensor: i, successors: succ.len() }),
                }
            })
            .collect()
    }

    fn check_shape(&self, deployment: &NodeDeployment) -> Result<()> {
        if deployment.n_sensors() != self.n_sensors || deployment.n_fcs() != self.n_fcs {
            return Err(Error::Dimension(format!(
                "routing is for {}+{} nodes, deployment has {}+{}",
                self.n_sensors,
                self.n_fcs,
                deployment.n_sensors(),
                deployment.n_fcs()
            )));
        }
        Ok(())
    }
}

/// Checks the ratio range, row sums and acyclicity, in that order.
pub fn validate(s: &NormalizedFlowMatrix) -> Result<(), FlowViolation> {
    let cols = s.n_nodes();
    for i in 0..s.n_sensors {
        for j in 0..cols {
            let value = s.get(i, j);
            if !(0.0..=1.0).contains(&value) {
                return Err(FlowViolation::OutOfRange { row: i, col: j, value });
            }
        }
    }
    for i in 0..s.n_sensors {
        let sum: f64 = s.row(i).iter().sum();
        if (sum - 1.0).abs() > ROW_SUM_TOL {
            return Err(FlowViolation::RowSum { row: i, sum });
        }
    }
    if let Some(i) = (0..s.n_sensors).find(|&i| active(s.get(i, i))) {
        return Err(FlowViolation::SelfLoop { sensor: i });
    }
    topological_order(s).map(|_| ())
}

/// Kahn order of the sensors along positive sensor-to-sensor links, lowest
/// index first among ready sensors.
pub fn topological_order(s: &NormalizedFlowMatrix) -> Result<Vec<usize>, FlowViolation> {
    let n = s.n_sensors;
    let mut indegree = vec![0usize; n];
    for i in 0..n {
        for (j, _) in s.successors(i).filter(|&(j, _)| j < n) {
            indegree[j] += 1;
        }
    }
    let mut ready: BinaryHeap<Reverse<usize>> =
        (0..n).filter(|&i| indegree[i] == 0).map(Reverse).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(Reverse(i)) = ready.pop() {
        order.push(i);
        for (j, _) in s.successors(i).filter(|&(j, _)| j < n) {
            indegree[j] -= 1;
            if indegree[j] == 0 {
                ready.push(Reverse(j));
            }
        }
    }
    if order.len() == n {
        Ok(order)
    } else {
        Err(FlowViolation::Cycle { nodes: find_cycle(s, &indegree) })
    }
}

/// Extracts a cycle among the sensors Kahn could not drain. Each of them
/// still has an undrained predecessor, so walking predecessors must revisit
/// a node.
fn find_cycle(s: &NormalizedFlowMatrix, indegree: &[usize]) -> Vec<usize> {
    let n = s.n_sensors;
    let stuck = |i: usize| indegree[i] > 0;
    let Some(start) = (0..n).find(|&i| stuck(i)) else {
        return Vec::new();
    };
    let mut seen = vec![usize::MAX; n];
    let mut walk = Vec::new();
    let mut cur = start;
    while seen[cur] == usize::MAX {
        seen[cur] = walk.len();
        walk.push(cur);
        cur = (0..n)
            .find(|&p| stuck(p) && active(s.get(p, cur)))
            .expect("undrained sensor has an undrained predecessor");
    }
    let mut cycle = walk.split_off(seen[cur]);
    cycle.reverse();
    let lowest = (0..cycle.len()).min_by_key(|&k| cycle[k]).unwrap_or(0);
    cycle.rotate_left(lowest);
    cycle
}

/// Absolute data rates per link.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowMatrix {
    n_sensors: usize,
    n_fcs: usize,
    f: Vec<f64>,
}

impl FlowMatrix {
    pub fn new(n_sensors: usize, n_fcs: usize, f: Vec<f64>) -> Result<Self> {
        if f.len() != n_sensors * (n_sensors + n_fcs) {
            return Err(Error::Dimension(format!(
                "{} flow entries for a {n_sensors}x{} matrix",
                f.len(),
                n_sensors + n_fcs
            )));
        }
        if let Some(k) = f.iter().position(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::Dimension(format!("flow entry {k} is negative or not finite")));
        }
        Ok(Self { n_sensors, n_fcs, f })
    }

    pub fn zeros(n_sensors: usize, n_fcs: usize) -> Self {
        Self { n_sensors, n_fcs, f: vec![0.0; n_sensors * (n_sensors + n_fcs)] }
    }

    pub fn n_sensors(&self) -> usize {
        self.n_sensors
    }

    pub fn n_fcs(&self) -> usize {
        self.n_fcs
    }

    pub fn n_nodes(&self) -> usize {
        self.n_sensors + self.n_fcs
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.f[i * self.n_nodes() + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let cols = self.n_nodes();
        &self.f[i * cols..(i + 1) * cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.f
    }

    /// Total flow leaving sensor `i`.
    pub fn outflow(&self, i: usize) -> f64 {
        if i < self.n_sensors {
            self.row(i).iter().sum()
        } else {
            0.0
        }
    }

    /// Total flow entering node `j` (from sensors; FCs never transmit).
    pub fn inflow(&self, j: usize) -> f64 {
        (0..self.n_sensors).map(|i| self.get(i, j)).sum()
    }

    /// Positive links as `(from, to, rate)`.
    pub fn links(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let cols = self.n_nodes();
        self.f
            .iter()
            .enumerate()
            .filter(|(_, &v)| v > 0.0)
            .map(move |(k, &v)| (k / cols, k % cols, v))
    }
}

/// Pushes the generated rates `gamma` through `s` in topological order.
pub fn propagate_flows(s: &NormalizedFlowMatrix, gamma: &[f64]) -> Result<FlowMatrix> {
    validate(s)?;
    let n = s.n_sensors;
    if gamma.len() != n {
        return Err(Error::Dimension(format!("{} rates for {n} sensors", gamma.len())));
    }
    if let Some(k) = gamma.iter().position(|g| !(g.is_finite() && *g >= 0.0)) {
        return Err(Error::Dimension(format!("rate of sensor {k} is negative or not finite")));
    }
    let cols = s.n_nodes();
    let mut total: Vec<f64> = gamma.to_vec();
    let mut f = vec![0.0; n * cols];
    for i in topological_order(s)? {
        let out = total[i];
        for (j, ratio) in s.successors(i) {
            let rate = ratio * out;
            f[i * cols + j] = rate;
            if j < n {
                total[j] += rate;
            }
        }
    }
    FlowMatrix::new(n, s.n_fcs, f)
}

/// Energy per bit to deliver each sensor's data to the fusion centers.
///
/// Independent of the cell partition: only positions and ratios enter.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerCoefficients(pub Vec<f64>);

impl PowerCoefficients {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// `g_i = sum_j s_ij (e_ij + g_j)` evaluated in reverse topological order,
/// with `g = 0` at fusion centers.
pub fn power_coefficients(
    deployment: &NodeDeployment,
    s: &NormalizedFlowMatrix,
    params: &PhysicalParams,
) -> Result<PowerCoefficients> {
    validate(s)?;
    s.check_shape(deployment)?;
    let n = s.n_sensors;
    let mut g = vec![0.0; n];
    for &i in topological_order(s)?.iter().rev() {
        g[i] = s
            .successors(i)
            .map(|(j, ratio)| {
                let downstream = if j < n { g[j] } else { 0.0 };
                Ok(ratio * (link_cost(deployment, i, j, params)? + downstream))
            })
            .sum::<Result<f64>>()?;
    }
    Ok(PowerCoefficients(g))
}

/// One sensor-to-FC path with its ratio product and summed link cost.
#[derive(Clone, Debug, PartialEq)]
pub struct RoutePath {
    /// Node sequence, starting at the sensor and ending at a fusion center.
    pub nodes: Vec<usize>,
    /// Fraction of the sensor's outflow that travels along this path.
    pub ratio: f64,
    /// Energy per bit along the path.
    pub cost: f64,
}

impl RoutePath {
    pub fn hops(&self) -> usize {
        self.nodes.len() - 1
    }
}

/// Every positive-ratio path from one sensor to the fusion centers.
#[derive(Clone, Debug, PartialEq)]
pub struct PathSet {
    pub sensor: usize,
    pub paths: Vec<RoutePath>,
}

impl PathSet {
    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    /// Ratio-weighted path cost, i.e. the sensor's power coefficient.
    pub fn aggregate_cost(&self) -> f64 {
        self.paths.iter().map(|p| p.ratio * p.cost).sum()
    }

    pub fn total_ratio(&self) -> f64 {
        self.paths.iter().map(|p| p.ratio).sum()
    }
}

/// Depth-first enumeration of all paths out of `sensor`. The number of
/// paths can be exponential, so more than `cap` paths is an error.
pub fn enumerate_paths(
    s: &NormalizedFlowMatrix,
    deployment: &NodeDeployment,
    sensor: usize,
    params: &PhysicalParams,
    cap: usize,
) -> Result<PathSet> {
    validate(s)?;
    s.check_shape(deployment)?;
    if sensor >= s.n_sensors {
        return Err(Error::InvalidLink { from: sensor, to: sensor });
    }

    struct Walk<'a> {
        s: &'a NormalizedFlowMatrix,
        deployment: &'a NodeDeployment,
        params: &'a PhysicalParams,
        cap: usize,
        nodes: Vec<usize>,
        paths: Vec<RoutePath>,
    }

    impl Walk<'_> {
        fn visit(&mut self, ratio: f64, cost: f64) -> Result<()> {
            let here = *self.nodes.last().unwrap();
            if here >= self.s.n_sensors {
                if self.paths.len() == self.cap {
                    return Err(Error::PathOverflow { cap: self.cap });
                }
                self.paths.push(RoutePath { nodes: self.nodes.clone(), ratio, cost });
                return Ok(());
            }
            let next: Vec<_> = self.s.successors(here).collect();
            for (j, r) in next {
                let e = link_cost(self.deployment, here, j, self.params)?;
                self.nodes.push(j);
                self.visit(ratio * r, cost + e)?;
                self.nodes.pop();
            }
            Ok(())
        }
    }

    let mut walk = Walk { s, deployment, params, cap, nodes: vec![sensor], paths: Vec::new() };
    walk.visit(1.0, 0.0)?;
    Ok(PathSet { sensor, paths: walk.paths })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point;
    use approx::assert_relative_eq;

    fn example_s() -> NormalizedFlowMatrix {
        NormalizedFlowMatrix::from_rows(
            1,
            &[
                vec![0.0, 0.5, 0.5, 0.0],
                vec![0.0, 0.0, 0.4, 0.6],
                vec![0.0, 0.0, 0.0, 1.0],
            ],
        )
        .unwrap()
    }

    fn example_p() -> NodeDeployment {
        NodeDeployment::new(
            vec![Point::new(0.0, 0.0), Point::new(0.0, 1.0), Point::new(1.0, 0.0)],
            vec![Point::new(1.0, 1.0)],
        )
        .unwrap()
    }

    fn unit_params() -> PhysicalParams {
        PhysicalParams::new(1.0, 1.0, 1.0).unwrap()
    }

    #[test]
    fn example_matrix_is_valid() {
        assert_eq!(validate(&example_s()), Ok(()));
        assert_eq!(topological_order(&example_s()).unwrap(), vec![0, 1, 2]);
    }

    #[test]
    fn row_sum_violation() {
        let s = NormalizedFlowMatrix::from_rows(1, &[vec![0.0, 0.0, 1.0], vec![0.0, 0.0, 0.9]]).unwrap();
        assert_eq!(validate(&s), Err(FlowViolation::RowSum { row: 1, sum: 0.9 }));
    }

    #[test]
    fn range_violation() {
        let s = NormalizedFlowMatrix::from_rows(1, &[vec![1.5, -0.5]]).unwrap();
        assert!(matches!(validate(&s), Err(FlowViolation::OutOfRange { row: 0, col: 0, .. })));
    }

    #[test]
    fn two_cycle_is_named() {
        let s = NormalizedFlowMatrix::from_rows(
            1,
            &[vec![0.0, 0.0, 0.5, 0.5], vec![0.0, 0.0, 1.0, 0.0], vec![0.0, 0.5, 0.0, 0.5]],
        )
        .unwrap();
        assert_eq!(validate(&s), Err(FlowViolation::Cycle { nodes: vec![1, 2] }));
        assert!(propagate_flows(&s, &[1.0, 1.0, 1.0]).is_err());
    }

    #[test]
    fn self_routing_placeholder_is_invalid() {
        let s = NormalizedFlowMatrix::from_rows(1, &[vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]])
            .unwrap();
        assert_eq!(validate(&s), Err(FlowViolation::SelfLoop { sensor: 0 }));
    }

    #[test]
    fn example_flows() {
        let f = propagate_flows(&example_s(), &[1.0, 1.0, 2.0]).unwrap();
        let expect = [(0, 1, 0.5), (0, 2, 0.5), (1, 2, 0.6), (1, 3, 0.9), (2, 3, 3.1)];
        for (i, j, v) in expect {
            assert!((f.get(i, j) - v).abs() <= 1e-12, "F[{i}][{j}] = {}", f.get(i, j));
        }
        assert_eq!(f.links().count(), 5);
    }

    #[test]
    fn single_link_and_zero_rates() {
        let s = NormalizedFlowMatrix::from_successors(1, &[1]).unwrap();
        assert_eq!(propagate_flows(&s, &[7.0]).unwrap().get(0, 1), 7.0);
        let f = propagate_flows(&example_s(), &[0.0; 3]).unwrap();
        assert!(f.as_slice().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn example_power_coefficient() {
        let g = power_coefficients(&example_p(), &example_s(), &unit_params()).unwrap();
        assert_relative_eq!(g.0[0], 3.6, epsilon = 1e-12);
        assert_relative_eq!(g.0[1], 2.2, epsilon = 1e-12);
        assert_relative_eq!(g.0[2], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn single_hop_coefficient_is_beta_d2() {
        let dep = NodeDeployment::new(vec![Point::new(1.0, 2.0)], vec![Point::new(4.0, 6.0)]).unwrap();
        let s = NormalizedFlowMatrix::from_successors(1, &[1]).unwrap();
        let params = PhysicalParams::new(0.5, 3.0, 1.0).unwrap();
        let g = power_coefficients(&dep, &s, &params).unwrap();
        assert_relative_eq!(g.0[0], 0.5 * 25.0, epsilon = 1e-12);
    }

    #[test]
    fn example_paths() {
        let paths = enumerate_paths(&example_s(), &example_p(), 0, &unit_params(), DEFAULT_PATH_CAP)
            .unwrap();
        assert_eq!(paths.len(), 3);
        let mut found: Vec<_> = paths
            .paths
            .iter()
            .map(|p| (p.nodes.clone(), p.ratio, p.cost))
            .collect();
        found.sort_by(|a, b| a.0.len().cmp(&b.0.len()).then(a.0.cmp(&b.0)));
        let expected = [
            (vec![0, 1, 3], 0.3, 3.0),
            (vec![0, 2, 3], 0.5, 3.0),
            (vec![0, 1, 2, 3], 0.2, 6.0),
        ];
        for ((nodes, ratio, cost), (en, er, ec)) in found.iter().zip(expected) {
            assert_eq!(*nodes, en);
            assert_relative_eq!(*ratio, er, epsilon = 1e-12);
            assert_relative_eq!(*cost, ec, epsilon = 1e-12);
        }
        assert_relative_eq!(paths.total_ratio(), 1.0, epsilon = 1e-12);
        assert_relative_eq!(paths.aggregate_cost(), 3.6, epsilon = 1e-12);
    }

    #[test]
    fn tree_and_direct_paths() {
        let s = NormalizedFlowMatrix::from_successors(1, &[1, 2, 3]).unwrap();
        let p = example_p();
        for i in 0..3 {
            let set = enumerate_paths(&s, &p, i, &unit_params(), 10).unwrap();
            assert_eq!(set.len(), 1);
            assert_eq!(set.paths[0].ratio, 1.0);
            assert_eq!(set.paths[0].nodes.last(), Some(&3));
        }
        let direct = enumerate_paths(&s, &p, 2, &unit_params(), 10).unwrap();
        assert_eq!(direct.paths[0].hops(), 1);
    }

    #[test]
    fn path_cap_overflow() {
        let err = enumerate_paths(&example_s(), &example_p(), 0, &unit_params(), 2).unwrap_err();
        assert!(matches!(err, Error::PathOverflow { cap: 2 }));
    }

    #[test]
    fn coefficients_do_not_depend_on_rates() {
        let s = example_s();
        let g1 = power_coefficients(&example_p(), &s, &unit_params()).unwrap();
        let _ = propagate_flows(&s, &[3.0, 0.0, 9.0]).unwrap();
        let g2 = power_coefficients(&example_p(), &s, &unit_params()).unwrap();
        assert_eq!(g1, g2);
    }

    #[test]
    fn tree_successors() {
        let s = NormalizedFlowMatrix::from_successors(1, &[2, 3, 3]).unwrap();
        assert_eq!(s.tree_successors().unwrap(), vec![2, 3, 3]);
        assert!(matches!(example_s().tree_successors(), Err(Error::NotATree { sensor: 0, successors: 2 })));
    }
}

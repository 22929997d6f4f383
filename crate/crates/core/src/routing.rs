//! Link energy costs and energy-optimal routing.
//!
//! With homogeneous links the per-bit cost of a path depends only on node
//! positions, so the routing that minimizes average power for any set of
//! generation rates sends every sensor's data along its cheapest path to any
//! fusion center. Those paths form a tree, found here by Bellman-Ford
//! relaxation towards a virtual sink attached to every fusion center.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flownet::{topological_order, validate, NormalizedFlowMatrix};
use crate::geometry::NodeDeployment;

/// Only free-space propagation is modeled.
pub const PATH_LOSS_EXPONENT: u32 = 2;

const TIE_TOL: f64 = 1e-12;

/// Aggregate radio constants.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    /// Transmit energy per bit per squared meter.
    pub beta: f64,
    /// Receive energy per bit, charged on sensor receivers only.
    pub rho: f64,
    /// Data rate per unit of probability mass covered.
    pub kappa: f64,
}

impl PhysicalParams {
    pub fn new(beta: f64, rho: f64, kappa: f64) -> Result<Self> {
        let params = Self { beta, rho, kappa };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta.is_finite() && self.beta > 0.0) {
            return Err(Error::InvalidParams(format!("beta must be > 0, got {}", self.beta)));
        }
        if !(self.rho.is_finite() && self.rho >= 0.0) {
            return Err(Error::InvalidParams(format!("rho must be >= 0, got {}", self.rho)));
        }
        if !(self.kappa.is_finite() && self.kappa > 0.0) {
            return Err(Error::InvalidParams(format!("kappa must be > 0, got {}", self.kappa)));
        }
        Ok(())
    }
}

impl Default for PhysicalParams {
    fn default() -> Self {
        Self { beta: 1.0, rho: 0.1, kappa: 1.0 }
    }
}

/// Energy per bit on link `i -> j`: `beta * d^2`, plus `rho` when the
/// receiver is a sensor.
pub fn link_cost(deployment: &NodeDeployment, i: usize, j: usize, params: &PhysicalParams) -> Result<f64> {
    if i == j || !deployment.is_sensor(i) || j >= deployment.n_nodes() {
        return Err(Error::InvalidLink { from: i, to: j });
    }
    Ok(unchecked_link_cost(deployment, i, j, params))
}

#[inline]
fn unchecked_link_cost(deployment: &NodeDeployment, i: usize, j: usize, params: &PhysicalParams) -> f64 {
    let tx = params.beta * deployment.position(i).dist2(deployment.position(j));
    if deployment.is_sensor(j) {
        tx + params.rho
    } else {
        tx
    }
}

/// Cheapest path cost of every sensor and the successor that realizes it.
#[derive(Clone, Debug, PartialEq)]
pub struct ShortestPaths {
    pub cost: Vec<f64>,
    pub successor: Vec<usize>,
}

/// Bellman-Ford over the complete digraph out of the sensors.
///
/// Among successors whose path cost ties with the optimum, the lowest node
/// index wins, provided it is a fusion center or strictly closer (in path
/// cost) to the sink; the latter condition keeps zero-cost sensor links
/// from closing a cycle.
pub fn shortest_paths(deployment: &NodeDeployment, params: &PhysicalParams) -> ShortestPaths {
    let n = deployment.n_sensors();
    let nodes = deployment.n_nodes();
    let links: Vec<f64> = (0..n)
        .flat_map(|i| (0..nodes).map(move |j| (i, j)))
        .map(|(i, j)| if i == j { f64::INFINITY } else { unchecked_link_cost(deployment, i, j, params) })
        .collect();
    let e = |i: usize, j: usize| links[i * nodes + j];

    let mut dist: Vec<f64> = (0..nodes).map(|j| if j < n { f64::INFINITY } else { 0.0 }).collect();
    let mut parent = vec![usize::MAX; n];
    for _ in 0..nodes.saturating_sub(1) {
        let mut changed = false;
        for i in 0..n {
            for j in 0..nodes {
                let cand = e(i, j) + dist[j];
                if cand < dist[i] {
                    dist[i] = cand;
                    parent[i] = j;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }

    let successor = (0..n)
        .map(|i| {
            let slack = TIE_TOL * dist[i].abs().max(f64::MIN_POSITIVE);
            (0..nodes)
                .find(|&j| (j >= n || dist[j] < dist[i]) && e(i, j) + dist[j] <= dist[i] + slack)
                .unwrap_or(parent[i])
        })
        .collect();
    dist.truncate(n);
    ShortestPaths { cost: dist, successor }
}

/// Energy-optimal tree routing as a 0/1 normalized flow matrix.
pub fn bellman_ford_routing(deployment: &NodeDeployment, params: &PhysicalParams) -> NormalizedFlowMatrix {
    let paths = shortest_paths(deployment, params);
    NormalizedFlowMatrix::from_successors(deployment.n_fcs(), &paths.successor)
        .expect("successors index existing nodes")
}

/// Every sensor sends straight to its cheapest fusion center, lowest index
/// on ties. No sensor relays.
pub fn one_hop_routing(deployment: &NodeDeployment, params: &PhysicalParams) -> NormalizedFlowMatrix {
    let n = deployment.n_sensors();
    let successors: Vec<usize> = (0..n)
        .map(|i| {
            (n..deployment.n_nodes())
                .map(|j| (j, unchecked_link_cost(deployment, i, j, params)))
                .fold((usize::MAX, f64::INFINITY), |best, (j, c)| if c < best.1 { (j, c) } else { best })
                .0
        })
        .collect();
    NormalizedFlowMatrix::from_successors(deployment.n_fcs(), &successors)
        .expect("successors index existing nodes")
}

/// Path cost of every sensor under a tree routing.
pub fn route_cost_of(
    s: &NormalizedFlowMatrix,
    deployment: &NodeDeployment,
    params: &PhysicalParams,
) -> Result<Vec<f64>> {
    validate(s)?;
    let successors = s.tree_successors()?;
    let n = s.n_sensors();
    if deployment.n_sensors() != n || deployment.n_fcs() != s.n_fcs() {
        return Err(Error::Dimension("routing and deployment sizes differ".into()));
    }
    let mut cost = vec![0.0; n];
    for &i in topological_order(s)?.iter().rev() {
        let j = successors[i];
        let downstream = if j < n { cost[j] } else { 0.0 };
        cost[i] = link_cost(deployment, i, j, params)? + downstream;
    }
    Ok(cost)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point;
    use approx::assert_relative_eq;

    fn example_p() -> NodeDeployment {
        NodeDeployment::new(
            vec![Point::new(0.0, 0.0), Point::new(0.0, 1.0), Point::new(1.0, 0.0)],
            vec![Point::new(1.0, 1.0)],
        )
        .unwrap()
    }

    fn unit() -> PhysicalParams {
        PhysicalParams::new(1.0, 1.0, 1.0).unwrap()
    }

    #[test]
    fn example_link_costs() {
        let p = example_p();
        assert_eq!(link_cost(&p, 0, 1, &unit()).unwrap(), 2.0);
        assert_eq!(link_cost(&p, 0, 2, &unit()).unwrap(), 2.0);
        assert_eq!(link_cost(&p, 1, 2, &unit()).unwrap(), 3.0);
        assert_eq!(link_cost(&p, 1, 3, &unit()).unwrap(), 1.0);
        assert_eq!(link_cost(&p, 2, 3, &unit()).unwrap(), 1.0);
    }

    #[test]
    fn invalid_links() {
        let p = example_p();
        assert!(link_cost(&p, 1, 1, &unit()).is_err());
        assert!(link_cost(&p, 3, 0, &unit()).is_err());
        assert!(link_cost(&p, 0, 4, &unit()).is_err());
    }

    #[test]
    fn collocated_sensor_and_fc_cost_nothing() {
        let p = NodeDeployment::new(vec![Point::new(2.0, 3.0)], vec![Point::new(2.0, 3.0)]).unwrap();
        assert_eq!(link_cost(&p, 0, 1, &unit()).unwrap(), 0.0);
        let s = bellman_ford_routing(&p, &unit());
        assert_eq!(route_cost_of(&s, &p, &unit()).unwrap(), vec![0.0]);
    }

    #[test]
    fn example_routes() {
        // sensor 0: direct costs 2, via sensor 1 or 2 costs 2 + 1 = 3
        let p = example_p();
        let s = bellman_ford_routing(&p, &unit());
        assert_eq!(s.tree_successors().unwrap(), vec![3, 3, 3]);
        assert_eq!(route_cost_of(&s, &p, &unit()).unwrap(), vec![2.0, 1.0, 1.0]);
        assert_eq!(validate(&s), Ok(()));
    }

    #[test]
    fn single_sensor_goes_to_nearest_fc() {
        let p = NodeDeployment::new(
            vec![Point::new(5.0, 5.0)],
            vec![Point::new(0.0, 0.0), Point::new(6.0, 6.0), Point::new(9.0, 9.0)],
        )
        .unwrap();
        assert_eq!(bellman_ford_routing(&p, &unit()).tree_successors().unwrap(), vec![2]);
        assert_eq!(one_hop_routing(&p, &unit()).tree_successors().unwrap(), vec![2]);
    }

    #[test]
    fn relay_decision_depends_on_receiver_cost() {
        // far sensor at x = 3, near sensor at x = 1, FC at 0:
        // direct 9 vs relay 4 + rho + 1
        let p = NodeDeployment::new(
            vec![Point::new(3.0, 0.0), Point::new(1.0, 0.0)],
            vec![Point::new(0.0, 0.0)],
        )
        .unwrap();
        let cheap = PhysicalParams::new(1.0, 3.9, 1.0).unwrap();
        assert_eq!(bellman_ford_routing(&p, &cheap).tree_successors().unwrap(), vec![1, 2]);
        let costly = PhysicalParams::new(1.0, 4.1, 1.0).unwrap();
        assert_eq!(bellman_ford_routing(&p, &costly).tree_successors().unwrap(), vec![2, 2]);
        let tie = PhysicalParams::new(1.0, 4.0, 1.0).unwrap();
        // 4 + 4 + 1 == 9: lowest successor index wins
        assert_eq!(bellman_ford_routing(&p, &tie).tree_successors().unwrap(), vec![1, 2]);
        let sp = shortest_paths(&p, &cheap);
        assert_relative_eq!(sp.cost[0], 8.9, epsilon = 1e-12);
    }

    #[test]
    fn zero_cost_links_do_not_make_cycles() {
        let pt = Point::new(4.0, 4.0);
        let p = NodeDeployment::new(vec![pt, pt, pt], vec![Point::new(5.0, 4.0)]).unwrap();
        let params = PhysicalParams::new(1.0, 0.0, 1.0).unwrap();
        let s = bellman_ford_routing(&p, &params);
        assert_eq!(validate(&s), Ok(()));
        assert_eq!(route_cost_of(&s, &p, &params).unwrap(), vec![1.0; 3]);
    }

    #[test]
    fn route_cost_rejects_fractional_routing() {
        let s = NormalizedFlowMatrix::from_rows(
            1,
            &[vec![0.0, 0.5, 0.5, 0.0], vec![0.0, 0.0, 0.4, 0.6], vec![0.0, 0.0, 0.0, 1.0]],
        )
        .unwrap();
        assert!(matches!(route_cost_of(&s, &example_p(), &unit()), Err(Error::NotATree { .. })));
    }

    #[test]
    fn params_validation() {
        assert!(PhysicalParams::new(0.0, 0.1, 1.0).is_err());
        assert!(PhysicalParams::new(1.0, -0.1, 1.0).is_err());
        assert!(PhysicalParams::new(1.0, 0.1, 0.0).is_err());
        assert!(PhysicalParams::new(1.0, 0.0, 1.0).is_ok());
    }
}

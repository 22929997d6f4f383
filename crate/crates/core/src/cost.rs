//! Sensing uncertainty, average power and the Lagrangian objective.

use serde::{Deserialize, Serialize};

use crate::density::{cell_moments, DensityGrid};
use crate::flownet::FlowMatrix;
use crate::geometry::NodeDeployment;
use crate::partition::CellAssignment;
use crate::routing::PhysicalParams;

/// One evaluation of the objective.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostBreakdown {
    /// Sensing uncertainty.
    #[serde(rename = "H")]
    pub h: f64,
    /// Average communication power.
    #[serde(rename = "P_bar")]
    pub p_bar: f64,
    /// `h + lambda * p_bar`
    #[serde(rename = "D")]
    pub d: f64,
    pub lambda: f64,
}

impl CostBreakdown {
    pub fn new(h: f64, p_bar: f64, lambda: f64) -> Self {
        Self { h, p_bar, d: h + lambda * p_bar, lambda }
    }
}

/// Density-weighted squared distance from every cell to its owner.
pub fn sensing_uncertainty(deployment: &NodeDeployment, assignment: &CellAssignment, grid: &DensityGrid) -> f64 {
    debug_assert!(assignment.matches(grid));
    assignment
        .owners()
        .iter()
        .zip(grid.centers())
        .zip(grid.masses())
        .map(|((&o, &c), &m)| deployment.position(o).dist2(c) * m)
        .sum()
}

/// Link-by-link average power: transmit cost on every link plus receive
/// cost on links that end at a sensor.
pub fn total_power(deployment: &NodeDeployment, flows: &FlowMatrix, params: &PhysicalParams) -> f64 {
    let n = flows.n_sensors();
    flows
        .links()
        .map(|(i, j, rate)| {
            let tx = params.beta * deployment.position(i).dist2(deployment.position(j));
            let rx = if j < n { params.rho } else { 0.0 };
            (tx + rx) * rate
        })
        .sum()
}

pub fn lagrangian_cost(
    deployment: &NodeDeployment,
    assignment: &CellAssignment,
    grid: &DensityGrid,
    flows: &FlowMatrix,
    params: &PhysicalParams,
    lambda: f64,
) -> CostBreakdown {
    CostBreakdown::new(
        sensing_uncertainty(deployment, assignment, grid),
        total_power(deployment, flows, params),
        lambda,
    )
}

/// Absolute difference between `H` and its parallel-axis decomposition
/// `sum_i [ scatter of W_i about c_i + ||p_i - c_i||^2 v_i ]`.
pub fn parallel_axis_check(deployment: &NodeDeployment, assignment: &CellAssignment, grid: &DensityGrid) -> f64 {
    let n = deployment.n_sensors();
    let moments = cell_moments(grid, assignment, n);
    let h = sensing_uncertainty(deployment, assignment, grid);
    let scatter: f64 = assignment
        .owners()
        .iter()
        .zip(grid.centers())
        .zip(grid.masses())
        .map(|((&o, &c), &m)| moments.centroids[o].map_or(0.0, |ci| ci.dist2(c) * m))
        .sum();
    let offset: f64 = (0..n)
        .filter_map(|i| moments.centroids[i].map(|c| deployment.position(i).dist2(c) * moments.volumes[i]))
        .sum();
    (h - (scatter + offset)).abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::{build_grid, DensitySpec, Region};
    use crate::flownet::{power_coefficients, propagate_flows, NormalizedFlowMatrix};
    use crate::geometry::Point;
    use approx::assert_relative_eq;

    fn grid(side: f64, n: usize) -> DensityGrid {
        build_grid(Region::square(side).unwrap(), n, n, &DensitySpec::Uniform).unwrap()
    }

    fn example() -> (NodeDeployment, NormalizedFlowMatrix) {
        let p = NodeDeployment::new(
            vec![Point::new(0.0, 0.0), Point::new(0.0, 1.0), Point::new(1.0, 0.0)],
            vec![Point::new(1.0, 1.0)],
        )
        .unwrap();
        let s = NormalizedFlowMatrix::from_rows(
            1,
            &[vec![0.0, 0.5, 0.5, 0.0], vec![0.0, 0.0, 0.4, 0.6], vec![0.0, 0.0, 0.0, 1.0]],
        )
        .unwrap();
        (p, s)
    }

    #[test]
    fn centered_sensor_uncertainty() {
        // 2 * (10^3 / 12) * 10 * 0.01 = 50 / 3
        let g = grid(10.0, 100);
        let dep = NodeDeployment::new(vec![Point::new(5.0, 5.0)], vec![Point::new(0.0, 0.0)]).unwrap();
        let a = CellAssignment::from_fn(&g, |_| 0);
        let h = sensing_uncertainty(&dep, &a, &g);
        assert!((h - 50.0 / 3.0).abs() <= 0.01 * 50.0 / 3.0);
    }

    #[test]
    fn sensor_on_its_only_cell() {
        let g = grid(1.0, 1);
        let dep = NodeDeployment::new(vec![Point::new(0.5, 0.5)], vec![Point::new(0.0, 0.0)]).unwrap();
        let a = CellAssignment::from_fn(&g, |_| 0);
        assert_eq!(sensing_uncertainty(&dep, &a, &g), 0.0);
        assert_eq!(parallel_axis_check(&dep, &a, &g), 0.0);
    }

    #[test]
    fn uncertainty_is_quadratic_in_scale() {
        let small = grid(5.0, 50);
        let large = grid(10.0, 50);
        let pts = [Point::new(1.0, 1.0), Point::new(3.5, 2.0)];
        let dep = NodeDeployment::new(pts.to_vec(), vec![Point::new(0.0, 0.0)]).unwrap();
        let dep2 = NodeDeployment::new(pts.iter().map(|&p| p * 2.0).collect(), vec![Point::new(0.0, 0.0)]).unwrap();
        let a = crate::partition::voronoi(&pts, &small);
        let h1 = sensing_uncertainty(&dep, &a, &small);
        let h2 = sensing_uncertainty(&dep2, &a, &large);
        assert_relative_eq!(h2, 4.0 * h1, max_relative = 1e-12);
    }

    #[test]
    fn example_total_power() {
        // direct link sum over the five links
        let (p, s) = example();
        let params = PhysicalParams::new(1.0, 1.0, 1.0).unwrap();
        let gamma = [1.0, 1.0, 2.0];
        let f = propagate_flows(&s, &gamma).unwrap();
        let by_hand = 0.5 * 2.0 + 0.5 * 2.0 + 0.6 * 3.0 + 0.9 * 1.0 + 3.1 * 1.0;
        assert_relative_eq!(by_hand, 7.8, epsilon = 1e-12);
        assert_relative_eq!(total_power(&p, &f, &params), 7.8, epsilon = 1e-12);
        let g = power_coefficients(&p, &s, &params).unwrap();
        let via_g: f64 = g.as_slice().iter().zip(gamma).map(|(g, r)| g * r).sum();
        assert_relative_eq!(via_g, 7.8, epsilon = 1e-12);
    }

    #[test]
    fn zero_flow_and_single_link() {
        let (p, _) = example();
        let params = PhysicalParams::default();
        assert_eq!(total_power(&p, &FlowMatrix::zeros(3, 1), &params), 0.0);

        let dep = NodeDeployment::new(vec![Point::new(0.0, 0.0)], vec![Point::new(3.0, 4.0)]).unwrap();
        let f = FlowMatrix::new(1, 1, vec![0.0, 0.5]).unwrap();
        let params = PhysicalParams::new(2.0, 7.0, 1.0).unwrap();
        assert_relative_eq!(total_power(&dep, &f, &params), 2.0 * 25.0 * 0.5, epsilon = 1e-12);
    }

    #[test]
    fn breakdown_arithmetic() {
        let c = CostBreakdown::new(2.0, 3.0, 2.0);
        assert_eq!(c.d, 8.0);
        let c = CostBreakdown::new(2.5, 3.0, 0.0);
        assert_eq!(c.d, c.h);
        let json = serde_json::to_value(c).unwrap();
        assert_eq!(json["H"], 2.5);
        assert_eq!(json["P_bar"], 3.0);
        assert_eq!(json["D"], 2.5);
        assert_eq!(json["lambda"], 0.0);
    }

    #[test]
    fn sensors_on_centroids_leave_only_scatter() {
        let g = grid(10.0, 40);
        let pts = [Point::new(2.0, 2.0), Point::new(7.0, 3.0), Point::new(5.0, 8.0)];
        let a = crate::partition::voronoi(&pts, &g);
        let m = cell_moments(&g, &a, 3);
        let centroids: Vec<Point> = m.centroids.iter().map(|c| c.unwrap()).collect();
        let dep = NodeDeployment::new(centroids.clone(), vec![Point::new(0.0, 0.0)]).unwrap();
        let h = sensing_uncertainty(&dep, &a, &g);
        let scatter: f64 = a
            .owners()
            .iter()
            .zip(g.centers())
            .zip(g.masses())
            .map(|((&o, &c), &mass)| centroids[o].dist2(c) * mass)
            .sum();
        assert_relative_eq!(h, scatter, max_relative = 1e-12);
        assert!(parallel_axis_check(&dep, &a, &g) <= 1e-9 * h);
    }

    #[test]
    fn cost_grows_with_lambda() {
        let mut last = f64::NEG_INFINITY;
        for lambda in [0.0, 0.1, 0.5, 2.0] {
            let c = CostBreakdown::new(1.3, 0.7, lambda);
            assert!(c.d >= last);
            last = c.d;
        }
    }
}

//! Assignment of grid cells to sensors.
//!
//! Given positions and power coefficients, the cost-minimizing partition is
//! the additively weighted Voronoi diagram (power diagram) with site weights
//! `lambda * kappa * g_i`. On the grid each cell is atomic and goes wholly to
//! the sensor minimizing `||p_i - w||^2 + lambda * kappa * g_i`, lowest
//! index on ties.

use crate::density::DensityGrid;
use crate::error::{Error, Result};
use crate::geometry::{NodeDeployment, Point};

/// Owner sensor of every grid cell, row-major like [`DensityGrid`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CellAssignment {
    nx: usize,
    ny: usize,
    owners: Vec<usize>,
}

impl CellAssignment {
    pub fn new(nx: usize, ny: usize, owners: Vec<usize>) -> Result<Self> {
        if owners.len() != nx * ny {
            return Err(Error::Dimension(format!(
                "{} owners for a {nx}x{ny} grid",
                owners.len()
            )));
        }
        Ok(Self { nx, ny, owners })
    }

    /// Assignment built by calling `owner` on every cell center.
    pub fn from_fn(grid: &DensityGrid, owner: impl Fn(Point) -> usize) -> Self {
        Self {
            nx: grid.nx(),
            ny: grid.ny(),
            owners: grid.centers().iter().map(|&c| owner(c)).collect(),
        }
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn owners(&self) -> &[usize] {
        &self.owners
    }

    pub fn owner(&self, k: usize) -> usize {
        self.owners[k]
    }

    /// Cells owned by `sensor`.
    pub fn cells_of(&self, sensor: usize) -> impl Iterator<Item = usize> + '_ {
        self.owners
            .iter()
            .enumerate()
            .filter(move |(_, &o)| o == sensor)
            .map(|(k, _)| k)
    }

    pub fn matches(&self, grid: &DensityGrid) -> bool {
        self.nx == grid.nx() && self.ny == grid.ny()
    }

    pub fn max_owner(&self) -> Option<usize> {
        self.owners.iter().copied().max()
    }
}

/// Power diagram of the sensors with weights `lambda * kappa * g`.
///
/// Fusion centers never own cells.
pub fn power_diagram(
    deployment: &NodeDeployment,
    g: &[f64],
    lambda: f64,
    kappa: f64,
    grid: &DensityGrid,
) -> CellAssignment {
    let sensors = deployment.sensors();
    assert_eq!(g.len(), sensors.len(), "one power coefficient per sensor");
    let offsets: Vec<f64> = g.iter().map(|gi| lambda * kappa * gi).collect();
    weighted_argmin(sensors, &offsets, grid)
}

/// Ordinary Voronoi partition of `points`.
pub fn voronoi(points: &[Point], grid: &DensityGrid) -> CellAssignment {
    assert!(!points.is_empty(), "voronoi needs at least one site");
    weighted_argmin(points, &vec![0.0; points.len()], grid)
}

fn weighted_argmin(sites: &[Point], offsets: &[f64], grid: &DensityGrid) -> CellAssignment {
    let owners = grid
        .centers()
        .iter()
        .map(|&w| {
            let mut best = 0;
            let mut best_score = sites[0].dist2(w) + offsets[0];
            for (i, (&p, &off)) in sites.iter().zip(offsets).enumerate().skip(1) {
                let score = p.dist2(w) + off;
                if score < best_score {
                    best = i;
                    best_score = score;
                }
            }
            best
        })
        .collect();
    CellAssignment { nx: grid.nx(), ny: grid.ny(), owners }
}

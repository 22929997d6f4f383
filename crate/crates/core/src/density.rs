//! Target region, event density and grid integration.
//!
//! The continuous density is sampled at cell centers of a regular grid
//! (midpoint rule). Every integral the optimizer needs is a finite sum over
//! cells, so the discretized problem is itself a valid problem instance:
//! each grid cell behaves as an atom of probability mass located at its
//! center.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::partition::CellAssignment;

/// Axis-aligned rectangular target region.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Region {
    pub fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64) -> Result<Self> {
        let region = Self { x_min, x_max, y_min, y_max };
        region.validate()?;
        Ok(region)
    }

    /// `[0, side]^2`
    pub fn square(side: f64) -> Result<Self> {
        Self::new(0.0, side, 0.0, side)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.x_min, self.x_max, self.y_min, self.y_max]
            .iter()
            .all(|v| v.is_finite());
        if !finite || self.x_max <= self.x_min || self.y_max <= self.y_min {
            return Err(Error::InvalidRegion(format!(
                "[{}, {}] x [{}, {}]",
                self.x_min, self.x_max, self.y_min, self.y_max
            )));
        }
        Ok(())
    }

    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn height(&self) -> f64 {
        self.y_max - self.y_min
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn center(&self) -> Point {
        Point::new(0.5 * (self.x_min + self.x_max), 0.5 * (self.y_min + self.y_max))
    }

    pub fn contains(&self, p: Point) -> bool {
        (self.x_min..=self.x_max).contains(&p.x) && (self.y_min..=self.y_max).contains(&p.y)
    }

    pub fn clamp(&self, p: Point) -> Point {
        Point::new(p.x.clamp(self.x_min, self.x_max), p.y.clamp(self.y_min, self.y_max))
    }

    pub fn translated(&self, offset: Point) -> Self {
        Self {
            x_min: self.x_min + offset.x,
            x_max: self.x_max + offset.x,
            y_min: self.y_min + offset.y,
            y_max: self.y_max + offset.y,
        }
    }
}

/// How the density is specified.
#[derive(Clone, Debug, PartialEq)]
pub enum DensitySpec {
    /// `1 / area` everywhere.
    Uniform,
    /// Row-major samples, `ny` rows of `nx` values, first row at `y_min`.
    Table { values: Vec<f64>, normalize: bool },
}

/// Density sampled on a regular `nx` x `ny` grid over a region.
///
/// Cells are indexed row-major: `k = iy * nx + ix`.
#[derive(Clone, Debug)]
pub struct DensityGrid {
    region: Region,
    nx: usize,
    ny: usize,
    values: Vec<f64>,
    cell_area: f64,
    integral: f64,
    centers: Vec<Point>,
    masses: Vec<f64>,
}

/// Samples `spec` at cell centers of an `nx` x `ny` grid over `region`.
pub fn build_grid(region: Region, nx: usize, ny: usize, spec: &DensitySpec) -> Result<DensityGrid> {
    region.validate()?;
    if nx == 0 || ny == 0 {
        return Err(Error::InvalidResolution { nx, ny });
    }
    let n_cells = nx * ny;
    let cell_area = region.area() / n_cells as f64;
    let values = match spec {
        DensitySpec::Uniform => vec![1.0 / region.area(); n_cells],
        DensitySpec::Table { values, normalize } => {
            if values.len() != n_cells {
                return Err(Error::TableSize { expected: n_cells, actual: values.len() });
            }
            if let Some((index, &value)) = values
                .iter()
                .enumerate()
                .find(|(_, v)| !(v.is_finite() && **v >= 0.0))
            {
                return Err(Error::NegativeDensity { index, value });
            }
            let mut values = values.clone();
            if *normalize {
                let total: f64 = values.iter().sum::<f64>() * cell_area;
                if total <= 0.0 {
                    return Err(Error::ZeroMass);
                }
                values.iter_mut().for_each(|v| *v /= total);
            }
            values
        }
    };

    let dx = region.width() / nx as f64;
    let dy = region.height() / ny as f64;
    let centers = (0..n_cells)
        .map(|k| {
            let (ix, iy) = (k % nx, k / nx);
            Point::new(
                region.x_min + (ix as f64 + 0.5) * dx,
                region.y_min + (iy as f64 + 0.5) * dy,
            )
        })
        .collect();
    let masses: Vec<f64> = values.iter().map(|v| v * cell_area).collect();
    let integral = masses.iter().sum();

    Ok(DensityGrid { region, nx, ny, values, cell_area, integral, centers, masses })
}

impl DensityGrid {
    pub fn region(&self) -> &Region {
        &self.region
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn n_cells(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn cell_area(&self) -> f64 {
        self.cell_area
    }

    /// Length of a cell diagonal.
    pub fn cell_diagonal(&self) -> f64 {
        (self.region.width() / self.nx as f64).hypot(self.region.height() / self.ny as f64)
    }

    /// Total mass `sum(values) * cell_area`.
    pub fn integral(&self) -> f64 {
        self.integral
    }

    pub fn center(&self, k: usize) -> Point {
        self.centers[k]
    }

    pub fn centers(&self) -> &[Point] {
        &self.centers
    }

    /// Probability mass `f * cell_area` of each cell.
    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    /// Same density on the region shifted by `offset`.
    pub fn translated(&self, offset: Point) -> Self {
        let mut grid = self.clone();
        grid.region = self.region.translated(offset);
        grid.centers.iter_mut().for_each(|c| *c = *c + offset);
        grid
    }
}

/// Volume and centroid of each sensor's cell.
#[derive(Clone, Debug, PartialEq)]
pub struct CellMoments {
    pub volumes: Vec<f64>,
    /// `None` when the cell carries no mass.
    pub centroids: Vec<Option<Point>>,
}

impl CellMoments {
    pub fn len(&self) -> usize {
        self.volumes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.volumes.is_empty()
    }
}

pub fn cell_moments(grid: &DensityGrid, assignment: &CellAssignment, n_sensors: usize) -> CellMoments {
    let mut volumes = vec![0.0; n_sensors];
    let mut first = vec![Point::default(); n_sensors];
    for ((&owner, &mass), &c) in assignment.owners().iter().zip(grid.masses()).zip(grid.centers()) {
        volumes[owner] += mass;
        first[owner] = first[owner] + c * mass;
    }
    let centroids = volumes
        .iter()
        .zip(&first)
        .map(|(&v, &m)| (v > 0.0).then(|| m * (1.0 / v)))
        .collect();
    CellMoments { volumes, centroids }
}

/// Per-sensor data generation rates `kappa * v_i`.
pub fn data_rates(moments: &CellMoments, kappa: f64) -> Vec<f64> {
    moments.volumes.iter().map(|v| kappa * v).collect()
}

/// Reads a density table: plain decimal CSV, `ny` rows of `nx` columns,
/// no header. Returns `(nx, ny, values)`.
pub fn read_density_csv(path: impl AsRef<Path>) -> Result<(usize, usize, Vec<f64>)> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)?;
    let mut values = Vec::new();
    let mut nx = None;
    let mut ny = 0;
    for record in reader.records() {
        let record = record?;
        if nx.is_some_and(|n| n != record.len()) {
            return Err(Error::Parse(format!("density row {ny} has {} columns", record.len())));
        }
        nx = Some(record.len());
        for field in record.iter() {
            values.push(
                field
                    .parse::<f64>()
                    .map_err(|e| Error::Parse(format!("density row {ny}: {e}")))?,
            );
        }
        ny += 1;
    }
    let nx = nx.ok_or_else(|| Error::Parse("empty density table".into()))?;
    Ok((nx, ny, values))
}

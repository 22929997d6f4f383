use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

use crate::density::Region;
use crate::error::{Error, Result};

/// A point in the plane, in meters.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dist2(self, other: Point) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, rhs: Point) -> Point {
        Point::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, rhs: Point) -> Point {
        Point::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    fn mul(self, rhs: f64) -> Point {
        Point::new(self.x * rhs, self.y * rhs)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeKind {
    Sensor,
    Fc,
}

/// Positions of `N` sensors followed by `M` fusion centers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodeDeployment {
    n_sensors: usize,
    n_fcs: usize,
    positions: Vec<Point>,
}

impl NodeDeployment {
    pub fn new(sensors: Vec<Point>, fcs: Vec<Point>) -> Result<Self> {
        if sensors.is_empty() || fcs.is_empty() {
            return Err(Error::InvalidConfig(
                "a deployment needs at least one sensor and one fusion center".into(),
            ));
        }
        let n_sensors = sensors.len();
        let n_fcs = fcs.len();
        let mut positions = sensors;
        positions.extend(fcs);
        Self::from_positions(n_sensors, n_fcs, positions)
    }

    pub fn from_positions(n_sensors: usize, n_fcs: usize, positions: Vec<Point>) -> Result<Self> {
        if positions.len() != n_sensors + n_fcs {
            return Err(Error::Dimension(format!(
                "{} positions for {n_sensors} sensors and {n_fcs} fusion centers",
                positions.len()
            )));
        }
        if let Some(i) = positions.iter().position(|p| !p.is_finite()) {
            return Err(Error::InvalidConfig(format!("position of node {i} is not finite")));
        }
        Ok(Self { n_sensors, n_fcs, positions })
    }

    pub fn n_sensors(&self) -> usize {
        self.n_sensors
    }

    pub fn n_fcs(&self) -> usize {
        self.n_fcs
    }

    pub fn n_nodes(&self) -> usize {
        self.positions.len()
    }

    pub fn is_sensor(&self, i: usize) -> bool {
        i < self.n_sensors
    }

    pub fn kind(&self, i: usize) -> NodeKind {
        if self.is_sensor(i) {
            NodeKind::Sensor
        } else {
            NodeKind::Fc
        }
    }

    pub fn position(&self, i: usize) -> Point {
        self.positions[i]
    }

    pub fn positions(&self) -> &[Point] {
        &self.positions
    }

    pub fn sensors(&self) -> &[Point] {
        &self.positions[..self.n_sensors]
    }

    pub fn fcs(&self) -> &[Point] {
        &self.positions[self.n_sensors..]
    }

    /// Moves node `i`, clamping into `region` when one is given.
    pub fn set_position(&mut self, i: usize, p: Point, region: Option<&Region>) {
        self.positions[i] = match region {
            Some(r) => r.clamp(p),
            None => p,
        };
    }

    /// Same deployment with every node shifted by `offset`.
    pub fn translated(&self, offset: Point) -> Self {
        Self {
            n_sensors: self.n_sensors,
            n_fcs: self.n_fcs,
            positions: self.positions.iter().map(|&p| p + offset).collect(),
        }
    }
}

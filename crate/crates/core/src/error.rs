use thiserror::Error;

use crate::flownet::FlowViolation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid region: {0}")]
    InvalidRegion(String),

    #[error("grid resolution must be at least 1x1, got {nx}x{ny}")]
    InvalidResolution { nx: usize, ny: usize },

    #[error("density sample at cell {index} is negative or not finite ({value})")]
    NegativeDensity { index: usize, value: f64 },

    #[error("density table has {actual} samples, expected {expected}")]
    TableSize { expected: usize, actual: usize },

    #[error("density integrates to zero, cannot normalize")]
    ZeroMass,

    #[error("invalid physical parameters: {0}")]
    InvalidParams(String),

    #[error("invalid optimizer configuration: {0}")]
    InvalidConfig(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("link ({from}, {to}) is not a valid sensor link")]
    InvalidLink { from: usize, to: usize },

    #[error("invalid flow matrix: {0}")]
    InvalidFlow(#[from] FlowViolation),

    #[error("routing is not tree structured: sensor {sensor} has {successors} successors")]
    NotATree { sensor: usize, successors: usize },

    #[error("path enumeration exceeded the cap of {cap} paths")]
    PathOverflow { cap: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

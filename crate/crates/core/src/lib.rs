//! Joint node deployment and routing for wireless ad-hoc sensor networks.
//!
//! `N` sensors observe events drawn from a spatial density over a planar
//! region and forward the sensed data, possibly over several hops, to `M`
//! fusion centers. The objective traded off here is
//!
//! ```text
//! D(P, W, S) = H(P, W) + lambda * P_bar(P, W, S)
//! ```
//!
//! where `H` is the sensing uncertainty (quantization distortion of the
//! sensor layout), `P_bar` the average communication power and `lambda >= 0`
//! a Lagrange multiplier. The crate provides the building blocks (density
//! integration on a grid, power-diagram partitions, flow networks, energy
//! optimal routing, cost evaluation) and the routing-aware Lloyd iteration
//! together with the baselines it is compared against.
//!
//! Node indices are zero based throughout: sensors are `0..N`, fusion
//! centers are `N..N+M`.

pub mod cost;
pub mod density;
mod error;
pub mod flownet;
pub mod geometry;
pub mod io;
pub mod optimize;
pub mod partition;
pub mod routing;

pub use cost::CostBreakdown;
pub use density::{CellMoments, DensityGrid, DensitySpec, Region};
pub use error::{Error, Result};
pub use flownet::{FlowMatrix, FlowViolation, NormalizedFlowMatrix, PathSet, PowerCoefficients};
pub use geometry::{NodeDeployment, NodeKind, Point};
pub use optimize::{BaselineResult, OptimizerConfig, Solution, Trajectory};
pub use partition::CellAssignment;
pub use routing::PhysicalParams;

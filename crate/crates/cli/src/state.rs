//! Serialized terminal state of one run.

use std::path::Path;

use anyhow::{ensure, Context, Result};
use serde::{Deserialize, Serialize};
use wasn_deploy::flownet::validate;
use wasn_deploy::{
    CellAssignment, CostBreakdown, FlowMatrix, NodeDeployment, NormalizedFlowMatrix, Point, Region, Solution,
};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FinalState {
    pub algorithm: String,
    pub lambda: f64,
    pub seed: u64,
    pub region: Region,
    pub n_sensors: usize,
    pub n_fcs: usize,
    /// Sensors first, then fusion centers.
    pub positions: Vec<Point>,
    /// `n_sensors` rows of `n_sensors + n_fcs` forwarding ratios.
    pub routing: Vec<Vec<f64>>,
    /// Link rates, same shape as `routing`.
    pub flows: Vec<Vec<f64>>,
    /// Owning sensor per grid cell, one row per `y` band starting at `y_min`.
    pub partition: Vec<Vec<usize>>,
    pub cost: CostBreakdown,
    pub iterations: usize,
    pub truncated: bool,
}

fn rows(data: &[f64], cols: usize) -> Vec<Vec<f64>> {
    data.chunks(cols).map(<[f64]>::to_vec).collect()
}

impl FinalState {
    pub fn from_solution(
        algorithm: &str,
        seed: u64,
        region: Region,
        solution: &Solution,
        iterations: usize,
        truncated: bool,
    ) -> Self {
        let d = &solution.deployment;
        let cols = d.n_nodes();
        let a = &solution.assignment;
        Self {
            algorithm: algorithm.to_string(),
            lambda: solution.cost.lambda,
            seed,
            region,
            n_sensors: d.n_sensors(),
            n_fcs: d.n_fcs(),
            positions: d.positions().to_vec(),
            routing: rows(solution.routing.as_slice(), cols),
            flows: rows(solution.flows.as_slice(), cols),
            partition: a.owners().chunks(a.nx()).map(<[usize]>::to_vec).collect(),
            cost: solution.cost,
            iterations,
            truncated,
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading state {}", path.display()))?;
        let state: Self = serde_json::from_str(&text).with_context(|| format!("parsing state {}", path.display()))?;
        state.check().with_context(|| format!("inconsistent state {}", path.display()))?;
        Ok(state)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))
    }

    fn check(&self) -> Result<()> {
        self.deployment()?;
        validate(&self.routing_matrix()?)?;
        self.flow_matrix()?;
        self.assignment()?;
        Ok(())
    }

    pub fn deployment(&self) -> Result<NodeDeployment> {
        Ok(NodeDeployment::from_positions(self.n_sensors, self.n_fcs, self.positions.clone())?)
    }

    fn flat(&self, name: &str, m: &[Vec<f64>]) -> Result<Vec<f64>> {
        let cols = self.n_sensors + self.n_fcs;
        ensure!(m.len() == self.n_sensors, "`{name}` has {} rows, expected {}", m.len(), self.n_sensors);
        ensure!(m.iter().all(|r| r.len() == cols), "every `{name}` row needs {cols} entries");
        Ok(m.concat())
    }

    pub fn routing_matrix(&self) -> Result<NormalizedFlowMatrix> {
        let flat = self.flat("routing", &self.routing)?;
        Ok(NormalizedFlowMatrix::new(self.n_sensors, self.n_fcs, flat)?)
    }

    pub fn flow_matrix(&self) -> Result<FlowMatrix> {
        let flat = self.flat("flows", &self.flows)?;
        Ok(FlowMatrix::new(self.n_sensors, self.n_fcs, flat)?)
    }

    pub fn assignment(&self) -> Result<CellAssignment> {
        let ny = self.partition.len();
        let nx = self.partition.first().map_or(0, Vec::len);
        ensure!(self.partition.iter().all(|r| r.len() == nx), "`partition` rows differ in length");
        let owners = self.partition.concat();
        ensure!(owners.iter().all(|&o| o < self.n_sensors.max(1)), "`partition` names a missing sensor");
        Ok(CellAssignment::new(nx, ny, owners)?)
    }
}

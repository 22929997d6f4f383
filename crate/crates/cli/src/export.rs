//! Plot-ready CSV export of a saved state, plus the matching readers.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use wasn_deploy::io::{read_assignment_csv, write_assignment_csv};
use wasn_deploy::{CellAssignment, FlowMatrix, NodeDeployment, NodeKind, Point};

use crate::state::FinalState;

/// Paths written by [`export`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExportPaths {
    pub nodes: PathBuf,
    pub flows: PathBuf,
    pub partition: PathBuf,
}

impl ExportPaths {
    /// `<prefix>.nodes.csv`, `<prefix>.flows.csv`, `<prefix>.partition.csv`.
    pub fn for_prefix(prefix: &Path) -> Self {
        let with = |suffix: &str| {
            let mut s = prefix.as_os_str().to_owned();
            s.push(suffix);
            PathBuf::from(s)
        };
        Self { nodes: with(".nodes.csv"), flows: with(".flows.csv"), partition: with(".partition.csv") }
    }
}

pub fn export(state_path: &Path, prefix: &Path) -> Result<ExportPaths> {
    let state = FinalState::load(state_path)?;
    let paths = ExportPaths::for_prefix(prefix);
    if let Some(parent) = paths.nodes.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    }
    let create = |p: &Path| File::create(p).map(BufWriter::new).with_context(|| format!("creating {}", p.display()));
    write_nodes_csv(create(&paths.nodes)?, &state.deployment()?)?;
    write_flow_edges_csv(create(&paths.flows)?, &state.flow_matrix()?)?;
    write_assignment_csv(create(&paths.partition)?, &state.assignment()?)?;
    Ok(paths)
}

pub fn write_nodes_csv<W: Write>(writer: W, deployment: &NodeDeployment) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["index", "kind", "x", "y"])?;
    for (i, p) in deployment.positions().iter().enumerate() {
        let kind = match deployment.kind(i) {
            NodeKind::Sensor => "sensor",
            NodeKind::Fc => "fc",
        };
        w.write_record([i.to_string(), kind.to_string(), p.x.to_string(), p.y.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Nodes in index order; sensors must precede fusion centers.
pub fn read_nodes_csv<R: Read>(reader: R) -> Result<NodeDeployment> {
    let mut r = csv::Reader::from_reader(reader);
    let mut sensors = Vec::new();
    let mut fcs = Vec::new();
    for (row, record) in r.records().enumerate() {
        let record = record?;
        ensure!(record.len() == 4, "nodes row {row}: expected 4 fields");
        ensure!(record[0].parse::<usize>()? == row, "nodes row {row}: index out of order");
        let p = Point::new(record[2].parse()?, record[3].parse()?);
        match &record[1] {
            "sensor" if fcs.is_empty() => sensors.push(p),
            "sensor" => bail!("nodes row {row}: sensor listed after a fusion center"),
            "fc" => fcs.push(p),
            other => bail!("nodes row {row}: unknown kind {other:?}"),
        }
    }
    Ok(NodeDeployment::new(sensors, fcs)?)
}

/// Positive entries only, as `i,j,F_ij`.
pub fn write_flow_edges_csv<W: Write>(writer: W, flows: &FlowMatrix) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["i", "j", "F_ij"])?;
    for (i, j, rate) in flows.links() {
        w.write_record([i.to_string(), j.to_string(), rate.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_flow_edges_csv<R: Read>(reader: R, n_sensors: usize, n_fcs: usize) -> Result<FlowMatrix> {
    let cols = n_sensors + n_fcs;
    let mut f = vec![0.0; n_sensors * cols];
    let mut r = csv::Reader::from_reader(reader);
    for (row, record) in r.records().enumerate() {
        let record = record?;
        let (i, j): (usize, usize) = (record[0].parse()?, record[1].parse()?);
        ensure!(i < n_sensors && j < cols, "flows row {row}: link {i}->{j} out of range");
        f[i * cols + j] = record[2].parse()?;
    }
    Ok(FlowMatrix::new(n_sensors, n_fcs, f)?)
}

/// Reads back the three files written by [`export`].
pub fn import(paths: &ExportPaths) -> Result<(NodeDeployment, FlowMatrix, CellAssignment)> {
    let open = |p: &Path| File::open(p).map(BufReader::new).with_context(|| format!("opening {}", p.display()));
    let nodes = read_nodes_csv(open(&paths.nodes)?)?;
    let flows = read_flow_edges_csv(open(&paths.flows)?, nodes.n_sensors(), nodes.n_fcs())?;
    let partition = read_assignment_csv(open(&paths.partition)?)?;
    Ok((nodes, flows, partition))
}

//! CSV import and export of matrices, partitions and routing trees.
//!
//! Every file has a header row and uses `.` as decimal separator. Floats
//! are written in shortest round-trip form, so a write followed by a read
//! reproduces the values bit for bit.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::flownet::{FlowMatrix, NormalizedFlowMatrix};
use crate::partition::CellAssignment;

fn parse_f64(field: &str, row: usize) -> Result<f64> {
    field
        .trim()
        .parse()
        .map_err(|e| Error::Parse(format!("row {row}: {field:?}: {e}")))
}

fn parse_usize(field: &str, row: usize) -> Result<usize> {
    field
        .trim()
        .parse()
        .map_err(|e| Error::Parse(format!("row {row}: {field:?}: {e}")))
}

/// Writes a dense row-major matrix; the header names the column node
/// indices.
pub fn write_matrix_csv<W: Write>(writer: W, cols: usize, data: &[f64]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record((0..cols).map(|j| j.to_string()))?;
    for row in data.chunks(cols.max(1)) {
        w.write_record(row.iter().map(|v| v.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a matrix written by [`write_matrix_csv`]. Returns `(rows, cols, data)`.
pub fn read_matrix_csv<R: Read>(reader: R) -> Result<(usize, usize, Vec<f64>)> {
    let mut r = csv::Reader::from_reader(reader);
    let cols = r.headers()?.len();
    let mut data = Vec::new();
    let mut rows = 0;
    for record in r.records() {
        let record = record?;
        for field in record.iter() {
            data.push(parse_f64(field, rows)?);
        }
        rows += 1;
    }
    Ok((rows, cols, data))
}

pub fn write_routing_csv<W: Write>(writer: W, s: &NormalizedFlowMatrix) -> Result<()> {
    write_matrix_csv(writer, s.n_nodes(), s.as_slice())
}

pub fn read_routing_csv<R: Read>(reader: R) -> Result<NormalizedFlowMatrix> {
    let (rows, cols, data) = read_matrix_csv(reader)?;
    if cols < rows {
        return Err(Error::Parse(format!("{rows}x{cols} is not an N x (N+M) matrix")));
    }
    NormalizedFlowMatrix::new(rows, cols - rows, data)
}

pub fn write_flows_csv<W: Write>(writer: W, f: &FlowMatrix) -> Result<()> {
    write_matrix_csv(writer, f.n_nodes(), f.as_slice())
}

pub fn read_flows_csv<R: Read>(reader: R) -> Result<FlowMatrix> {
    let (rows, cols, data) = read_matrix_csv(reader)?;
    if cols < rows {
        return Err(Error::Parse(format!("{rows}x{cols} is not an N x (N+M) matrix")));
    }
    FlowMatrix::new(rows, cols - rows, data)
}

/// Owner matrix: `ny` rows of `nx` sensor indices, first row at `y_min`.
pub fn write_assignment_csv<W: Write>(writer: W, assignment: &CellAssignment) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record((0..assignment.nx()).map(|ix| ix.to_string()))?;
    for row in assignment.owners().chunks(assignment.nx()) {
        w.write_record(row.iter().map(|o| o.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_assignment_csv<R: Read>(reader: R) -> Result<CellAssignment> {
    let mut r = csv::Reader::from_reader(reader);
    let nx = r.headers()?.len();
    let mut owners = Vec::new();
    let mut ny = 0;
    for record in r.records() {
        let record = record?;
        for field in record.iter() {
            owners.push(parse_usize(field, ny)?);
        }
        ny += 1;
    }
    CellAssignment::new(nx, ny, owners)
}

/// Tree routing as `sensor_index,successor_index,path_cost` rows.
pub fn write_route_edges_csv<W: Write>(writer: W, successors: &[usize], path_costs: &[f64]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["sensor_index", "successor_index", "path_cost"])?;
    for (i, (j, c)) in successors.iter().zip(path_costs).enumerate() {
        w.write_record([i.to_string(), j.to_string(), c.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

//! Text formats: breakpoint and snapshot CSVs, the diagnostics series CSV and
//! JSON records. Floats use Rust's shortest round-trip formatting.

use std::io::{BufRead, Write};
use std::sync::Arc;

use serde::Serialize;

use crate::analysis::DiagnosticsSeries;
use crate::dalembert::ReducedData;
use crate::error::{Error, Result};
use crate::mesh::{FieldState, RadialMesh};

pub const BREAKPOINT_HEADER: &str = "s,f0,f1";
pub const SNAPSHOT_HEADER: &str = "r,u,ut";
pub const SERIES_HEADER: &str = "t,E,sup_u,mu,nu,lambda1,f,z1,z2,Z,d";

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Data rows of a CSV with the expected header; blank lines are skipped.
fn rows<R: BufRead>(reader: R, header: &str) -> Result<Vec<Vec<String>>> {
    let mut lines = reader.lines();
    let first = lines
        .next()
        .ok_or_else(|| Error::Parse("empty file".into()))??;
    if first.trim() != header {
        return Err(Error::Parse(format!("expected header {header:?}, found {:?}", first.trim())));
    }
    let width = header.split(',').count();
    let mut out = Vec::new();
    for (k, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<String> = line.split(',').map(|c| c.trim().to_string()).collect();
        if cells.len() != width {
            return Err(Error::Parse(format!("line {}: expected {width} columns", k + 2)));
        }
        out.push(cells);
    }
    Ok(out)
}

fn number(cell: &str) -> Result<f64> {
    cell.parse()
        .map_err(|_| Error::Parse(format!("not a number: {cell:?}")))
}

/// One row per node; `f1` is the cell value on `[sᵢ, sᵢ₊₁)` and is left empty
/// on the last row.
pub fn write_breakpoints<W: Write>(mut w: W, data: &ReducedData) -> Result<()> {
    writeln!(w, "{BREAKPOINT_HEADER}")?;
    for (i, (s, f0)) in data.nodes.iter().zip(&data.f0).enumerate() {
        writeln!(w, "{s},{f0},{}", opt(data.f1_cells.get(i).copied()))?;
    }
    Ok(())
}

pub fn read_breakpoints<R: BufRead>(reader: R) -> Result<ReducedData> {
    let rows = rows(reader, BREAKPOINT_HEADER)?;
    let mut nodes = Vec::with_capacity(rows.len());
    let mut f0 = Vec::with_capacity(rows.len());
    let mut f1 = Vec::with_capacity(rows.len());
    for (k, row) in rows.iter().enumerate() {
        nodes.push(number(&row[0])?);
        f0.push(number(&row[1])?);
        if k + 1 < rows.len() {
            f1.push(number(&row[2])?);
        } else if !row[2].is_empty() && number(&row[2])? != 0.0 {
            return Err(Error::InvalidData("f1 on the last row must be empty or 0".into()));
        }
    }
    ReducedData::new(nodes, f0, f1)
}

pub fn write_snapshot<W: Write>(mut w: W, state: &FieldState) -> Result<()> {
    writeln!(w, "{SNAPSHOT_HEADER}")?;
    for ((r, u), ut) in state.nodes().iter().zip(state.u()).zip(state.ut()) {
        writeln!(w, "{r},{u},{ut}")?;
    }
    Ok(())
}

/// Columns `(r, u, ut)` of a snapshot CSV.
pub fn read_snapshot_columns<R: BufRead>(reader: R) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    let rows = rows(reader, SNAPSHOT_HEADER)?;
    let mut cols = (Vec::new(), Vec::new(), Vec::new());
    for row in &rows {
        cols.0.push(number(&row[0])?);
        cols.1.push(number(&row[1])?);
        cols.2.push(number(&row[2])?);
    }
    Ok(cols)
}

/// Snapshot as a field on its own nodes.
pub fn read_snapshot<R: BufRead>(reader: R, t: f64) -> Result<FieldState> {
    let (r, u, ut) = read_snapshot_columns(reader)?;
    let mesh = Arc::new(RadialMesh::from_nodes(r)?);
    FieldState::from_u_samples(mesh, t, &u, &ut)
}

pub fn series_header(series: &DiagnosticsSeries) -> String {
    let mut h = SERIES_HEADER.to_string();
    for r in &series.options.g_radii {
        h.push_str(&format!(",g_R{r}"));
    }
    for r in &series.options.ball_radii {
        h.push_str(&format!(",ball{r}"));
    }
    h
}

/// Absent radii and sign projections are written as empty fields.
pub fn write_series<W: Write>(mut w: W, series: &DiagnosticsSeries) -> Result<()> {
    writeln!(w, "{}", series_header(series))?;
    for row in &series.rows {
        let mut line = format!(
            "{},{},{},{},{},{},{},{},{},{},{}",
            row.t,
            row.energy,
            row.sup_u,
            opt(row.radii.mu),
            opt(row.radii.nu),
            opt(row.radii.lambda1),
            opt(row.f),
            row.z1,
            row.z2,
            row.z,
            row.d
        );
        for v in row.g.iter().chain(&row.ball_energy) {
            line.push_str(&format!(",{v}"));
        }
        writeln!(w, "{line}")?;
    }
    Ok(())
}

pub fn write_json<W: Write, T: Serialize>(mut w: W, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| Error::Io(e.to_string()))?;
    writeln!(w)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::{diagnostics_series, DiagnosticsOptions};
    use crate::profile::{RadialProfile, ScaledW};

    #[test]
    fn breakpoints_round_trip() {
        let d = ReducedData::new(vec![0.0, 0.5, 1.25], vec![0.0, 0.1 + 0.2, -1.0 / 3.0], vec![2.0, -0.7]).unwrap();
        let mut buf = Vec::new();
        write_breakpoints(&mut buf, &d).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.lines().last().unwrap().ends_with(','));
        assert_eq!(read_breakpoints(&buf[..]).unwrap(), d);

        let mut buf = Vec::new();
        write_breakpoints(&mut buf, &ReducedData::empty()).unwrap();
        assert_eq!(buf, b"s,f0,f1\n");
        assert!(read_breakpoints(&buf[..]).unwrap().is_empty());
    }

    #[test]
    fn malformed_csv() {
        assert!(matches!(read_breakpoints(&b""[..]), Err(Error::Parse(_))));
        assert!(matches!(read_breakpoints(&b"a,b,c\n"[..]), Err(Error::Parse(_))));
        assert!(matches!(read_breakpoints(&b"s,f0,f1\n0,x,1\n"[..]), Err(Error::Parse(_))));
        assert!(matches!(read_snapshot_columns(&b"r,u,ut\n0,1\n"[..]), Err(Error::Parse(_))));
    }

    #[test]
    fn snapshot_round_trip() {
        let mesh = Arc::new(RadialMesh::geometric(0.1, 1.1, 10, 5.0).unwrap());
        let w = ScaledW::new(0.7, -1.0);
        let s = FieldState::from_profiles(mesh, 0.0, |r| w.value(r), |r| (-r * r).exp());
        let mut buf = Vec::new();
        write_snapshot(&mut buf, &s).unwrap();
        let back = read_snapshot(&buf[..], 0.0).unwrap();
        assert_eq!(back.nodes(), s.nodes());
        assert_eq!(back.u(), s.u());
        assert_eq!(back.ut(), s.ut());
    }

    #[test]
    fn series_columns() {
        let mesh = Arc::new(RadialMesh::uniform(0.05, 20.0).unwrap());
        let frames: Vec<FieldState> = (0..2)
            .map(|k| FieldState::from_profiles(mesh.clone(), k as f64, |r| ScaledW::new(1.0, 1.0).value(r), |_| 0.0))
            .collect();
        let opts = DiagnosticsOptions {
            nonlinear: true,
            g_radii: vec![2.0, 5.0],
            ball_radii: vec![1.0],
        };
        let series = diagnostics_series(&frames, None, &opts).unwrap();
        let mut buf = Vec::new();
        write_series(&mut buf, &series).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "t,E,sup_u,mu,nu,lambda1,f,z1,z2,Z,d,g_R2,g_R5,ball1");
        for line in lines {
            assert_eq!(line.split(',').count(), 14);
        }
    }
}

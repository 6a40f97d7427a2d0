//! File formats.
//!
//! Time series CSV: one row per component, comma-separated samples, no
//! header. Time series binary: 16-byte header (8-byte magic `TSCIGB1\0`,
//! u32 LE p, u32 LE n) followed by p*n f64 LE values, row-major (each
//! component series contiguous). Edge sets: sorted `i,j` lines, 1-based.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use nalgebra::DMatrix;

use crate::embedding::TimeSeries;
use crate::error::{Error, Result};
use crate::graph::EdgeSet;

pub const BIN_MAGIC: &[u8; 8] = b"TSCIGB1\0";

pub fn write_time_series_csv(path: &Path, ts: &TimeSeries) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    let v = ts.values();
    for r in 0..v.nrows() {
        let row: Vec<String> = (0..v.ncols()).map(|c| format!("{}", v[(r, c)])).collect();
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}

pub fn read_time_series_csv(path: &Path) -> Result<TimeSeries> {
    let reader = BufReader::new(File::open(path)?);
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let row: Vec<f64> = line
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))
            })
            .collect::<Result<_>>()?;
        if let Some(first) = rows.first() {
            if row.len() != first.len() {
                return Err(Error::Parse(format!(
                    "line {}: expected {} columns, got {}",
                    lineno + 1,
                    first.len(),
                    row.len()
                )));
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Parse("empty time series file".into()));
    }
    let p = rows.len();
    let n = rows[0].len();
    TimeSeries::new(DMatrix::from_fn(p, n, |r, c| rows[r][c]))
}

pub fn write_time_series_bin(path: &Path, ts: &TimeSeries) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    let v = ts.values();
    w.write_all(BIN_MAGIC)?;
    w.write_all(&(v.nrows() as u32).to_le_bytes())?;
    w.write_all(&(v.ncols() as u32).to_le_bytes())?;
    for r in 0..v.nrows() {
        for c in 0..v.ncols() {
            w.write_all(&v[(r, c)].to_le_bytes())?;
        }
    }
    Ok(())
}

pub fn read_time_series_bin(path: &Path) -> Result<TimeSeries> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != BIN_MAGIC {
        return Err(Error::Parse("bad magic in binary time series file".into()));
    }
    let mut buf4 = [0u8; 4];
    r.read_exact(&mut buf4)?;
    let p = u32::from_le_bytes(buf4) as usize;
    r.read_exact(&mut buf4)?;
    let n = u32::from_le_bytes(buf4) as usize;
    let mut values = DMatrix::zeros(p, n);
    let mut buf8 = [0u8; 8];
    for row in 0..p {
        for col in 0..n {
            r.read_exact(&mut buf8)?;
            values[(row, col)] = f64::from_le_bytes(buf8);
        }
    }
    TimeSeries::new(values)
}

/// Writes sorted `i,j` lines, 1-based node indices.
pub fn write_edge_set(path: &Path, edges: &EdgeSet) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for (i, j) in edges.iter() {
        writeln!(w, "{},{}", i + 1, j + 1)?;
    }
    Ok(())
}

/// Reads `i,j` lines (1-based) for a graph over `p` nodes.
pub fn read_edge_set(path: &Path, p: usize) -> Result<EdgeSet> {
    let reader = BufReader::new(File::open(path)?);
    let mut edges = EdgeSet::new(p);
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() != 2 {
            return Err(Error::Parse(format!("line {}: expected i,j", lineno + 1)));
        }
        let parse = |s: &str| {
            s.trim()
                .parse::<usize>()
                .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))
        };
        let (i, j) = (parse(parts[0])?, parse(parts[1])?);
        if i == 0 || j == 0 {
            return Err(Error::Parse(format!(
                "line {}: node indices are 1-based",
                lineno + 1
            )));
        }
        edges.insert(i - 1, j - 1)?;
    }
    Ok(edges)
}

/// 0/1 adjacency matrix as CSV rows.
pub fn write_adjacency_csv(path: &Path, edges: &EdgeSet) -> Result<()> {
    let p = edges.num_nodes();
    let mut w = BufWriter::new(File::create(path)?);
    for i in 0..p {
        let row: Vec<&str> = (0..p)
            .map(|j| if i != j && edges.contains(i, j) { "1" } else { "0" })
            .collect();
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use tempfile::tempdir;

    fn sample_ts() -> TimeSeries {
        TimeSeries::new(DMatrix::from_row_slice(
            2,
            3,
            &[1.0, -0.25, 3.5e-7, 2.0, 0.0, -1.125],
        ))
        .unwrap()
    }

    #[test]
    fn csv_round_trip() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("ts.csv");
        let ts = sample_ts();
        write_time_series_csv(&path, &ts).unwrap();
        let back = read_time_series_csv(&path).unwrap();
        assert_eq!(back.values(), ts.values());
    }

    #[test]
    fn binary_round_trip_is_bit_exact() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("ts.bin");
        let ts = sample_ts();
        write_time_series_bin(&path, &ts).unwrap();
        let back = read_time_series_bin(&path).unwrap();
        for (a, b) in ts.values().iter().zip(back.values().iter()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
        let size = std::fs::metadata(&path).unwrap().len();
        assert_eq!(size, 16 + 6 * 8);
    }

    #[test]
    fn binary_rejects_wrong_magic() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("bad.bin");
        std::fs::write(&path, b"NOTMAGIC\x02\0\0\0\x01\0\0\0").unwrap();
        assert!(read_time_series_bin(&path).is_err());
    }

    #[test]
    fn edge_set_round_trip_one_based() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("edges.csv");
        let edges = EdgeSet::from_pairs(5, [(0, 3), (1, 2)]).unwrap();
        write_edge_set(&path, &edges).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text, "1,4\n2,3\n");
        let back = read_edge_set(&path, 5).unwrap();
        assert_eq!(back, edges);
    }

    #[test]
    fn adjacency_export() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("adj.csv");
        let edges = EdgeSet::from_pairs(3, [(0, 2)]).unwrap();
        write_adjacency_csv(&path, &edges).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text, "0,0,1\n0,0,0\n1,0,0\n");
    }
}

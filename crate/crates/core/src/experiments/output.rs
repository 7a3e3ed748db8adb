use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{Grid1D, WaveField};

#[derive(Debug, Serialize, Deserialize)]
struct SnapshotRow {
    x: f64,
    re: f64,
    im: f64,
    modulus_sq: f64,
}

/// `x, Re u, Im u, |u|²` per node.
pub fn write_snapshot(path: &Path, u: &WaveField) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let mut w = csv::Writer::from_path(path)?;
    for (k, c) in u.values.iter().enumerate() {
        w.serialize(SnapshotRow { x: u.grid.x(k), re: c.re, im: c.im, modulus_sq: c.norm_sqr() })?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a file written by [`write_snapshot`]; the grid is rebuilt from the
/// first and last `x` and the row count.
pub fn read_snapshot(path: &Path) -> Result<WaveField> {
    let mut r = csv::Reader::from_path(path)?;
    let rows: Vec<SnapshotRow> = r.deserialize().collect::<std::result::Result<_, _>>()?;
    if rows.len() < 3 {
        return Err(Error::Config(format!("{} has too few rows", path.display())));
    }
    let grid = Grid1D::new(rows[0].x, rows[rows.len() - 1].x, rows.len())
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    WaveField::new(grid, rows.iter().map(|r| Complex64::new(r.re, r.im)).collect())
}

pub fn snapshot_path(out: &Path, index: usize) -> PathBuf {
    out.join("snapshots").join(format!("{index:04}.csv"))
}

pub fn write_rows<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let mut w = csv::Writer::from_path(path)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_rows<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_path(path)?;
    Ok(r.deserialize().collect::<std::result::Result<_, _>>()?)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, serde_json::to_string_pretty(value)?)?;
    Ok(())
}

//! CSV series and binary checkpoint formats.
//!
//! CSV files carry `# key = value` comment headers (seeds, units) followed by
//! one column-name row; checkpoints are little-endian with a fixed magic and
//! version tag.

use std::io::{Read, Write};

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::scalar::Scalar;

/// A named-column table plus header metadata, the one CSV shape everything
/// here exports.
#[derive(Debug, Clone, Default)]
pub struct CsvTable {
    pub metadata: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl CsvTable {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            metadata: Vec::new(),
            columns: columns.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn with_meta(mut self, key: &str, value: impl std::fmt::Display) -> Self {
        self.metadata.push((key.to_string(), value.to_string()));
        self
    }

    pub fn push_row(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        for (k, v) in &self.metadata {
            writeln!(w, "# {k} = {v}")?;
        }
        writeln!(w, "{}", self.columns.join(","))?;
        for row in &self.rows {
            let line: Vec<String> = row.iter().map(|v| format!("{v:.17e}")).collect();
            writeln!(w, "{}", line.join(","))?;
        }
        Ok(())
    }

    pub fn write_file(&self, path: &std::path::Path) -> Result<()> {
        let f = std::fs::File::create(path)?;
        self.write_to(std::io::BufWriter::new(f))
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self> {
        let mut text = String::new();
        r.read_to_string(&mut text)?;
        let mut table = CsvTable::default();
        let mut saw_header = false;
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(meta) = line.strip_prefix('#') {
                if let Some((k, v)) = meta.split_once('=') {
                    table
                        .metadata
                        .push((k.trim().to_string(), v.trim().to_string()));
                }
                continue;
            }
            if !saw_header {
                table.columns = line.split(',').map(|c| c.trim().to_string()).collect();
                saw_header = true;
                continue;
            }
            let row: std::result::Result<Vec<f64>, _> =
                line.split(',').map(|c| c.trim().parse::<f64>()).collect();
            let row = row.map_err(|e| Error::Parse(format!("bad CSV row {line:?}: {e}")))?;
            if row.len() != table.columns.len() {
                return Err(Error::Parse(format!(
                    "row has {} fields, expected {}",
                    row.len(),
                    table.columns.len()
                )));
            }
            table.rows.push(row);
        }
        if !saw_header {
            return Err(Error::Parse("empty CSV".into()));
        }
        Ok(table)
    }

    pub fn read_file(path: &std::path::Path) -> Result<Self> {
        let f = std::fs::File::open(path)?;
        Self::read_from(std::io::BufReader::new(f))
    }

    pub fn meta(&self, key: &str) -> Option<&str> {
        self.metadata
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }
}

const CHECKPOINT_MAGIC: &[u8; 8] = b"LVYCKPT\0";
const CHECKPOINT_VERSION: u32 = 1;

/// Write a complex field and its grid as a versioned little-endian
/// checkpoint: magic, u32 version, f64 grid min, f64 grid step, u64 length,
/// then interleaved (re, im) f64 pairs.
pub fn write_checkpoint<T: Scalar, W: Write>(
    mut w: W,
    grid: &Grid<T>,
    amplitudes: &[Complex<T>],
) -> Result<()> {
    w.write_all(CHECKPOINT_MAGIC)?;
    w.write_all(&CHECKPOINT_VERSION.to_le_bytes())?;
    w.write_all(&grid.min().to64().to_le_bytes())?;
    w.write_all(&grid.step().to64().to_le_bytes())?;
    w.write_all(&(amplitudes.len() as u64).to_le_bytes())?;
    for a in amplitudes {
        w.write_all(&a.re.to64().to_le_bytes())?;
        w.write_all(&a.im.to64().to_le_bytes())?;
    }
    Ok(())
}

pub fn read_checkpoint<T: Scalar, R: Read>(mut r: R) -> Result<(Grid<T>, Vec<Complex<T>>)> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != CHECKPOINT_MAGIC {
        return Err(Error::Parse("bad checkpoint magic".into()));
    }
    let mut b4 = [0u8; 4];
    r.read_exact(&mut b4)?;
    let version = u32::from_le_bytes(b4);
    if version != CHECKPOINT_VERSION {
        return Err(Error::Parse(format!("unsupported checkpoint version {version}")));
    }
    let mut b8 = [0u8; 8];
    r.read_exact(&mut b8)?;
    let min = f64::from_le_bytes(b8);
    r.read_exact(&mut b8)?;
    let step = f64::from_le_bytes(b8);
    r.read_exact(&mut b8)?;
    let len = u64::from_le_bytes(b8) as usize;
    let grid = Grid::new(T::of(min), T::of(step), len)?;
    let mut amps = Vec::with_capacity(len);
    for _ in 0..len {
        r.read_exact(&mut b8)?;
        let re = f64::from_le_bytes(b8);
        r.read_exact(&mut b8)?;
        let im = f64::from_le_bytes(b8);
        amps.push(Complex::new(T::of(re), T::of(im)));
    }
    Ok((grid, amps))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip() {
        let mut t = CsvTable::new(&["t", "value"]).with_meta("seed", 42);
        t.push_row(vec![0.0, 1.5]);
        t.push_row(vec![0.5, -2.25e-7]);
        let mut buf = Vec::new();
        t.write_to(&mut buf).unwrap();
        let back = CsvTable::read_from(buf.as_slice()).unwrap();
        assert_eq!(back.meta("seed"), Some("42"));
        assert_eq!(back.columns, vec!["t", "value"]);
        assert_eq!(back.column("value").unwrap(), vec![1.5, -2.25e-7]);
    }

    #[test]
    fn checkpoint_round_trip() {
        let grid = Grid::<f64>::symmetric(4.0, 8).unwrap();
        let amps: Vec<Complex<f64>> = (0..8)
            .map(|i| Complex::new(i as f64, -(i as f64) / 3.0))
            .collect();
        let mut buf = Vec::new();
        write_checkpoint(&mut buf, &grid, &amps).unwrap();
        let (g2, a2) = read_checkpoint::<f64, _>(buf.as_slice()).unwrap();
        assert!(grid.same_layout(&g2));
        assert_eq!(amps, a2);
    }

    #[test]
    fn checkpoint_rejects_garbage() {
        let buf = b"not a checkpoint".to_vec();
        assert!(read_checkpoint::<f64, _>(buf.as_slice()).is_err());
    }
}

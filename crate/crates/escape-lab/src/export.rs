//! Artifact serialization: reproducible CSV, a compact binary density dump,
//! and the run manifest.
//!
//! Floats are written with Rust's shortest round-trip formatting so identical
//! results produce identical bytes. Every CSV starts with `#`-prefixed header
//! lines carrying at least the config fingerprint and the master seed.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::fpe::DensityField;

/// Shortest decimal representation that round-trips the value.
pub fn fmt_f64(x: f64) -> String {
    format!("{x}")
}

/// A named artifact held in memory until the whole run has succeeded.
#[derive(Debug, Clone)]
pub struct Artifact {
    pub name: String,
    pub bytes: Vec<u8>,
}

/// Incremental CSV builder with a comment header block.
#[derive(Debug, Clone)]
pub struct CsvBuilder {
    header: Vec<(String, String)>,
    columns: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl CsvBuilder {
    pub fn new(fingerprint: &str, seed: u64, columns: &[&str]) -> CsvBuilder {
        CsvBuilder {
            header: vec![
                ("fingerprint".into(), fingerprint.to_string()),
                ("seed".into(), seed.to_string()),
            ],
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    /// Add a `# key: value` header line.
    pub fn meta(&mut self, key: &str, value: impl Into<String>) -> &mut Self {
        self.header.push((key.to_string(), value.into()));
        self
    }

    pub fn row(&mut self, cells: &[String]) -> &mut Self {
        assert_eq!(cells.len(), self.columns.len(), "column count mismatch");
        self.rows.push(cells.to_vec());
        self
    }

    pub fn row_f64(&mut self, cells: &[f64]) -> &mut Self {
        let cells: Vec<String> = cells.iter().map(|&x| fmt_f64(x)).collect();
        self.row(&cells)
    }

    pub fn finish(&self, name: &str) -> Artifact {
        let mut out = String::new();
        for (k, v) in &self.header {
            out.push_str(&format!("# {k}: {v}\n"));
        }
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        Artifact {
            name: name.to_string(),
            bytes: out.into_bytes(),
        }
    }
}

/// Binary density dump: magic `FPE1`, then little-endian `u32` dimension,
/// per-axis (`u64` cells, `f64` min, `f64` max), `f64` time, and the cell
/// values row-major.
pub fn density_binary(field: &DensityField, time: f64, name: &str) -> Artifact {
    let mut bytes = Vec::with_capacity(4 + 4 + field.grid.axes.len() * 24 + 8 + field.values.len() * 8);
    bytes.extend_from_slice(b"FPE1");
    bytes.extend_from_slice(&(field.grid.dim() as u32).to_le_bytes());
    for axis in &field.grid.axes {
        bytes.extend_from_slice(&(axis.n as u64).to_le_bytes());
        bytes.extend_from_slice(&axis.min.to_le_bytes());
        bytes.extend_from_slice(&axis.max.to_le_bytes());
    }
    bytes.extend_from_slice(&time.to_le_bytes());
    for v in &field.values {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    Artifact {
        name: name.to_string(),
        bytes,
    }
}

/// Summary of a completed run, written as `manifest.json`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub fingerprint: String,
    pub master_seed: u64,
    pub artifacts: Vec<String>,
    /// Excluded from reproducibility comparisons.
    pub wall_clock_seconds: f64,
    pub versions: BTreeMap<String, String>,
}

impl RunManifest {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fpe::{Axis, Grid};

    #[test]
    fn floats_round_trip_through_csv_text() {
        for &x in &[0.1, 1.0 / 3.0, 1e-300, 12.077683537175253, -0.0] {
            let s = fmt_f64(x);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits(), "{s}");
        }
    }

    #[test]
    fn csv_has_header_comments_then_columns() {
        let mut b = CsvBuilder::new("abc123", 7, &["t", "x"]);
        b.meta("landscape", "quadratic");
        b.row_f64(&[0.5, 1.25]);
        let text = String::from_utf8(b.finish("out.csv").bytes).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "# fingerprint: abc123");
        assert_eq!(lines[1], "# seed: 7");
        assert_eq!(lines[2], "# landscape: quadratic");
        assert_eq!(lines[3], "t,x");
        assert_eq!(lines[4], "0.5,1.25");
    }

    #[test]
    fn binary_dump_layout() {
        let grid = Grid::new(vec![Axis::new(-1.0, 1.0, 4).unwrap()]).unwrap();
        let field = DensityField::new(grid, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let a = density_binary(&field, 2.5, "density.bin");
        let b = &a.bytes;
        assert_eq!(&b[0..4], b"FPE1");
        assert_eq!(u32::from_le_bytes(b[4..8].try_into().unwrap()), 1);
        assert_eq!(u64::from_le_bytes(b[8..16].try_into().unwrap()), 4);
        assert_eq!(f64::from_le_bytes(b[16..24].try_into().unwrap()), -1.0);
        assert_eq!(f64::from_le_bytes(b[24..32].try_into().unwrap()), 1.0);
        assert_eq!(f64::from_le_bytes(b[32..40].try_into().unwrap()), 2.5);
        assert_eq!(f64::from_le_bytes(b[40..48].try_into().unwrap()), 1.0);
        assert_eq!(b.len(), 40 + 4 * 8);
    }
}

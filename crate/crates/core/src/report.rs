//! Plot-ready artifact writers: UTF-8 CSV with a header row, `.` decimal
//! separator and a fixed column order, plus JSON metadata sidecars.
//! Column layouts are documented in `docs/output-schemas.md`.

use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::Result;

/// A CSV table with fixed columns. Floats are written with Rust's shortest
/// round-trip formatting, so identical runs produce byte-identical files.
#[derive(Debug, Clone)]
pub struct CsvTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl CsvTable {
    pub fn new(columns: &[&str]) -> Self {
        CsvTable {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_string(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let mut first = true;
            for v in row {
                if !first {
                    out.push(',');
                }
                first = false;
                out.push_str(&format_float(*v));
            }
            out.push('\n');
        }
        out
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut f = std::fs::File::create(path)?;
        f.write_all(self.to_string().as_bytes())?;
        Ok(())
    }
}

fn format_float(v: f64) -> String {
    if v == v.trunc() && v.abs() < 1e15 {
        // Keep integers readable (seeds, counts, site indices).
        format!("{}", v as i64)
    } else {
        format!("{v}")
    }
}

/// Serializes a value as pretty JSON to `path`.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut f = std::fs::File::create(path)?;
    f.write_all(serde_json::to_string_pretty(value)?.as_bytes())?;
    f.write_all(b"\n")?;
    Ok(())
}

/// SHA-256 hex digest of a byte string (config hashes in run metadata).
pub fn sha256_hex(bytes: &[u8]) -> String {
    use sha2::{Digest, Sha256};
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    hasher
        .finalize()
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout_is_stable() {
        let mut t = CsvTable::new(&["a", "b"]);
        t.push(vec![1.0, 0.5]);
        t.push(vec![-2.0, 1e-9]);
        assert_eq!(t.to_string(), "a,b\n1,0.5\n-2,0.000000001\n");
    }

    #[test]
    fn digest_is_deterministic() {
        assert_eq!(sha256_hex(b"x"), sha256_hex(b"x"));
        assert_ne!(sha256_hex(b"x"), sha256_hex(b"y"));
    }
}

//! Plain-text system files.
//!
//! A system is described by a TOML document with integer dimensions `n`,
//! `nu`, `ny`, row-major flat matrices `A0`, `B`, `C`, `D`, and an optional
//! array of `[[delays]]` tables each holding `tau` and a row-major `A`:
//!
//! ```toml
//! n = 1
//! nu = 1
//! ny = 1
//! A0 = [-3.0]
//! B = [1.0]
//! C = [1.0]
//! D = [0.0]
//!
//! [[delays]]
//! tau = 1.0
//! A = [1.0]
//! ```
//!
//! Serialization uses shortest round-trip floats, so write → parse is
//! bit-exact.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::system::DelaySystem;

/// One delayed term in a system file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DelayEntry {
    pub tau: f64,
    #[serde(rename = "A")]
    pub a: Vec<f64>,
}

/// The on-disk document form of a [`DelaySystem`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SystemFile {
    pub n: usize,
    pub nu: usize,
    pub ny: usize,
    #[serde(rename = "A0")]
    pub a0: Vec<f64>,
    #[serde(rename = "B")]
    pub b: Vec<f64>,
    #[serde(rename = "C")]
    pub c: Vec<f64>,
    #[serde(rename = "D")]
    pub d: Vec<f64>,
    #[serde(default)]
    pub delays: Vec<DelayEntry>,
}

fn matrix_from_flat(name: &str, flat: &[f64], rows: usize, cols: usize) -> Result<DMatrix<f64>> {
    if flat.len() != rows * cols {
        return Err(Error::Parse(format!(
            "{name} has {} entries, expected {rows}x{cols} = {}",
            flat.len(),
            rows * cols
        )));
    }
    Ok(DMatrix::from_row_slice(rows, cols, flat))
}

impl SystemFile {
    /// Validates the document and builds the system.
    pub fn into_system(self) -> Result<DelaySystem> {
        if self.n == 0 || self.nu == 0 || self.ny == 0 {
            return Err(Error::Parse("n, nu and ny must be positive".into()));
        }
        let a0 = matrix_from_flat("A0", &self.a0, self.n, self.n)?;
        let b = matrix_from_flat("B", &self.b, self.n, self.nu)?;
        let c = matrix_from_flat("C", &self.c, self.ny, self.n)?;
        let d = matrix_from_flat("D", &self.d, self.ny, self.nu)?;
        let mut delay_terms = Vec::with_capacity(self.delays.len());
        for (i, entry) in self.delays.iter().enumerate() {
            let a = matrix_from_flat(&format!("delays[{i}].A"), &entry.a, self.n, self.n)?;
            delay_terms.push((entry.tau, a));
        }
        DelaySystem::new(a0, delay_terms, b, c, d)
    }

    /// Captures a system back into document form (row-major flattening).
    pub fn from_system(sys: &DelaySystem) -> SystemFile {
        let flatten = |m: &DMatrix<f64>| -> Vec<f64> {
            let mut out = Vec::with_capacity(m.nrows() * m.ncols());
            for i in 0..m.nrows() {
                for j in 0..m.ncols() {
                    out.push(m[(i, j)]);
                }
            }
            out
        };
        SystemFile {
            n: sys.n(),
            nu: sys.n_inputs(),
            ny: sys.n_outputs(),
            a0: flatten(sys.a0()),
            b: flatten(sys.b()),
            c: flatten(sys.c()),
            d: flatten(sys.d()),
            delays: sys
                .delays()
                .iter()
                .map(|t| DelayEntry {
                    tau: t.tau,
                    a: flatten(&t.a),
                })
                .collect(),
        }
    }
}

/// Parses a system from document text.
pub fn parse_system(text: &str) -> Result<DelaySystem> {
    let file: SystemFile = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    file.into_system()
}

/// Serializes a system to document text.
pub fn system_to_string(sys: &DelaySystem) -> String {
    toml::to_string(&SystemFile::from_system(sys)).expect("system serialization cannot fail")
}

/// Reads and parses a system file from disk.
pub fn load_system(path: &std::path::Path) -> Result<DelaySystem> {
    let text = std::fs::read_to_string(path)?;
    parse_system(&text)
}

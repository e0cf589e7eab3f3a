//! JSON matrix files.
//!
//! ```json
//! { "dims": [2, 2], "entries": [[re, im], ...] }
//! ```
//!
//! `entries` lists the `(Π dims)²` matrix elements in row-major order. Numbers
//! are written with 17 significant digits, so a written matrix reads back bit
//! for bit.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::matcore::{CMatrix, HermitianMatrix};
use crate::states::{validate_density, DensityMatrix};
use crate::tensor::TensorShape;

/// A parsed matrix file: the subsystem shape and the raw matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixFile {
    pub shape: TensorShape,
    pub matrix: CMatrix,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMatrixFile {
    dims: Vec<usize>,
    entries: Vec<[f64; 2]>,
}

impl MatrixFile {
    pub fn new(shape: TensorShape, matrix: CMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::NotSquare {
                rows: matrix.nrows(),
                cols: matrix.ncols(),
            });
        }
        shape.check_dim(matrix.nrows())?;
        Ok(Self { shape, matrix })
    }

    pub fn parse(text: &str) -> Result<Self> {
        let raw: RawMatrixFile =
            serde_json::from_str(text).map_err(|e| Error::MatrixFile(e.to_string()))?;
        let shape = TensorShape::new(raw.dims)?;
        let n = shape.total();
        if raw.entries.len() != n * n {
            return Err(Error::MatrixFile(format!(
                "dims {shape} need {} entries, found {}",
                n * n,
                raw.entries.len()
            )));
        }
        let matrix = CMatrix::from_row_iterator(
            n,
            n,
            raw.entries.iter().map(|[re, im]| Complex64::new(*re, *im)),
        );
        Ok(Self { shape, matrix })
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::MatrixFile(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn to_json(&self) -> String {
        let n = self.matrix.nrows();
        let mut out = String::from("{\n  \"dims\": [");
        let dims: Vec<String> = self.shape.dims().iter().map(|d| d.to_string()).collect();
        out.push_str(&dims.join(", "));
        out.push_str("],\n  \"entries\": [\n");
        for r in 0..n {
            for c in 0..n {
                let z = self.matrix[(r, c)];
                let last = r + 1 == n && c + 1 == n;
                let _ = writeln!(
                    out,
                    "    [{}, {}]{}",
                    format_f64(z.re),
                    format_f64(z.im),
                    if last { "" } else { "," }
                );
            }
        }
        out.push_str("  ]\n}\n");
        out
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json())
            .map_err(|e| Error::MatrixFile(format!("{}: {e}", path.display())))
    }

    pub fn hermitian(&self) -> Result<HermitianMatrix> {
        HermitianMatrix::new(self.matrix.clone())
    }

    /// Loads the matrix as a state: hermiticity, positivity and trace are checked.
    pub fn density(&self) -> Result<DensityMatrix> {
        validate_density(self.hermitian()?)
    }

    pub fn from_density(rho: &DensityMatrix, shape: &TensorShape) -> Result<Self> {
        Self::new(shape.clone(), rho.matrix().as_matrix().clone())
    }
}

/// 17 significant digits in scientific notation, which round-trips every `f64`.
fn format_f64(x: f64) -> String {
    if x == 0.0 {
        // keeps the sign of negative zero
        return if x.is_sign_negative() { "-0.0".into() } else { "0.0".into() };
    }
    format!("{x:.16e}")
}

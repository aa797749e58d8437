//! Complex matrices as JSON: row-major nested arrays of `[re, im]` pairs.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hermitian::CMatrix;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MatrixJson(pub Vec<Vec<[f64; 2]>>);

impl MatrixJson {
    pub fn to_matrix(&self) -> Result<CMatrix> {
        let rows = self.0.len();
        let cols = self.0.first().map_or(0, Vec::len);
        if let Some(bad) = self.0.iter().position(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch(format!(
                "matrix row {bad} has {} entries, row 0 has {cols}",
                self.0[bad].len()
            )));
        }
        if self.0.iter().flatten().flatten().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(CMatrix::from_fn(rows, cols, |i, j| {
            let [re, im] = self.0[i][j];
            Complex64::new(re, im)
        }))
    }

    pub fn from_matrix(m: &CMatrix) -> Self {
        MatrixJson(
            (0..m.nrows())
                .map(|i| {
                    (0..m.ncols())
                        .map(|j| [m[(i, j)].re, m[(i, j)].im])
                        .collect()
                })
                .collect(),
        )
    }
}

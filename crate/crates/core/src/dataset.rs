//! Dense row-major feature matrix and the feature manifest.

use alloc::string::String;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::Error;

/// Dense row-major `f64` matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    n_rows: usize,
    n_cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        Matrix {
            n_rows,
            n_cols,
            data: alloc::vec![0.0; n_rows * n_cols],
        }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let n_cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * n_cols);
        for r in rows {
            assert_eq!(r.len(), n_cols, "ragged rows");
            data.extend_from_slice(r);
        }
        Matrix {
            n_rows: rows.len(),
            n_cols,
            data,
        }
    }

    /// Take ownership of a flat row-major buffer.
    pub fn from_flat(n_rows: usize, n_cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), n_rows * n_cols);
        Matrix {
            n_rows,
            n_cols,
            data,
        }
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn is_empty(&self) -> bool {
        self.n_rows == 0
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n_cols..(i + 1) * self.n_cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.n_cols..(i + 1) * self.n_cols]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n_cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n_cols + j] = v;
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.n_cols.max(1))
    }

    pub fn push_row(&mut self, row: &[f64]) {
        assert_eq!(row.len(), self.n_cols, "row width mismatch");
        self.data.extend_from_slice(row);
        self.n_rows += 1;
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.n_rows).map(|i| self.get(i, j)).collect()
    }

    /// New matrix containing the given rows, in the given order.
    pub fn select_rows(&self, idx: &[usize]) -> Matrix {
        let mut out = Matrix {
            n_rows: 0,
            n_cols: self.n_cols,
            data: Vec::with_capacity(idx.len() * self.n_cols),
        };
        for &i in idx {
            out.push_row(self.row(i));
        }
        out
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }
}

/// Ordered list of feature names; embedded in model artifacts and checked at
/// predict time so a model can never be applied to a differently-laid-out
/// matrix.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureManifest {
    pub names: Vec<String>,
}

impl FeatureManifest {
    pub fn new(names: Vec<String>) -> Self {
        FeatureManifest { names }
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    /// FNV-1a over the newline-joined names.
    pub fn hash(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for (i, name) in self.names.iter().enumerate() {
            if i > 0 {
                h = (h ^ u64::from(b'\n')).wrapping_mul(0x100_0000_01b3);
            }
            for &b in name.as_bytes() {
                h = (h ^ u64::from(b)).wrapping_mul(0x100_0000_01b3);
            }
        }
        h
    }

    pub fn check_matches(&self, other: &FeatureManifest) -> Result<(), Error> {
        if self == other {
            Ok(())
        } else {
            Err(Error::ManifestMismatch {
                expected: self.names.join(","),
                got: other.names.join(","),
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use alloc::vec;

    #[test]
    fn select_rows_preserves_order() {
        let m = Matrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0], vec![5.0, 6.0]]);
        let s = m.select_rows(&[2, 0]);
        assert_eq!(s.row(0), &[5.0, 6.0]);
        assert_eq!(s.row(1), &[1.0, 2.0]);
    }

    #[test]
    fn manifest_hash_is_order_sensitive() {
        let a = FeatureManifest::new(vec!["x".to_string(), "y".to_string()]);
        let b = FeatureManifest::new(vec!["y".to_string(), "x".to_string()]);
        assert_ne!(a.hash(), b.hash());
        assert!(a.check_matches(&b).is_err());
        assert!(a.check_matches(&a.clone()).is_ok());
    }
}

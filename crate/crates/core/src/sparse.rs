use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Compressed sparse row matrix of document features.
///
/// Rows never store explicit zeros and column indices within a row are
/// strictly increasing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatrix {
    cols: usize,
    indptr: Vec<usize>,
    indices: Vec<u32>,
    values: Vec<f64>,
}

impl FeatureMatrix {
    pub fn empty(cols: usize) -> Self {
        FeatureMatrix {
            cols,
            indptr: vec![0],
            indices: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn from_dense(rows: &[Vec<f64>], cols: usize) -> Self {
        let mut m = FeatureMatrix::empty(cols);
        for row in rows {
            assert!(row.len() <= cols, "row wider than matrix");
            m.push_row(
                row.iter()
                    .enumerate()
                    .map(|(j, &v)| (j as u32, v))
                    .collect(),
            );
        }
        m
    }

    /// Appends a row given as `(column, value)` entries in any order.
    /// Duplicate columns are summed and zeros dropped.
    pub fn push_row(&mut self, mut entries: Vec<(u32, f64)>) {
        entries.sort_by_key(|&(c, _)| c);
        let mut last: Option<u32> = None;
        let start = self.indices.len();
        for (c, v) in entries {
            assert!((c as usize) < self.cols, "column {c} out of range");
            if last == Some(c) {
                *self.values.last_mut().expect("non-empty row") += v;
            } else {
                self.indices.push(c);
                self.values.push(v);
                last = Some(c);
            }
        }
        let mut keep = start;
        for k in start..self.indices.len() {
            if self.values[k] != 0.0 {
                self.indices[keep] = self.indices[k];
                self.values[keep] = self.values[k];
                keep += 1;
            }
        }
        self.indices.truncate(keep);
        self.values.truncate(keep);
        self.indptr.push(keep);
    }

    pub fn rows(&self) -> usize {
        self.indptr.len() - 1
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> (&[u32], &[f64]) {
        let (a, b) = (self.indptr[i], self.indptr[i + 1]);
        (&self.indices[a..b], &self.values[a..b])
    }

    pub fn get(&self, i: usize, col: u32) -> f64 {
        let (idx, val) = self.row(i);
        idx.binary_search(&col).map(|k| val[k]).unwrap_or(0.0)
    }

    pub fn row_norm(&self, i: usize) -> f64 {
        self.row(i).1.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn dot_row(&self, i: usize, dense: &[f64]) -> f64 {
        let (idx, val) = self.row(i);
        idx.iter()
            .zip(val)
            .map(|(&c, &v)| v * dense[c as usize])
            .sum()
    }

    /// New matrix holding the listed rows of `self`, in the given order.
    pub fn select(&self, rows: &[usize]) -> Self {
        let mut out = FeatureMatrix::empty(self.cols);
        out.extend_from(self, rows);
        out
    }

    /// Appends the listed rows of `other` (same column count).
    pub fn extend_from(&mut self, other: &FeatureMatrix, rows: &[usize]) {
        assert_eq!(self.cols, other.cols, "column mismatch");
        for &i in rows {
            let (idx, val) = other.row(i);
            self.indices.extend_from_slice(idx);
            self.values.extend_from_slice(val);
            self.indptr.push(self.indices.len());
        }
    }

    pub(crate) fn check_cols(&self, expected: usize) -> Result<()> {
        if self.cols != expected {
            return Err(Error::Shape {
                what: "feature columns",
                expected,
                actual: self.cols,
            });
        }
        Ok(())
    }
}

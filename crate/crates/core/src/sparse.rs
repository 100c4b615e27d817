//! Compressed sparse row storage for feature matrices.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A sparse row: strictly increasing indices, finite non-zero values.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SparseVector {
    pub dim: usize,
    pub indices: Vec<usize>,
    pub values: Vec<f64>,
}

impl SparseVector {
    /// Build from `(index, value)` pairs; sorts, sums duplicates and drops zeros.
    pub fn from_pairs(dim: usize, mut pairs: Vec<(usize, f64)>) -> Self {
        pairs.sort_by_key(|p| p.0);
        let mut indices = Vec::with_capacity(pairs.len());
        let mut values: Vec<f64> = Vec::with_capacity(pairs.len());
        for (i, v) in pairs {
            assert!(i < dim, "index {i} out of range for dimension {dim}");
            if indices.last() == Some(&i) {
                *values.last_mut().unwrap() += v;
            } else {
                indices.push(i);
                values.push(v);
            }
        }
        let mut out = SparseVector {
            dim,
            indices: Vec::with_capacity(indices.len()),
            values: Vec::with_capacity(values.len()),
        };
        for (i, v) in indices.into_iter().zip(values) {
            if v != 0.0 {
                out.indices.push(i);
                out.values.push(v);
            }
        }
        out
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn dot_dense(&self, dense: &[f64]) -> f64 {
        self.indices
            .iter()
            .zip(&self.values)
            .map(|(&i, &v)| v * dense[i])
            .sum()
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.dim];
        for (&i, &v) in self.indices.iter().zip(&self.values) {
            d[i] = v;
        }
        d
    }
}

/// A borrowed row of a [`SparseMatrix`].
#[derive(Debug, Clone, Copy)]
pub struct RowView<'a> {
    pub indices: &'a [usize],
    pub values: &'a [f64],
}

impl RowView<'_> {
    pub fn dot(&self, dense: &[f64]) -> f64 {
        self.indices
            .iter()
            .zip(self.values)
            .map(|(&i, &v)| v * dense[i])
            .sum()
    }

    /// `dense += scale * row`
    pub fn axpy_into(&self, scale: f64, dense: &mut [f64]) {
        for (&i, &v) in self.indices.iter().zip(self.values) {
            dense[i] += scale * v;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseMatrix {
    n_cols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrix {
    pub fn empty(n_cols: usize) -> Self {
        SparseMatrix {
            n_cols,
            indptr: vec![0],
            indices: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn from_rows(n_cols: usize, rows: impl IntoIterator<Item = SparseVector>) -> Result<Self> {
        let mut m = Self::empty(n_cols);
        for row in rows {
            m.push_row(row)?;
        }
        Ok(m)
    }

    /// Dense row-major input; zeros are dropped.
    pub fn from_dense(rows: &[Vec<f64>]) -> Result<Self> {
        let n_cols = rows.first().map_or(0, Vec::len);
        Self::from_rows(
            n_cols,
            rows.iter().map(|r| {
                SparseVector::from_pairs(n_cols, r.iter().copied().enumerate().collect())
            }),
        )
    }

    pub fn push_row(&mut self, row: SparseVector) -> Result<()> {
        if row.dim != self.n_cols {
            return Err(Error::Shape(format!(
                "row of dimension {} pushed into matrix with {} columns",
                row.dim, self.n_cols
            )));
        }
        self.indices.extend(row.indices);
        self.values.extend(row.values);
        self.indptr.push(self.indices.len());
        Ok(())
    }

    pub fn n_rows(&self) -> usize {
        self.indptr.len() - 1
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, r: usize) -> RowView<'_> {
        let (a, b) = (self.indptr[r], self.indptr[r + 1]);
        RowView {
            indices: &self.indices[a..b],
            values: &self.values[a..b],
        }
    }

    pub fn rows(&self) -> impl Iterator<Item = RowView<'_>> + '_ {
        (0..self.n_rows()).map(move |r| self.row(r))
    }

    pub fn row_vector(&self, r: usize) -> SparseVector {
        let v = self.row(r);
        SparseVector {
            dim: self.n_cols,
            indices: v.indices.to_vec(),
            values: v.values.to_vec(),
        }
    }

    /// Select rows by index, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> SparseMatrix {
        let mut m = Self::empty(self.n_cols);
        for &r in rows {
            let v = self.row(r);
            m.indices.extend_from_slice(v.indices);
            m.values.extend_from_slice(v.values);
            m.indptr.push(m.indices.len());
        }
        m
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        (0..self.n_rows())
            .map(|r| self.row_vector(r).to_dense())
            .collect()
    }

    /// `X v`
    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        self.rows().map(|r| r.dot(v)).collect()
    }

    /// `Xᵀ u`
    pub fn t_mul_vec(&self, u: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n_cols];
        for (r, &s) in self.rows().zip(u) {
            r.axpy_into(s, &mut out);
        }
        out
    }
}

//! Compressed sparse-row storage for data matrices.

use crate::error::{Error, Result};

/// A real matrix in compressed sparse-row (CSR) layout.
///
/// Invariants enforced at construction: offsets start at zero and are
/// nondecreasing, column indices are strictly increasing within a row and
/// below `n_cols`, and no explicit zeros are stored.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    n_rows: usize,
    n_cols: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<f64>,
}

/// Borrowed view of one stored row.
#[derive(Debug, Clone, Copy)]
pub struct SparseRow<'a> {
    pub indices: &'a [usize],
    pub values: &'a [f64],
}

impl SparseRow<'_> {
    pub fn dot(&self, x: &[f64]) -> f64 {
        self.indices
            .iter()
            .zip(self.values)
            .map(|(&j, &v)| v * x[j])
            .sum()
    }

    pub fn norm_sq(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }

    /// `out += alpha * row`.
    pub fn axpy(&self, alpha: f64, out: &mut [f64]) {
        for (&j, &v) in self.indices.iter().zip(self.values) {
            out[j] += alpha * v;
        }
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }
}

impl SparseMatrix {
    pub fn new(
        n_rows: usize,
        n_cols: usize,
        row_offsets: Vec<usize>,
        col_indices: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self> {
        if row_offsets.len() != n_rows + 1 {
            return Err(Error::arg(format!(
                "row_offsets has length {}, expected {}",
                row_offsets.len(),
                n_rows + 1
            )));
        }
        if row_offsets[0] != 0 {
            return Err(Error::arg("row_offsets[0] must be 0"));
        }
        if col_indices.len() != values.len() || row_offsets[n_rows] != values.len() {
            return Err(Error::arg(
                "last row offset, col_indices and values must have equal length",
            ));
        }
        for i in 0..n_rows {
            let (start, end) = (row_offsets[i], row_offsets[i + 1]);
            if end < start {
                return Err(Error::arg(format!("row_offsets decrease at row {i}")));
            }
            let cols = &col_indices[start..end];
            for (k, &j) in cols.iter().enumerate() {
                if j >= n_cols {
                    return Err(Error::arg(format!(
                        "row {i}: column {j} out of range (n_cols = {n_cols})"
                    )));
                }
                if k > 0 && cols[k - 1] >= j {
                    return Err(Error::arg(format!(
                        "row {i}: column indices not strictly increasing"
                    )));
                }
            }
            for &v in &values[start..end] {
                if v == 0.0 {
                    return Err(Error::arg(format!("row {i}: explicit zero stored")));
                }
                if !v.is_finite() {
                    return Err(Error::arg(format!("row {i}: non-finite value")));
                }
            }
        }
        Ok(SparseMatrix {
            n_rows,
            n_cols,
            row_offsets,
            col_indices,
            values,
        })
    }

    /// Builds a matrix from per-row `(column, value)` lists. Zero values are
    /// dropped; entries within a row may come in any order but must not repeat.
    pub fn from_rows(n_cols: usize, rows: Vec<Vec<(usize, f64)>>) -> Result<Self> {
        let mut row_offsets = Vec::with_capacity(rows.len() + 1);
        row_offsets.push(0);
        let mut col_indices = Vec::new();
        let mut values = Vec::new();
        for mut row in rows.into_iter() {
            row.sort_by_key(|&(j, _)| j);
            for (j, v) in row {
                if v != 0.0 {
                    col_indices.push(j);
                    values.push(v);
                }
            }
            row_offsets.push(values.len());
        }
        let n_rows = row_offsets.len() - 1;
        Self::new(n_rows, n_cols, row_offsets, col_indices, values)
    }

    /// Builds a matrix from dense rows, dropping zeros. All rows must share a length.
    pub fn from_dense(rows: &[Vec<f64>]) -> Result<Self> {
        let n_cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n_cols) {
            return Err(Error::arg("dense rows have unequal lengths"));
        }
        let sparse_rows = rows
            .iter()
            .map(|r| r.iter().copied().enumerate().collect())
            .collect();
        Self::from_rows(n_cols, sparse_rows)
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.col_indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn row(&self, i: usize) -> SparseRow<'_> {
        let (start, end) = (self.row_offsets[i], self.row_offsets[i + 1]);
        SparseRow {
            indices: &self.col_indices[start..end],
            values: &self.values[start..end],
        }
    }

    pub fn rows(&self) -> impl Iterator<Item = SparseRow<'_>> + '_ {
        (0..self.n_rows).map(move |i| self.row(i))
    }

    pub fn row_norm_sq(&self, i: usize) -> f64 {
        self.row(i).norm_sq()
    }

    /// Returns a copy with row `i` multiplied by `factors[i]`. Factors must be nonzero.
    pub fn scale_rows(&self, factors: &[f64]) -> Result<Self> {
        if factors.len() != self.n_rows {
            return Err(Error::arg("one scale factor per row required"));
        }
        let mut values = self.values.clone();
        for (i, &s) in factors.iter().enumerate() {
            if s == 0.0 || !s.is_finite() {
                return Err(Error::arg(format!("row {i}: invalid scale factor {s}")));
            }
            for v in &mut values[self.row_offsets[i]..self.row_offsets[i + 1]] {
                *v *= s;
            }
        }
        Self::new(
            self.n_rows,
            self.n_cols,
            self.row_offsets.clone(),
            self.col_indices.clone(),
            values,
        )
    }

    pub fn transpose(&self) -> Self {
        let mut counts = vec![0usize; self.n_cols + 1];
        for &j in &self.col_indices {
            counts[j + 1] += 1;
        }
        for j in 0..self.n_cols {
            counts[j + 1] += counts[j];
        }
        let offsets = counts.clone();
        let mut next = counts;
        let mut col_indices = vec![0; self.nnz()];
        let mut values = vec![0.0; self.nnz()];
        for i in 0..self.n_rows {
            let row = self.row(i);
            for (&j, &v) in row.indices.iter().zip(row.values) {
                let slot = next[j];
                col_indices[slot] = i;
                values[slot] = v;
                next[j] += 1;
            }
        }
        SparseMatrix {
            n_rows: self.n_cols,
            n_cols: self.n_rows,
            row_offsets: offsets,
            col_indices,
            values,
        }
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        (0..self.n_rows)
            .map(|i| {
                let mut dense = vec![0.0; self.n_cols];
                self.row(i).axpy(1.0, &mut dense);
                dense
            })
            .collect()
    }

    /// Keeps only the listed rows, in the given order.
    pub fn select_rows(&self, keep: &[usize]) -> Self {
        let mut row_offsets = Vec::with_capacity(keep.len() + 1);
        row_offsets.push(0);
        let mut col_indices = Vec::new();
        let mut values = Vec::new();
        for &i in keep {
            let row = self.row(i);
            col_indices.extend_from_slice(row.indices);
            values.extend_from_slice(row.values);
            row_offsets.push(values.len());
        }
        SparseMatrix {
            n_rows: keep.len(),
            n_cols: self.n_cols,
            row_offsets,
            col_indices,
            values,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_explicit_zero() {
        let err = SparseMatrix::new(1, 2, vec![0, 1], vec![0], vec![0.0]);
        assert!(err.is_err());
    }

    #[test]
    fn rejects_unsorted_columns() {
        let err = SparseMatrix::new(1, 3, vec![0, 2], vec![2, 1], vec![1.0, 1.0]);
        assert!(err.is_err());
    }

    #[test]
    fn rejects_out_of_range_column() {
        assert!(SparseMatrix::new(1, 2, vec![0, 1], vec![2], vec![1.0]).is_err());
    }

    #[test]
    fn from_dense_drops_zeros() {
        let m = SparseMatrix::from_dense(&[vec![0.0, 2.0], vec![3.0, 0.0]]).unwrap();
        assert_eq!(m.nnz(), 2);
        assert_eq!(m.row(0).indices, &[1]);
        assert_eq!(m.to_dense(), vec![vec![0.0, 2.0], vec![3.0, 0.0]]);
    }

    #[test]
    fn transpose_twice_is_identity() {
        let m = SparseMatrix::from_dense(&[vec![1.0, 0.0, 2.0], vec![0.0, 3.0, 4.0]]).unwrap();
        let t = m.transpose();
        assert_eq!(t.n_rows(), 3);
        assert_eq!(
            t.to_dense(),
            vec![vec![1.0, 0.0], vec![0.0, 3.0], vec![2.0, 4.0]]
        );
        assert_eq!(t.transpose(), m);
    }

    #[test]
    fn row_kernels() {
        let m = SparseMatrix::from_dense(&[vec![3.0, 0.0, 4.0]]).unwrap();
        let row = m.row(0);
        assert_eq!(row.norm_sq(), 25.0);
        assert_eq!(row.dot(&[1.0, 100.0, 1.0]), 7.0);
        let mut out = vec![1.0; 3];
        row.axpy(2.0, &mut out);
        assert_eq!(out, vec![7.0, 1.0, 9.0]);
    }
}

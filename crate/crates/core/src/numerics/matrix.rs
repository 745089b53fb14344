use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseMatrix {
    n_rows: usize,
    n_cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        DenseMatrix { n_rows, n_cols, data: vec![0.0; n_rows * n_cols] }
    }

    pub fn from_vec(n_rows: usize, n_cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n_rows * n_cols {
            return Err(Error::validation(format!(
                "dense matrix data has {} entries, expected {n_rows}x{n_cols}",
                data.len()
            )));
        }
        Ok(DenseMatrix { n_rows, n_cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n_cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n_cols) {
            return Err(Error::validation("ragged rows"));
        }
        Ok(DenseMatrix { n_rows: rows.len(), n_cols, data: rows.concat() })
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.n_cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.n_cols + c] = v;
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.n_cols..(r + 1) * self.n_cols]
    }

    #[inline]
    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.n_cols..(r + 1) * self.n_cols]
    }

    /// Mutable borrows of two distinct rows `i < j`.
    pub(crate) fn two_rows_mut(&mut self, i: usize, j: usize) -> (&mut [f64], &mut [f64]) {
        assert!(i < j, "two_rows_mut needs i < j");
        let nc = self.n_cols;
        let (a, b) = self.data.split_at_mut(j * nc);
        (&mut a[i * nc..(i + 1) * nc], &mut b[..nc])
    }

    pub fn column(&self, c: usize) -> Vec<f64> {
        (0..self.n_rows).map(|r| self.get(r, c)).collect()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn transpose(&self) -> DenseMatrix {
        let mut t = DenseMatrix::zeros(self.n_cols, self.n_rows);
        for r in 0..self.n_rows {
            for c in 0..self.n_cols {
                t.set(c, r, self.get(r, c));
            }
        }
        t
    }

    /// `self * other`.
    pub fn matmul(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.n_cols, other.n_rows, "matmul shape mismatch");
        let mut out = DenseMatrix::zeros(self.n_rows, other.n_cols);
        for r in 0..self.n_rows {
            let out_row = &mut out.data[r * other.n_cols..(r + 1) * other.n_cols];
            for (k, &a) in self.row(r).iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                for (o, &b) in out_row.iter_mut().zip(other.row(k)) {
                    *o += a * b;
                }
            }
        }
        out
    }

    /// Keeps the listed rows, in order.
    pub fn select_rows(&self, rows: &[usize]) -> DenseMatrix {
        let mut data = Vec::with_capacity(rows.len() * self.n_cols);
        for &r in rows {
            data.extend_from_slice(self.row(r));
        }
        DenseMatrix { n_rows: rows.len(), n_cols: self.n_cols, data }
    }

    /// Keeps the listed columns, in order.
    pub fn select_columns(&self, cols: &[usize]) -> DenseMatrix {
        let mut data = Vec::with_capacity(self.n_rows * cols.len());
        for r in 0..self.n_rows {
            let row = self.row(r);
            data.extend(cols.iter().map(|&c| row[c]));
        }
        DenseMatrix { n_rows: self.n_rows, n_cols: cols.len(), data }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn to_csr(&self) -> CsrMatrix {
        let mut b = CsrBuilder::new(self.n_cols);
        for r in 0..self.n_rows {
            b.push_row(self.row(r).iter().enumerate().map(|(c, &v)| (c, v)));
        }
        b.finish()
    }
}

/// Compressed sparse row matrix. Column indices within a row are strictly
/// increasing and no stored value is zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsrMatrix {
    n_rows: usize,
    n_cols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

/// Row-at-a-time CSR construction.
pub struct CsrBuilder {
    n_cols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
    scratch: Vec<(usize, f64)>,
}

impl CsrBuilder {
    pub fn new(n_cols: usize) -> Self {
        CsrBuilder { n_cols, indptr: vec![0], indices: Vec::new(), values: Vec::new(), scratch: Vec::new() }
    }

    /// Appends a row from (column, value) pairs in any order; duplicate
    /// columns are summed and zeros dropped.
    pub fn push_row(&mut self, entries: impl IntoIterator<Item = (usize, f64)>) {
        self.scratch.clear();
        self.scratch.extend(entries);
        self.scratch.sort_unstable_by_key(|e| e.0);
        let mut i = 0;
        while i < self.scratch.len() {
            let col = self.scratch[i].0;
            debug_assert!(col < self.n_cols);
            let mut v = 0.0;
            while i < self.scratch.len() && self.scratch[i].0 == col {
                v += self.scratch[i].1;
                i += 1;
            }
            if v != 0.0 {
                self.indices.push(col);
                self.values.push(v);
            }
        }
        self.indptr.push(self.indices.len());
    }

    pub fn finish(self) -> CsrMatrix {
        CsrMatrix {
            n_rows: self.indptr.len() - 1,
            n_cols: self.n_cols,
            indptr: self.indptr,
            indices: self.indices,
            values: self.values,
        }
    }
}

impl CsrMatrix {
    pub fn from_dense_rows(rows: &[Vec<f64>]) -> Result<Self> {
        Ok(DenseMatrix::from_rows(rows)?.to_csr())
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

    /// (column indices, values) of row `r`.
    #[inline]
    pub fn row(&self, r: usize) -> (&[usize], &[f64]) {
        let (a, b) = (self.indptr[r], self.indptr[r + 1]);
        (&self.indices[a..b], &self.values[a..b])
    }

    pub fn row_dot(&self, r: usize, w: &[f64]) -> f64 {
        let (idx, val) = self.row(r);
        idx.iter().zip(val).map(|(&c, &v)| v * w[c]).sum()
    }

    pub fn row_sq_norm(&self, r: usize) -> f64 {
        self.row(r).1.iter().map(|v| v * v).sum()
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut d = DenseMatrix::zeros(self.n_rows, self.n_cols);
        for r in 0..self.n_rows {
            let (idx, val) = self.row(r);
            for (&c, &v) in idx.iter().zip(val) {
                d.set(r, c, v);
            }
        }
        d
    }

    pub fn select_rows(&self, rows: &[usize]) -> CsrMatrix {
        let mut b = CsrBuilder::new(self.n_cols);
        for &r in rows {
            let (idx, val) = self.row(r);
            b.push_row(idx.iter().copied().zip(val.iter().copied()));
        }
        b.finish()
    }

    /// `self * x` for dense `x` (n_cols × l).
    pub fn mul_dense(&self, x: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.n_cols, x.n_rows(), "sparse matmul shape mismatch");
        let l = x.n_cols();
        let mut out = DenseMatrix::zeros(self.n_rows, l);
        for r in 0..self.n_rows {
            let (idx, val) = self.row(r);
            let out_row = out.row_mut(r);
            for (&c, &v) in idx.iter().zip(val) {
                for (o, &b) in out_row.iter_mut().zip(x.row(c)) {
                    *o += v * b;
                }
            }
        }
        out
    }

    /// `selfᵀ * y` for dense `y` (n_rows × l).
    pub fn tmul_dense(&self, y: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.n_rows, y.n_rows(), "sparse tmatmul shape mismatch");
        let l = y.n_cols();
        let mut out = DenseMatrix::zeros(self.n_cols, l);
        for r in 0..self.n_rows {
            let (idx, val) = self.row(r);
            let y_row = y.row(r);
            for (&c, &v) in idx.iter().zip(val) {
                for (o, &b) in out.row_mut(c).iter_mut().zip(y_row) {
                    *o += v * b;
                }
            }
        }
        out
    }

    /// Column means.
    pub fn column_means(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.n_cols];
        for (&c, &v) in self.indices.iter().zip(&self.values) {
            sums[c] += v;
        }
        let n = self.n_rows.max(1) as f64;
        sums.iter().map(|s| s / n).collect()
    }

    /// Fraction of entries that are zero.
    pub fn zero_fraction(&self) -> f64 {
        let total = self.n_rows * self.n_cols;
        if total == 0 {
            return 0.0;
        }
        1.0 - self.nnz() as f64 / total as f64
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

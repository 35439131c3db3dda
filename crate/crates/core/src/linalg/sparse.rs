//! Compressed sparse column storage for term-document data.

use nalgebra::{DMatrix, DVector};

use crate::error::{dim_err, Error, Result};

/// Sparse matrix in compressed-column layout.
///
/// Row indices inside each column are strictly increasing and no explicit
/// zeros are stored.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    nrows: usize,
    ncols: usize,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrix {
    /// An all-zero matrix.
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            col_ptr: vec![0; ncols + 1],
            row_idx: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            nrows: n,
            ncols: n,
            col_ptr: (0..=n).collect(),
            row_idx: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    /// Builds a canonical matrix from raw CSC arrays, validating the layout.
    pub fn from_csc(
        nrows: usize,
        ncols: usize,
        col_ptr: Vec<usize>,
        row_idx: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self> {
        if col_ptr.len() != ncols + 1 || col_ptr[0] != 0 {
            return Err(dim_err("column pointer array has wrong length"));
        }
        let nnz = *col_ptr.last().unwrap();
        if row_idx.len() != nnz || values.len() != nnz {
            return Err(dim_err("nnz inconsistent with pointer array"));
        }
        for j in 0..ncols {
            if col_ptr[j] > col_ptr[j + 1] {
                return Err(Error::InvalidArgument("column pointers decrease".into()));
            }
            let rows = &row_idx[col_ptr[j]..col_ptr[j + 1]];
            if rows.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidArgument(format!(
                    "row indices of column {j} not strictly increasing"
                )));
            }
            if rows.last().is_some_and(|&r| r >= nrows) {
                return Err(dim_err(format!("row index out of range in column {j}")));
            }
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("sparse matrix"));
        }
        let mut m = Self {
            nrows,
            ncols,
            col_ptr,
            row_idx,
            values,
        };
        m.drop_zeros();
        Ok(m)
    }

    /// Builds a matrix from (row, col, value) triplets. Duplicate positions
    /// are rejected.
    pub fn from_triplets(
        nrows: usize,
        ncols: usize,
        triplets: &[(usize, usize, f64)],
    ) -> Result<Self> {
        let mut entries: Vec<(usize, usize, f64)> = triplets.to_vec();
        for &(i, j, v) in &entries {
            if i >= nrows || j >= ncols {
                return Err(dim_err(format!(
                    "entry ({i}, {j}) outside {nrows}x{ncols} matrix"
                )));
            }
            if !v.is_finite() {
                return Err(Error::NonFinite("sparse matrix"));
            }
        }
        entries.sort_by_key(|&(i, j, _)| (j, i));
        if let Some(w) = entries
            .windows(2)
            .find(|w| w[0].0 == w[1].0 && w[0].1 == w[1].1)
        {
            return Err(Error::InvalidArgument(format!(
                "duplicate entry at ({}, {})",
                w[0].0, w[0].1
            )));
        }
        let mut col_ptr = vec![0usize; ncols + 1];
        for &(_, j, _) in &entries {
            col_ptr[j + 1] += 1;
        }
        for j in 0..ncols {
            col_ptr[j + 1] += col_ptr[j];
        }
        let row_idx = entries.iter().map(|e| e.0).collect();
        let values = entries.iter().map(|e| e.2).collect();
        let mut m = Self {
            nrows,
            ncols,
            col_ptr,
            row_idx,
            values,
        };
        m.drop_zeros();
        Ok(m)
    }

    /// Sparsifies a dense matrix, dropping exact zeros.
    pub fn from_dense(d: &DMatrix<f64>) -> Self {
        let mut col_ptr = Vec::with_capacity(d.ncols() + 1);
        let mut row_idx = Vec::new();
        let mut values = Vec::new();
        col_ptr.push(0);
        for j in 0..d.ncols() {
            for i in 0..d.nrows() {
                let v = d[(i, j)];
                if v != 0.0 {
                    row_idx.push(i);
                    values.push(v);
                }
            }
            col_ptr.push(row_idx.len());
        }
        Self {
            nrows: d.nrows(),
            ncols: d.ncols(),
            col_ptr,
            row_idx,
            values,
        }
    }

    fn drop_zeros(&mut self) {
        if !self.values.contains(&0.0) {
            return;
        }
        let mut w = 0;
        let mut start = 0;
        for j in 0..self.ncols {
            let end = self.col_ptr[j + 1];
            for idx in start..end {
                if self.values[idx] != 0.0 {
                    self.row_idx[w] = self.row_idx[idx];
                    self.values[w] = self.values[idx];
                    w += 1;
                }
            }
            start = end;
            self.col_ptr[j + 1] = w;
        }
        self.row_idx.truncate(w);
        self.values.truncate(w);
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.nrows, self.ncols)
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn col_ptr(&self) -> &[usize] {
        &self.col_ptr
    }

    pub fn row_indices(&self) -> &[usize] {
        &self.row_idx
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Row indices and values of column `j`.
    pub fn column(&self, j: usize) -> (&[usize], &[f64]) {
        let r = self.col_ptr[j]..self.col_ptr[j + 1];
        (&self.row_idx[r.clone()], &self.values[r])
    }

    /// Iterates over stored entries as (row, col, value).
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.ncols).flat_map(move |j| {
            let (rows, vals) = self.column(j);
            rows.iter().zip(vals).map(move |(&i, &v)| (i, j, v))
        })
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut d = DMatrix::zeros(self.nrows, self.ncols);
        for (i, j, v) in self.triplets() {
            d[(i, j)] = v;
        }
        d
    }

    pub fn transpose(&self) -> Self {
        let mut count = vec![0usize; self.nrows + 1];
        for &i in &self.row_idx {
            count[i + 1] += 1;
        }
        for i in 0..self.nrows {
            count[i + 1] += count[i];
        }
        let col_ptr = count.clone();
        let mut next = count;
        let mut row_idx = vec![0; self.nnz()];
        let mut values = vec![0.0; self.nnz()];
        for (i, j, v) in self.triplets() {
            let dst = next[i];
            row_idx[dst] = j;
            values[dst] = v;
            next[i] += 1;
        }
        Self {
            nrows: self.ncols,
            ncols: self.nrows,
            col_ptr,
            row_idx,
            values,
        }
    }

    /// Columns `range` as a new matrix.
    pub fn columns(&self, range: std::ops::Range<usize>) -> Result<Self> {
        if range.start > range.end || range.end > self.ncols {
            return Err(dim_err(format!(
                "column range {range:?} outside 0..{}",
                self.ncols
            )));
        }
        let lo = self.col_ptr[range.start];
        let hi = self.col_ptr[range.end];
        Ok(Self {
            nrows: self.nrows,
            ncols: range.len(),
            col_ptr: self.col_ptr[range.start..=range.end]
                .iter()
                .map(|p| p - lo)
                .collect(),
            row_idx: self.row_idx[lo..hi].to_vec(),
            values: self.values[lo..hi].to_vec(),
        })
    }

    /// Applies `f` to every stored value; entries mapped to zero are dropped.
    pub fn map_values(&self, mut f: impl FnMut(usize, usize, f64) -> f64) -> Self {
        let mut out = self.clone();
        for j in 0..self.ncols {
            for idx in self.col_ptr[j]..self.col_ptr[j + 1] {
                out.values[idx] = f(self.row_idx[idx], j, self.values[idx]);
            }
        }
        out.drop_zeros();
        out
    }

    /// Number of stored entries in each row.
    pub fn row_counts(&self) -> Vec<usize> {
        let mut c = vec![0; self.nrows];
        for &i in &self.row_idx {
            c[i] += 1;
        }
        c
    }

    /// `A x`.
    pub fn spmv(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        if x.len() != self.ncols {
            return Err(dim_err(format!(
                "spmv: matrix has {} columns, vector has {} entries",
                self.ncols,
                x.len()
            )));
        }
        let mut y = DVector::zeros(self.nrows);
        for j in 0..self.ncols {
            let xj = x[j];
            if xj == 0.0 {
                continue;
            }
            let (rows, vals) = self.column(j);
            for (&i, &v) in rows.iter().zip(vals) {
                y[i] += v * xj;
            }
        }
        Ok(y)
    }

    /// `Aᵀ y`.
    pub fn spmv_t(&self, y: &DVector<f64>) -> Result<DVector<f64>> {
        if y.len() != self.nrows {
            return Err(dim_err(format!(
                "spmv_t: matrix has {} rows, vector has {} entries",
                self.nrows,
                y.len()
            )));
        }
        let x = (0..self.ncols)
            .map(|j| {
                let (rows, vals) = self.column(j);
                rows.iter().zip(vals).map(|(&i, &v)| v * y[i]).sum()
            })
            .collect::<Vec<f64>>();
        Ok(DVector::from_vec(x))
    }

    /// `A X` for dense `X`.
    pub fn mul_dense(&self, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        if x.nrows() != self.ncols {
            return Err(dim_err(format!(
                "sparse {}x{} times dense {}x{}",
                self.nrows,
                self.ncols,
                x.nrows(),
                x.ncols()
            )));
        }
        let mut out = DMatrix::zeros(self.nrows, x.ncols());
        for c in 0..x.ncols() {
            let xc = x.column(c);
            let mut oc = out.column_mut(c);
            for j in 0..self.ncols {
                let xj = xc[j];
                if xj == 0.0 {
                    continue;
                }
                let (rows, vals) = self.column(j);
                for (&i, &v) in rows.iter().zip(vals) {
                    oc[i] += v * xj;
                }
            }
        }
        Ok(out)
    }

    /// `Aᵀ X` for dense `X`.
    pub fn t_mul_dense(&self, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        if x.nrows() != self.nrows {
            return Err(dim_err(format!(
                "sparse transpose {}x{} times dense {}x{}",
                self.ncols,
                self.nrows,
                x.nrows(),
                x.ncols()
            )));
        }
        let mut out = DMatrix::zeros(self.ncols, x.ncols());
        for c in 0..x.ncols() {
            let xc = x.column(c);
            for j in 0..self.ncols {
                let (rows, vals) = self.column(j);
                out[(j, c)] = rows.iter().zip(vals).map(|(&i, &v)| v * xc[i]).sum();
            }
        }
        Ok(out)
    }
}

/// Sparse vector, used for queries.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseVector {
    dim: usize,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl SparseVector {
    /// Builds a vector from (index, value) pairs; duplicate indices are summed
    /// and zeros dropped.
    pub fn new(dim: usize, entries: &[(usize, f64)]) -> Result<Self> {
        let mut e = entries.to_vec();
        if let Some(&(i, _)) = e.iter().find(|(i, _)| *i >= dim) {
            return Err(dim_err(format!("index {i} outside vector of length {dim}")));
        }
        if e.iter().any(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite("sparse vector"));
        }
        e.sort_by_key(|&(i, _)| i);
        let mut indices: Vec<usize> = Vec::with_capacity(e.len());
        let mut values: Vec<f64> = Vec::with_capacity(e.len());
        for (i, v) in e {
            if indices.last() == Some(&i) {
                *values.last_mut().unwrap() += v;
            } else {
                indices.push(i);
                values.push(v);
            }
        }
        let (indices, values) = indices
            .into_iter()
            .zip(values)
            .filter(|&(_, v)| v != 0.0)
            .unzip();
        Ok(Self {
            dim,
            indices,
            values,
        })
    }

    pub fn from_dense(x: &DVector<f64>) -> Self {
        let (indices, values) = x
            .iter()
            .enumerate()
            .filter(|(_, &v)| v != 0.0)
            .map(|(i, &v)| (i, v))
            .unzip();
        Self {
            dim: x.len(),
            indices,
            values,
        }
    }

    /// Column `j` of a sparse matrix.
    pub fn from_column(a: &SparseMatrix, j: usize) -> Self {
        let (rows, vals) = a.column(j);
        Self {
            dim: a.nrows(),
            indices: rows.to_vec(),
            values: vals.to_vec(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn to_dense(&self) -> DVector<f64> {
        let mut x = DVector::zeros(self.dim);
        for (&i, &v) in self.indices.iter().zip(&self.values) {
            x[i] = v;
        }
        x
    }

    /// `Mᵀ x` for dense `M` with as many rows as this vector has entries.
    pub fn t_mul_dense(&self, m: &DMatrix<f64>) -> Result<DVector<f64>> {
        if m.nrows() != self.dim {
            return Err(dim_err(format!(
                "vector of length {} against matrix with {} rows",
                self.dim,
                m.nrows()
            )));
        }
        Ok(DVector::from_fn(m.ncols(), |c, _| {
            self.indices
                .iter()
                .zip(&self.values)
                .map(|(&i, &v)| m[(i, c)] * v)
                .sum()
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn identity_spmv_is_identity() {
        let a = SparseMatrix::identity(4);
        let x = DVector::from_vec(vec![1.0, -2.0, 3.5, 0.25]);
        assert_eq!(a.spmv(&x).unwrap(), x);
        assert_eq!(a.spmv_t(&x).unwrap(), x);
    }

    #[test]
    fn single_entry() {
        let a = SparseMatrix::from_triplets(3, 2, &[(1, 0, 5.0)]).unwrap();
        let y = a.spmv(&DVector::from_vec(vec![1.0, 0.0])).unwrap();
        assert_eq!(y, DVector::from_vec(vec![0.0, 5.0, 0.0]));
    }

    #[test]
    fn dimension_errors() {
        let a = SparseMatrix::zeros(3, 2);
        assert!(a.spmv(&DVector::zeros(3)).is_err());
        assert!(a.spmv_t(&DVector::zeros(2)).is_err());
        assert!(a.mul_dense(&DMatrix::zeros(3, 1)).is_err());
    }

    #[test]
    fn triplets_reject_duplicates_and_drop_zeros() {
        assert!(SparseMatrix::from_triplets(2, 2, &[(0, 0, 1.0), (0, 0, 2.0)]).is_err());
        assert!(SparseMatrix::from_triplets(2, 2, &[(2, 0, 1.0)]).is_err());
        let a = SparseMatrix::from_triplets(2, 2, &[(0, 0, 0.0), (1, 1, 2.0)]).unwrap();
        assert_eq!(a.nnz(), 1);
    }

    #[test]
    fn csc_validation() {
        assert!(SparseMatrix::from_csc(2, 1, vec![0, 2], vec![1, 0], vec![1.0, 1.0]).is_err());
        assert!(SparseMatrix::from_csc(2, 1, vec![0, 1], vec![5], vec![1.0]).is_err());
        let a = SparseMatrix::from_csc(2, 1, vec![0, 2], vec![0, 1], vec![0.0, 3.0]).unwrap();
        assert_eq!(a.nnz(), 1);
        assert_eq!(a.row_indices(), &[1]);
    }

    #[test]
    fn column_slice_and_transpose() {
        let d = DMatrix::from_row_slice(2, 3, &[1.0, 0.0, 2.0, 0.0, 3.0, 4.0]);
        let a = SparseMatrix::from_dense(&d);
        assert_eq!(a.columns(1..3).unwrap().to_dense(), d.columns(1, 2).into_owned());
        assert_eq!(a.transpose().to_dense(), d.transpose());
        assert!(a.columns(2..4).is_err());
    }

    #[test]
    fn sparse_vector_sums_duplicates() {
        let v = SparseVector::new(4, &[(2, 1.0), (0, 3.0), (2, 1.5), (1, 0.0)]).unwrap();
        assert_eq!(v.indices(), &[0, 2]);
        assert_eq!(v.values(), &[3.0, 2.5]);
        assert!(SparseVector::new(2, &[(2, 1.0)]).is_err());
    }

    fn random_sparse() -> impl Strategy<Value = SparseMatrix> {
        (1usize..12, 1usize..12).prop_flat_map(|(m, n)| {
            proptest::collection::vec(prop_oneof![3 => Just(0.0), 1 => -5.0f64..5.0], m * n)
                .prop_map(move |vals| SparseMatrix::from_dense(&DMatrix::from_vec(m, n, vals)))
        })
    }

    proptest! {
        #[test]
        fn spmv_matches_dense(a in random_sparse(), seed in any::<u64>()) {
            let x = DVector::from_fn(a.ncols(), |i, _| ((i as u64 ^ seed) % 17) as f64 - 8.0);
            let dense = a.to_dense() * &x;
            let sp = a.spmv(&x).unwrap();
            prop_assert!((dense - sp).amax() <= 1e-13);
        }

        #[test]
        fn adjoint_identity(a in random_sparse(), seed in any::<u64>()) {
            let x = DVector::from_fn(a.ncols(), |i, _| ((i as u64 + 3).wrapping_mul(seed) % 11) as f64 * 0.3 - 1.0);
            let y = DVector::from_fn(a.nrows(), |i, _| ((i as u64 + 7).wrapping_mul(seed) % 13) as f64 * 0.2 - 1.2);
            let lhs = y.dot(&a.spmv(&x).unwrap());
            let rhs = a.spmv_t(&y).unwrap().dot(&x);
            prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()));
        }

        #[test]
        fn dense_products_match(a in random_sparse()) {
            let x = DMatrix::from_fn(a.ncols(), 3, |i, j| (i + 2 * j) as f64 * 0.5 - 1.0);
            prop_assert!((a.mul_dense(&x).unwrap() - a.to_dense() * &x).amax() <= 1e-12);
            let y = DMatrix::from_fn(a.nrows(), 2, |i, j| (i * 3 + j) as f64 * 0.25 - 2.0);
            prop_assert!((a.t_mul_dense(&y).unwrap() - a.to_dense().transpose() * &y).amax() <= 1e-12);
        }
    }
}

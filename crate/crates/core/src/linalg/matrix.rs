use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::dims(rows * cols, data.len()));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != cols) {
            return Err(Error::dims(cols, bad.len()));
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data: rows.concat(),
        })
    }

    pub fn from_diag(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len(), values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn set_col(&mut self, j: usize, values: &[f64]) {
        for (i, &v) in values.iter().enumerate() {
            self[(i, j)] = v;
        }
    }

    /// First `k` columns.
    pub fn leading_cols(&self, k: usize) -> Matrix {
        Matrix::from_fn(self.rows, k, |i, j| self[(i, j)])
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    /// `self · other`. Panics on inner-dimension mismatch.
    pub fn matmul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "matmul inner dimensions");
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let out_row = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for (p, &a) in self.row(i).iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                for (o, &b) in out_row.iter_mut().zip(other.row(p)) {
                    *o += a * b;
                }
            }
        }
        out
    }

    /// `selfᵀ · other` without materializing the transpose.
    pub fn t_matmul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.rows, other.rows, "t_matmul row counts");
        let mut out = Matrix::zeros(self.cols, other.cols);
        for p in 0..self.rows {
            let b_row = other.row(p);
            for (i, &a) in self.row(p).iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                let out_row = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (o, &b) in out_row.iter_mut().zip(b_row) {
                    *o += a * b;
                }
            }
        }
        out
    }

    /// Scales column `j` by `factors[j]`.
    pub fn scale_cols(&self, factors: &[f64]) -> Matrix {
        Matrix::from_fn(self.rows, self.cols, |i, j| self[(i, j)] * factors[j])
    }

    pub fn sub(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.shape(), other.shape());
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        assert_eq!(self.shape(), other.shape());
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

/// Sparse matrix of observed cells with row and column traversal.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    rows: usize,
    cols: usize,
    by_row: Vec<Vec<(usize, f64)>>,
    by_col: Vec<Vec<(usize, f64)>>,
    nnz: usize,
}

impl SparseMatrix {
    /// Later triplets for the same cell replace earlier ones.
    pub fn from_triplets(
        rows: usize,
        cols: usize,
        triplets: impl IntoIterator<Item = (usize, usize, f64)>,
    ) -> Result<Self> {
        let mut cells = std::collections::BTreeMap::new();
        for (i, j, v) in triplets {
            if i >= rows || j >= cols {
                return Err(Error::dims(format!("cell within {rows}x{cols}"), format!("({i}, {j})")));
            }
            if !v.is_finite() {
                return Err(Error::InvalidArgument(format!("non-finite entry at ({i}, {j})")));
            }
            cells.insert((i, j), v);
        }
        let mut by_row = vec![Vec::new(); rows];
        let mut by_col = vec![Vec::new(); cols];
        for (&(i, j), &v) in &cells {
            by_row[i].push((j, v));
            by_col[j].push((i, v));
        }
        Ok(Self {
            rows,
            cols,
            by_row,
            by_col,
            nnz: cells.len(),
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.nnz
    }

    pub fn row(&self, i: usize) -> &[(usize, f64)] {
        &self.by_row[i]
    }

    pub fn col(&self, j: usize) -> &[(usize, f64)] {
        &self.by_col[j]
    }

    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        let row = &self.by_row[i];
        row.binary_search_by_key(&j, |&(c, _)| c).ok().map(|p| row[p].1)
    }

    /// Dense copy with unobserved cells set to zero.
    pub fn to_dense(&self) -> Matrix {
        let mut m = Matrix::zeros(self.rows, self.cols);
        for (i, row) in self.by_row.iter().enumerate() {
            for &(j, v) in row {
                m[(i, j)] = v;
            }
        }
        m
    }
}

/// A linear map that can be applied to dense blocks, which is all the
/// randomized SVD needs from its input.
pub trait LinearOperator {
    fn nrows(&self) -> usize;
    fn ncols(&self) -> usize;
    /// `A · x`
    fn apply(&self, x: &Matrix) -> Matrix;
    /// `Aᵀ · x`
    fn apply_transpose(&self, x: &Matrix) -> Matrix;
}

impl LinearOperator for Matrix {
    fn nrows(&self) -> usize {
        self.rows
    }
    fn ncols(&self) -> usize {
        self.cols
    }
    fn apply(&self, x: &Matrix) -> Matrix {
        self.matmul(x)
    }
    fn apply_transpose(&self, x: &Matrix) -> Matrix {
        self.t_matmul(x)
    }
}

impl LinearOperator for SparseMatrix {
    fn nrows(&self) -> usize {
        self.rows
    }
    fn ncols(&self) -> usize {
        self.cols
    }
    fn apply(&self, x: &Matrix) -> Matrix {
        assert_eq!(self.cols, x.rows());
        let mut out = Matrix::zeros(self.rows, x.cols());
        for (i, row) in self.by_row.iter().enumerate() {
            let out_row = out.row_mut(i);
            for &(j, a) in row {
                for (o, &b) in out_row.iter_mut().zip(x.row(j)) {
                    *o += a * b;
                }
            }
        }
        out
    }
    fn apply_transpose(&self, x: &Matrix) -> Matrix {
        assert_eq!(self.rows, x.rows());
        let mut out = Matrix::zeros(self.cols, x.cols());
        for (j, col) in self.by_col.iter().enumerate() {
            let out_row = out.row_mut(j);
            for &(i, a) in col {
                for (o, &b) in out_row.iter_mut().zip(x.row(i)) {
                    *o += a * b;
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn products() {
        let a = Matrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0], vec![5.0, 6.0]]).unwrap();
        let b = Matrix::from_rows(&[vec![1.0, 0.0, 2.0], vec![0.0, 1.0, 1.0]]).unwrap();
        let ab = a.matmul(&b);
        assert_eq!(ab.row(0), &[1.0, 2.0, 4.0]);
        assert_eq!(ab.row(2), &[5.0, 6.0, 16.0]);
        assert_eq!(a.t_matmul(&a), a.transpose().matmul(&a));
    }

    #[test]
    fn sparse_matches_dense() {
        let s = SparseMatrix::from_triplets(3, 2, [(0, 1, 2.0), (2, 0, -1.0), (1, 1, 3.0)]).unwrap();
        let d = s.to_dense();
        let x = Matrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        assert_eq!(s.apply(&x), d.matmul(&x));
        let y = Matrix::from_rows(&[vec![1.0], vec![2.0], vec![3.0]]).unwrap();
        assert_eq!(s.apply_transpose(&y), d.t_matmul(&y));
        assert_eq!(s.get(1, 1), Some(3.0));
        assert_eq!(s.get(1, 0), None);
        assert_eq!(s.col(1), &[(0, 2.0), (1, 3.0)]);
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(Matrix::from_vec(2, 2, vec![1.0]).is_err());
        assert!(Matrix::from_rows(&[vec![1.0], vec![1.0, 2.0]]).is_err());
        assert!(SparseMatrix::from_triplets(1, 1, [(1, 0, 1.0)]).is_err());
    }
}

//! Row-major matrix of `f64`, sized for small dense networks.
//!
//! Batches are stored one row per sample, so a batch of nine-dimensional
//! feature rows is an `n x 9` matrix.

use serde::{Deserialize, Serialize};

use super::NnError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
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

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self, NnError> {
        if data.len() != rows * cols {
            return Err(NnError::Shape {
                context: "Matrix::from_vec".into(),
                expected: format!("{} values for {rows}x{cols}", rows * cols),
                actual: format!("{}", data.len()),
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, NnError> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != cols {
                return Err(NnError::Shape {
                    context: "Matrix::from_rows".into(),
                    expected: format!("row of width {cols}"),
                    actual: format!("row {i} has width {}", r.len()),
                });
            }
            data.extend_from_slice(r);
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, value: f64) {
        self.data[r * self.cols + c] = value;
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_iter(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.cols)
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// `self (m x k) * other (k x n) -> m x n`.
    pub fn matmul(&self, other: &Matrix) -> Result<Matrix, NnError> {
        if self.cols != other.rows {
            return Err(NnError::Shape {
                context: "matmul".into(),
                expected: format!("lhs cols = rhs rows ({})", self.cols),
                actual: format!("{}", other.rows),
            });
        }
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let lhs = self.row(i);
            let dst = out.row_mut(i);
            for (k, &l) in lhs.iter().enumerate() {
                if l == 0.0 {
                    continue;
                }
                let rhs = other.row(k);
                for (d, &r) in dst.iter_mut().zip(rhs) {
                    *d += l * r;
                }
            }
        }
        Ok(out)
    }

    /// `self (m x k) * other^T (n x k) -> m x n`.
    pub fn matmul_transpose_b(&self, other: &Matrix) -> Result<Matrix, NnError> {
        if self.cols != other.cols {
            return Err(NnError::Shape {
                context: "matmul_transpose_b".into(),
                expected: format!("shared inner dim {}", self.cols),
                actual: format!("{}", other.cols),
            });
        }
        let mut out = Matrix::zeros(self.rows, other.rows);
        for i in 0..self.rows {
            let lhs = self.row(i);
            let dst = out.row_mut(i);
            for (j, d) in dst.iter_mut().enumerate() {
                let rhs = other.row(j);
                *d = lhs.iter().zip(rhs).map(|(&a, &b)| a * b).sum();
            }
        }
        Ok(out)
    }

    /// `self^T (k x m) * other (k x n) -> m x n`; used for weight gradients.
    pub fn transpose_a_matmul(&self, other: &Matrix) -> Result<Matrix, NnError> {
        if self.rows != other.rows {
            return Err(NnError::Shape {
                context: "transpose_a_matmul".into(),
                expected: format!("shared outer dim {}", self.rows),
                actual: format!("{}", other.rows),
            });
        }
        let mut out = Matrix::zeros(self.cols, other.cols);
        for k in 0..self.rows {
            let lhs = self.row(k);
            let rhs = other.row(k);
            for (i, &l) in lhs.iter().enumerate() {
                if l == 0.0 {
                    continue;
                }
                let dst = out.row_mut(i);
                for (d, &r) in dst.iter_mut().zip(rhs) {
                    *d += l * r;
                }
            }
        }
        Ok(out)
    }

    /// Column sums, as a vector of length `cols`.
    pub fn column_sums(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.cols];
        for row in self.row_iter() {
            for (s, &v) in sums.iter_mut().zip(row) {
                *s += v;
            }
        }
        sums
    }

    /// Stack two matrices side by side: `(n x a) ++ (n x b) -> n x (a + b)`.
    pub fn hstack(left: &Matrix, right: &Matrix) -> Result<Matrix, NnError> {
        if left.rows != right.rows {
            return Err(NnError::Shape {
                context: "hstack".into(),
                expected: format!("{} rows", left.rows),
                actual: format!("{} rows", right.rows),
            });
        }
        let mut out = Matrix::zeros(left.rows, left.cols + right.cols);
        for i in 0..left.rows {
            let dst = out.row_mut(i);
            dst[..left.cols].copy_from_slice(left.row(i));
            dst[left.cols..].copy_from_slice(right.row(i));
        }
        Ok(out)
    }

    /// Stack two matrices on top of each other: `(a x n) ++ (b x n) -> (a + b) x n`.
    pub fn vstack(top: &Matrix, bottom: &Matrix) -> Result<Matrix, NnError> {
        if top.cols != bottom.cols {
            return Err(NnError::Shape {
                context: "vstack".into(),
                expected: format!("{} cols", top.cols),
                actual: format!("{} cols", bottom.cols),
            });
        }
        let mut data = Vec::with_capacity((top.rows + bottom.rows) * top.cols);
        data.extend_from_slice(&top.data);
        data.extend_from_slice(&bottom.data);
        Ok(Self {
            rows: top.rows + bottom.rows,
            cols: top.cols,
            data,
        })
    }

    /// Copy of columns `[from, to)`.
    pub fn slice_cols(&self, from: usize, to: usize) -> Result<Matrix, NnError> {
        if from > to || to > self.cols {
            return Err(NnError::Shape {
                context: "slice_cols".into(),
                expected: format!("range within 0..{}", self.cols),
                actual: format!("{from}..{to}"),
            });
        }
        let mut out = Matrix::zeros(self.rows, to - from);
        for i in 0..self.rows {
            out.row_mut(i).copy_from_slice(&self.row(i)[from..to]);
        }
        Ok(out)
    }

    /// New matrix whose rows are `self`'s rows at `indices`, in order.
    pub fn select_rows(&self, indices: &[usize]) -> Matrix {
        let mut out = Matrix::zeros(indices.len(), self.cols);
        for (dst, &src) in indices.iter().enumerate() {
            out.row_mut(dst).copy_from_slice(self.row(src));
        }
        out
    }
}

//! Compressed sparse row storage for matrix-vector products.

use alloc::vec::Vec;

use num_complex::Complex64;

use super::{CMatrix, ZERO};

/// A square or rectangular matrix in CSR form. Exact zeros are dropped.
#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix {
    rows: usize,
    cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<Complex64>,
}

impl CsrMatrix {
    pub fn from_dense(a: &CMatrix) -> CsrMatrix {
        let mut row_ptr = Vec::with_capacity(a.rows() + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for i in 0..a.rows() {
            for (j, &v) in a.row(i).iter().enumerate() {
                if v != ZERO {
                    col_idx.push(j);
                    values.push(v);
                }
            }
            row_ptr.push(values.len());
        }
        CsrMatrix {
            rows: a.rows(),
            cols: a.cols(),
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn matvec_into(&self, v: &[Complex64], out: &mut [Complex64]) {
        assert_eq!(v.len(), self.cols, "matvec dimension mismatch");
        assert_eq!(out.len(), self.rows, "matvec output dimension mismatch");
        for (i, o) in out.iter_mut().enumerate() {
            let range = self.row_ptr[i]..self.row_ptr[i + 1];
            let mut acc = ZERO;
            for (&j, &a) in self.col_idx[range.clone()].iter().zip(&self.values[range]) {
                acc += a * v[j];
            }
            *o = acc;
        }
    }

    pub fn matvec(&self, v: &[Complex64]) -> Vec<Complex64> {
        let mut out = alloc::vec![ZERO; self.rows];
        self.matvec_into(v, &mut out);
        out
    }

    /// Largest absolute column sum.
    pub fn norm_1(&self) -> f64 {
        let mut sums = alloc::vec![0.0; self.cols];
        for (&j, v) in self.col_idx.iter().zip(&self.values) {
            sums[j] += v.norm();
        }
        sums.into_iter().fold(0.0, f64::max)
    }

    pub fn to_dense(&self) -> CMatrix {
        let mut m = CMatrix::zeros(self.rows, self.cols);
        for i in 0..self.rows {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                m[(i, self.col_idx[k])] = self.values[k];
            }
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c64;

    #[test]
    fn round_trip_and_products() {
        let a = CMatrix::from_fn(4, 3, |i, j| {
            if (i + j) % 2 == 0 {
                c64(i as f64, -(j as f64))
            } else {
                ZERO
            }
        });
        let s = CsrMatrix::from_dense(&a);
        assert_eq!(s.to_dense(), a);
        assert_eq!(s.nnz(), 5);
        let v = [c64(1.0, 2.0), c64(-0.5, 0.0), c64(0.0, 3.0)];
        let dense = a.matvec(&v);
        let sparse = s.matvec(&v);
        for (x, y) in dense.iter().zip(&sparse) {
            assert!((x - y).norm() < 1e-15);
        }
        assert_eq!(s.norm_1(), a.norm_1());
    }
}

use alloc::vec::Vec;

use num_complex::Complex64;

use super::{CMatrix, ONE, ZERO};
use crate::error::{Error, Result};

/// LU factorization with partial pivoting, `P A = L U`.
#[derive(Clone, Debug)]
pub struct Lu {
    // L (unit lower, below the diagonal) and U packed together, row-major.
    lu: CMatrix,
    perm: Vec<usize>,
    min_pivot: f64,
    norm_1: f64,
}

impl Lu {
    /// Factors a square matrix. Fails with [`Error::Singular`] when a pivot
    /// vanishes relative to the matrix norm.
    pub fn factor(a: &CMatrix) -> Result<Lu> {
        if !a.is_square() {
            return Err(Error::DimensionMismatch {
                expected: a.rows(),
                found: a.cols(),
            });
        }
        let n = a.rows();
        let norm_1 = a.norm_1();
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut min_pivot = f64::INFINITY;
        let tiny = f64::EPSILON * (n as f64) * norm_1;

        for k in 0..n {
            let (mut p, mut best) = (k, lu[(k, k)].norm());
            for i in k + 1..n {
                let v = lu[(i, k)].norm();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            min_pivot = min_pivot.min(best);
            if best <= tiny || best == 0.0 {
                return Err(Error::Singular);
            }
            if p != k {
                perm.swap(p, k);
                let data = lu.as_mut_slice();
                for j in 0..n {
                    data.swap(k * n + j, p * n + j);
                }
            }
            let pivot_inv = ONE / lu[(k, k)];
            let data = lu.as_mut_slice();
            let (head, tail) = data.split_at_mut((k + 1) * n);
            let pivot_row = &head[k * n + k + 1..k * n + n];
            for row in tail.chunks_exact_mut(n) {
                let l = row[k] * pivot_inv;
                row[k] = l;
                if l != ZERO {
                    for (x, &u) in row[k + 1..].iter_mut().zip(pivot_row) {
                        *x -= l * u;
                    }
                }
            }
        }
        Ok(Lu {
            lu,
            perm,
            min_pivot,
            norm_1,
        })
    }

    pub fn dim(&self) -> usize {
        self.perm.len()
    }

    /// Smallest pivot modulus divided by the 1-norm of the factored matrix.
    /// A cheap (and loose) indicator of near-singularity.
    pub fn relative_min_pivot(&self) -> f64 {
        if self.norm_1 == 0.0 {
            0.0
        } else {
            self.min_pivot / self.norm_1
        }
    }

    pub fn solve_vec(&self, b: &[Complex64]) -> Vec<Complex64> {
        let n = self.dim();
        assert_eq!(b.len(), n, "LU solve dimension mismatch");
        let mut x: Vec<Complex64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let row = self.lu.row(i);
            let mut acc = x[i];
            for (l, xv) in row[..i].iter().zip(&x[..i]) {
                acc -= l * xv;
            }
            x[i] = acc;
        }
        for i in (0..n).rev() {
            let row = self.lu.row(i);
            let mut acc = x[i];
            for (u, xv) in row[i + 1..].iter().zip(&x[i + 1..]) {
                acc -= u * xv;
            }
            x[i] = acc / row[i];
        }
        x
    }

    /// Solves `A X = B` for a matrix right-hand side.
    pub fn solve_matrix(&self, b: &CMatrix) -> CMatrix {
        let n = self.dim();
        assert_eq!(b.rows(), n, "LU solve dimension mismatch");
        let m = b.cols();
        let mut x = CMatrix::zeros(n, m);
        for (i, &p) in self.perm.iter().enumerate() {
            x.row_mut(i).copy_from_slice(b.row(p));
        }
        let data = x.as_mut_slice();
        for i in 0..n {
            let (done, rest) = data.split_at_mut(i * m);
            let target = &mut rest[..m];
            for (k, &l) in self.lu.row(i)[..i].iter().enumerate() {
                if l != ZERO {
                    for (t, &s) in target.iter_mut().zip(&done[k * m..(k + 1) * m]) {
                        *t -= l * s;
                    }
                }
            }
        }
        for i in (0..n).rev() {
            let (head, tail) = data.split_at_mut((i + 1) * m);
            let target = &mut head[i * m..];
            let row = self.lu.row(i);
            for (k, &u) in row[i + 1..].iter().enumerate() {
                if u != ZERO {
                    let src = &tail[k * m..(k + 1) * m];
                    for (t, &s) in target.iter_mut().zip(src) {
                        *t -= u * s;
                    }
                }
            }
            let inv = ONE / row[i];
            for t in target.iter_mut() {
                *t *= inv;
            }
        }
        x
    }

    pub fn inverse(&self) -> CMatrix {
        self.solve_matrix(&CMatrix::identity(self.dim()))
    }

    pub fn determinant(&self) -> Complex64 {
        let n = self.dim();
        let mut det = ONE;
        for i in 0..n {
            det *= self.lu[(i, i)];
        }
        // sign of the permutation
        let mut seen = alloc::vec![false; n];
        let mut swaps = 0usize;
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut len = 0;
            let mut j = start;
            while !seen[j] {
                seen[j] = true;
                j = self.perm[j];
                len += 1;
            }
            swaps += len - 1;
        }
        if swaps % 2 == 1 {
            -det
        } else {
            det
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c64;

    fn test_matrix() -> CMatrix {
        CMatrix::from_fn(5, 5, |i, j| {
            let base = if i == j {
                4.0
            } else {
                1.0 / (1.0 + i as f64 + 2.0 * j as f64)
            };
            c64(base, 0.3 * (i as f64) - 0.2 * (j as f64))
        })
    }

    #[test]
    fn solves_vector_and_matrix_rhs() {
        let a = test_matrix();
        let lu = Lu::factor(&a).unwrap();
        let b: Vec<Complex64> = (0..5).map(|i| c64(i as f64, 1.0)).collect();
        let x = lu.solve_vec(&b);
        let r = a.matvec(&x);
        for (ri, bi) in r.iter().zip(&b) {
            assert!((ri - bi).norm() < 1e-13);
        }
        let inv = lu.inverse();
        assert!(a.matmul(&inv).max_abs_diff(&CMatrix::identity(5)) < 1e-13);
    }

    #[test]
    fn needs_pivoting() {
        let a = CMatrix::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let lu = Lu::factor(&a).unwrap();
        let x = lu.solve_vec(&[c64(2.0, 0.0), c64(3.0, 0.0)]);
        assert_eq!(x, alloc::vec![c64(3.0, 0.0), c64(2.0, 0.0)]);
        assert!((lu.determinant() - c64(-1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn singular_is_reported() {
        let a = CMatrix::from_real(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        assert!(matches!(Lu::factor(&a), Err(Error::Singular)));
    }
}

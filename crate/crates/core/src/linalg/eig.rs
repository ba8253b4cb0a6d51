//! Eigendecomposition of a general (non-Hermitian) complex matrix.
//!
//! Householder reduction to Hessenberg form, shifted QR iteration to a
//! complex Schur form `A = Z T Z†`, back-substitution for the eigenvectors
//! of `T`, and an LU inverse for the biorthonormal left eigenvectors.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use super::{c64, CMatrix, Lu, ONE, ZERO};
use crate::error::{Error, Result};

/// `A = R diag(values) L` with `L R = I`.
#[derive(Clone, Debug)]
pub struct Eig {
    pub values: Vec<Complex64>,
    /// Right eigenvectors as unit-norm columns.
    pub right: CMatrix,
    /// Left eigenvectors as rows: row `i` is `v_L^(i)ᵀ`, so `left * right = I`.
    pub left: CMatrix,
    /// `‖R‖₁ ‖L‖₁`, the 1-norm condition number of the eigenvector basis.
    pub condition: f64,
}

#[derive(Clone, Copy)]
struct Givens {
    c: f64,
    s: Complex64,
}

impl Givens {
    // G [a; b] = [r; 0] with G = [[c, s], [-conj(s), c]].
    fn new(a: Complex64, b: Complex64) -> Givens {
        let bn = b.norm();
        if bn == 0.0 {
            return Givens { c: 1.0, s: ZERO };
        }
        let an = a.norm();
        if an == 0.0 {
            return Givens {
                c: 0.0,
                s: b.conj() / bn,
            };
        }
        let r = libm::hypot(an, bn);
        Givens {
            c: an / r,
            s: (a / an) * b.conj() / r,
        }
    }

    #[inline]
    fn rotate_rows(&self, x: &mut Complex64, y: &mut Complex64) {
        let (a, b) = (*x, *y);
        *x = a * self.c + self.s * b;
        *y = -self.s.conj() * a + b * self.c;
    }

    // right-multiplication by G†
    #[inline]
    fn rotate_cols(&self, x: &mut Complex64, y: &mut Complex64) {
        let (a, b) = (*x, *y);
        *x = a * self.c + b * self.s.conj();
        *y = -a * self.s + b * self.c;
    }
}

fn hessenberg(a: &CMatrix) -> (CMatrix, CMatrix) {
    let n = a.rows();
    let mut h = a.clone();
    let mut q = CMatrix::identity(n);
    if n < 3 {
        return (h, q);
    }
    let mut w = vec![ZERO; n];
    for k in 0..n - 2 {
        let len = n - k - 1;
        let mut v: Vec<Complex64> = (0..len).map(|i| h[(k + 1 + i, k)]).collect();
        let xnorm = super::vec_norm2(&v);
        if xnorm == 0.0 {
            continue;
        }
        let x0 = v[0];
        let phase = if x0.norm() == 0.0 { ONE } else { x0 / x0.norm() };
        let alpha = -phase * xnorm;
        v[0] -= alpha;
        let vnorm = super::vec_norm2(&v);
        if vnorm == 0.0 {
            continue;
        }
        for vi in v.iter_mut() {
            *vi /= vnorm;
        }

        // H <- (I - 2 v v†) H on rows k+1.., columns k..
        for wj in w[k..].iter_mut() {
            *wj = ZERO;
        }
        for (i, &vi) in v.iter().enumerate() {
            let vic = vi.conj();
            for (wj, &hij) in w[k..].iter_mut().zip(&h.row(k + 1 + i)[k..]) {
                *wj += vic * hij;
            }
        }
        for (i, &vi) in v.iter().enumerate() {
            let two_vi = vi * 2.0;
            for (hij, &wj) in h.row_mut(k + 1 + i)[k..].iter_mut().zip(&w[k..]) {
                *hij -= two_vi * wj;
            }
        }
        // H <- H (I - 2 v v†), Q <- Q (I - 2 v v†) on columns k+1..
        for m in [&mut h, &mut q] {
            for r in 0..n {
                let row = &mut m.row_mut(r)[k + 1..];
                let s = super::dot_plain(row, &v) * 2.0;
                for (x, &vj) in row.iter_mut().zip(&v) {
                    *x -= s * vj.conj();
                }
            }
        }
        h[(k + 1, k)] = alpha;
        for i in k + 2..n {
            h[(i, k)] = ZERO;
        }
    }
    (h, q)
}

/// Complex Schur form by shifted QR on the Hessenberg matrix. Returns `(T, Z)`
/// with `A = Z T Z†` and `T` upper triangular.
pub(crate) fn schur(a: &CMatrix) -> Result<(CMatrix, CMatrix)> {
    let n = a.rows();
    let (mut h, mut z) = hessenberg(a);
    if n < 2 {
        return Ok((h, z));
    }
    let norm = h.norm_max().max(f64::MIN_POSITIVE);
    let eps = f64::EPSILON;
    let max_iter = 60 * n;
    let mut hi = n - 1;
    let mut its = 0usize;
    let mut total = 0usize;
    let mut rots: Vec<Givens> = Vec::with_capacity(n);

    while hi > 0 {
        // find the start of the unreduced block ending at `hi`
        let mut l = hi;
        while l > 0 {
            let sub = h[(l, l - 1)].norm();
            let mut diag = h[(l, l)].norm() + h[(l - 1, l - 1)].norm();
            if diag == 0.0 {
                diag = norm;
            }
            if sub <= eps * diag {
                h[(l, l - 1)] = ZERO;
                break;
            }
            l -= 1;
        }
        if l == hi {
            hi -= 1;
            its = 0;
            continue;
        }
        total += 1;
        if total > max_iter {
            return Err(Error::NoConvergence("complex QR iteration"));
        }
        its += 1;

        let shift = if its % 11 == 10 {
            // exceptional shift to break cycles
            h[(hi, hi)] + c64(h[(hi, hi - 1)].norm() * 0.75, 0.0)
        } else {
            wilkinson(h[(hi - 1, hi - 1)], h[(hi - 1, hi)], h[(hi, hi - 1)], h[(hi, hi)])
        };

        for i in l..=hi {
            h[(i, i)] -= shift;
        }
        rots.clear();
        for k in l..hi {
            let g = Givens::new(h[(k, k)], h[(k + 1, k)]);
            let data = h.as_mut_slice();
            let (top, bottom) = data.split_at_mut((k + 1) * n);
            let row_k = &mut top[k * n + k..k * n + n];
            let row_k1 = &mut bottom[k..n];
            for (x, y) in row_k.iter_mut().zip(row_k1.iter_mut()) {
                g.rotate_rows(x, y);
            }
            h[(k + 1, k)] = ZERO;
            rots.push(g);
        }
        for (idx, k) in (l..hi).enumerate() {
            let g = rots[idx];
            let last = (k + 2).min(hi + 1);
            for r in 0..last {
                let row = h.row_mut(r);
                let (a, b) = row.split_at_mut(k + 1);
                g.rotate_cols(&mut a[k], &mut b[0]);
            }
            for r in 0..n {
                let row = z.row_mut(r);
                let (a, b) = row.split_at_mut(k + 1);
                g.rotate_cols(&mut a[k], &mut b[0]);
            }
        }
        for i in l..=hi {
            h[(i, i)] += shift;
        }
    }
    for i in 1..n {
        for j in 0..i {
            h[(i, j)] = ZERO;
        }
    }
    Ok((h, z))
}

fn wilkinson(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Complex64 {
    let half = (a - d) * 0.5;
    let disc = (half * half + b * c).sqrt();
    let m1 = (a + d) * 0.5 + disc;
    let m2 = (a + d) * 0.5 - disc;
    if (m1 - d).norm() < (m2 - d).norm() {
        m1
    } else {
        m2
    }
}

/// Full eigendecomposition with biorthonormal left and right eigenvectors.
///
/// Fails with [`Error::IllConditioned`] when the eigenvector basis is
/// numerically singular (defective or nearly defective matrix).
pub fn eig(a: &CMatrix) -> Result<Eig> {
    assert!(a.is_square(), "eig needs a square matrix");
    let n = a.rows();
    let (t, z) = schur(a)?;
    let values: Vec<Complex64> = (0..n).map(|i| t[(i, i)]).collect();

    let tnorm = t.norm_max().max(f64::MIN_POSITIVE);
    let smin = (f64::EPSILON * tnorm).max(f64::MIN_POSITIVE * 1e3);
    let mut x = CMatrix::zeros(n, n);
    let mut col = vec![ZERO; n];
    for k in 0..n {
        for v in col.iter_mut() {
            *v = ZERO;
        }
        col[k] = ONE;
        let lam = t[(k, k)];
        for i in (0..k).rev() {
            let row = t.row(i);
            let sum = super::dot_plain(&row[i + 1..=k], &col[i + 1..=k]);
            let mut denom = row[i] - lam;
            if denom.norm() < smin {
                denom = c64(smin, 0.0);
            }
            col[i] = -sum / denom;
            let big = col[i].norm();
            if big > 1e100 {
                for v in col[..=k].iter_mut() {
                    *v /= big;
                }
            }
        }
        x.set_column(k, &col);
    }
    let mut right = z.matmul(&x);
    for j in 0..n {
        let norm = libm::sqrt((0..n).map(|i| right[(i, j)].norm_sqr()).sum::<f64>());
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::IllConditioned {
                condition: f64::INFINITY,
            });
        }
        for i in 0..n {
            right[(i, j)] /= norm;
        }
    }
    let lu = Lu::factor(&right).map_err(|_| Error::IllConditioned {
        condition: f64::INFINITY,
    })?;
    let left = lu.inverse();
    let condition = right.norm_1() * left.norm_1();
    if !condition.is_finite() {
        return Err(Error::IllConditioned { condition });
    }
    Ok(Eig {
        values,
        right,
        left,
        condition,
    })
}

impl Eig {
    /// `Σ_i v_R^(i) e^{λ_i t} (v_L^(i)ᵀ v)`
    pub fn apply_exp(&self, t: f64, v: &[Complex64]) -> Vec<Complex64> {
        let coeffs = self.left.matvec(v);
        let weighted: Vec<Complex64> = coeffs
            .iter()
            .zip(&self.values)
            .map(|(&c, &lam)| c * (lam * t).exp())
            .collect();
        self.right.matvec(&weighted)
    }

    /// The full propagator `Σ_i v_R^(i) e^{λ_i t} v_L^(i)ᵀ`.
    pub fn exp_matrix(&self, t: f64) -> CMatrix {
        let n = self.values.len();
        let mut scaled = self.right.clone();
        for (j, &lam) in self.values.iter().enumerate() {
            let e = (lam * t).exp();
            for i in 0..n {
                scaled[(i, j)] *= e;
            }
        }
        scaled.matmul(&self.left)
    }
}

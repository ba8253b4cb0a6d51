//! Matrix exponential and its action on a vector.
//!
//! `expm` is the Padé scaling-and-squaring method of Higham (2005);
//! `expm_apply` is the truncated-Taylor method of Al-Mohy & Higham (2011)
//! with the plain 1-norm bound used for parameter selection.

use alloc::vec::Vec;

use num_complex::Complex64;

use super::{c64, gemm_into, CMatrix, CsrMatrix, Lu, ONE, ZERO};
use crate::error::Result;

const THETA_3: f64 = 1.495585217958292e-2;
const THETA_5: f64 = 2.539_398_330_063_23e-1;
const THETA_7: f64 = 9.504178996162932e-1;
const THETA_9: f64 = 2.097847961257068;
pub(crate) const THETA_13: f64 = 5.371920351148152;

const B3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const B5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const B7: [f64; 8] = [17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0];
const B9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
const B13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

/// `exp(a)` for a square matrix.
pub fn expm(a: &CMatrix) -> Result<CMatrix> {
    assert!(a.is_square(), "expm needs a square matrix");
    let n = a.rows();
    let norm = a.norm_1();
    if norm == 0.0 {
        return Ok(CMatrix::identity(n));
    }
    let id = CMatrix::identity(n);
    for (theta, coeffs) in [
        (THETA_3, &B3[..]),
        (THETA_5, &B5[..]),
        (THETA_7, &B7[..]),
        (THETA_9, &B9[..]),
    ] {
        if norm <= theta {
            return pade_low(a, coeffs, &id);
        }
    }
    let s = if norm > THETA_13 {
        libm::ceil(libm::log2(norm / THETA_13)) as i32
    } else {
        0
    };
    let scaled = a.scale_real(libm::exp2(-(s as f64)));
    let mut r = pade13(&scaled, &id)?;
    for _ in 0..s {
        r = r.matmul(&r);
    }
    Ok(r)
}

fn pade_low(a: &CMatrix, b: &[f64], id: &CMatrix) -> Result<CMatrix> {
    let a2 = a.matmul(a);
    let mut u_inner = id.scale_real(b[1]);
    let mut v = id.scale_real(b[0]);
    let mut power = a2.clone();
    let mut k = 2;
    while k < b.len() {
        v.axpy(c64(b[k], 0.0), &power);
        if k + 1 < b.len() {
            u_inner.axpy(c64(b[k + 1], 0.0), &power);
        }
        k += 2;
        if k < b.len() {
            power = power.matmul(&a2);
        }
    }
    let u = a.matmul(&u_inner);
    solve_pade(&u, &v)
}

fn pade13(a: &CMatrix, id: &CMatrix) -> Result<CMatrix> {
    let b = &B13;
    let a2 = a.matmul(a);
    let a4 = a2.matmul(&a2);
    let a6 = a4.matmul(&a2);

    let mut inner = a6.scale_real(b[13]);
    inner.axpy(c64(b[11], 0.0), &a4);
    inner.axpy(c64(b[9], 0.0), &a2);
    let mut u_inner = id.scale_real(b[1]);
    u_inner.axpy(c64(b[7], 0.0), &a6);
    u_inner.axpy(c64(b[5], 0.0), &a4);
    u_inner.axpy(c64(b[3], 0.0), &a2);
    gemm_into(ONE, &a6, &inner, ONE, &mut u_inner);
    let u = a.matmul(&u_inner);

    let mut inner = a6.scale_real(b[12]);
    inner.axpy(c64(b[10], 0.0), &a4);
    inner.axpy(c64(b[8], 0.0), &a2);
    let mut v = id.scale_real(b[0]);
    v.axpy(c64(b[6], 0.0), &a6);
    v.axpy(c64(b[4], 0.0), &a4);
    v.axpy(c64(b[2], 0.0), &a2);
    gemm_into(ONE, &a6, &inner, ONE, &mut v);

    solve_pade(&u, &v)
}

fn solve_pade(u: &CMatrix, v: &CMatrix) -> Result<CMatrix> {
    let p = v + u;
    let q = v - u;
    Ok(Lu::factor(&q)?.solve_matrix(&p))
}

// θ_m for the truncated Taylor series at unit roundoff 2^-53.
const TAYLOR_THETA: [(usize, f64); 35] = [
    (1, 2.29e-16),
    (2, 2.58e-8),
    (3, 1.39e-5),
    (4, 3.40e-4),
    (5, 2.40e-3),
    (6, 9.07e-3),
    (7, 2.38e-2),
    (8, 5.00e-2),
    (9, 8.96e-2),
    (10, 1.44e-1),
    (11, 2.14e-1),
    (12, 3.00e-1),
    (13, 4.00e-1),
    (14, 5.14e-1),
    (15, 6.41e-1),
    (16, 7.81e-1),
    (17, 9.31e-1),
    (18, 1.09),
    (19, 1.26),
    (20, 1.44),
    (21, 1.62),
    (22, 1.82),
    (23, 2.01),
    (24, 2.22),
    (25, 2.43),
    (26, 2.64),
    (27, 2.86),
    (28, 3.08),
    (29, 3.31),
    (30, 3.54),
    (35, 4.7),
    (40, 6.0),
    (45, 7.2),
    (50, 8.5),
    (55, 9.9),
];

/// 1-norm of a vector.
pub fn one_norm_vec(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm()).sum()
}

/// Taylor degree `m` and step count `s` for `exp(a t) v`; the cost is `m*s`
/// matrix-vector products.
pub(crate) fn taylor_parameters(norm: f64) -> (usize, usize) {
    if norm == 0.0 {
        return (0, 1);
    }
    let mut best = (usize::MAX, 0, 0);
    for &(m, theta) in TAYLOR_THETA.iter() {
        let s = libm::ceil(norm / theta).max(1.0);
        if s > 1e12 {
            continue;
        }
        let s = s as usize;
        let cost = m.saturating_mul(s);
        if cost < best.0 {
            best = (cost, m, s);
        }
    }
    (best.1, best.2)
}

/// `exp(a t) v` without forming the exponential.
pub fn expm_apply(a: &CMatrix, t: f64, v: &[Complex64]) -> Vec<Complex64> {
    TaylorAction::new(a).apply(t, v)
}

/// Truncated-Taylor action of `exp(a t)` on vectors, for a fixed `a`.
///
/// The trace mean is shifted out of `a` and restored as a scalar factor; the
/// shifted matrix is kept in CSR form, so the cost per matrix-vector product
/// follows the number of nonzeros.
#[derive(Clone, Debug)]
pub struct TaylorAction {
    shifted: CsrMatrix,
    mu: Complex64,
    norm: f64,
}

impl TaylorAction {
    pub fn new(a: &CMatrix) -> TaylorAction {
        assert!(a.is_square(), "Taylor action needs a square matrix");
        let n = a.rows();
        let mu = if n == 0 { ZERO } else { a.trace() / (n as f64) };
        let mut shifted = a.clone();
        shifted.add_diagonal(-mu);
        let shifted = CsrMatrix::from_dense(&shifted);
        let norm = shifted.norm_1();
        TaylorAction { shifted, mu, norm }
    }

    pub fn dim(&self) -> usize {
        self.shifted.rows()
    }

    pub fn nnz(&self) -> usize {
        self.shifted.nnz()
    }

    /// Matrix-vector products an interval `t` costs.
    pub fn matvecs(&self, t: f64) -> usize {
        let (m, s) = taylor_parameters(self.norm * libm::fabs(t));
        m.saturating_mul(s)
    }

    pub fn apply(&self, t: f64, v: &[Complex64]) -> Vec<Complex64> {
        let n = self.dim();
        assert_eq!(n, v.len(), "Taylor action dimension mismatch");
        if t == 0.0 || n == 0 {
            return v.to_vec();
        }
        let (m, s) = taylor_parameters(self.norm * libm::fabs(t));
        let tol = libm::exp2(-53.0);
        let step_scale = t / (s as f64);
        let eta = (self.mu * step_scale).exp();

        let mut f = v.to_vec();
        let mut b = v.to_vec();
        let mut tmp = alloc::vec![ZERO; n];
        for _ in 0..s {
            let mut c1 = super::vec_norm_inf(&b);
            for k in 1..=m {
                self.shifted.matvec_into(&b, &mut tmp);
                let factor = step_scale / (k as f64);
                for (bi, &ti) in b.iter_mut().zip(&tmp) {
                    *bi = ti * factor;
                }
                for (fi, &bi) in f.iter_mut().zip(&b) {
                    *fi += bi;
                }
                let c2 = super::vec_norm_inf(&b);
                if c1 + c2 <= tol * super::vec_norm_inf(&f) {
                    break;
                }
                c1 = c2;
            }
            for fi in f.iter_mut() {
                *fi *= eta;
            }
            b.copy_from_slice(&f);
        }
        f
    }
}

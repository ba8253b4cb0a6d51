use alloc::vec::Vec;

use num_complex::Complex64;

use super::{c64, CMatrix};
use crate::error::{Error, Result};

/// Eigendecomposition of a Hermitian matrix: `a = V diag(values) V†`,
/// eigenvalues ascending, eigenvectors in the columns of `vectors`.
#[derive(Clone, Debug)]
pub struct Eigh {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

const MAX_SWEEPS: usize = 100;

/// Cyclic complex Jacobi. The input is only read through its upper triangle
/// and the real part of its diagonal.
pub fn eigh(a: &CMatrix) -> Result<Eigh> {
    assert!(a.is_square(), "eigh needs a square matrix");
    let n = a.rows();
    let mut m = a.hermitian_part();
    let mut v = CMatrix::identity(n);
    let scale = m.norm_fro();
    if n <= 1 || scale == 0.0 {
        let values = (0..n).map(|i| m[(i, i)].re).collect();
        return Ok(Eigh { values, vectors: v });
    }
    let target = f64::EPSILON * f64::EPSILON * scale * scale * 1e-2;

    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .map(|(i, j)| m[(i, j)].norm_sqr())
            .sum();
        if off <= target {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[(p, q)];
                let mag = apq.norm();
                if mag == 0.0 {
                    continue;
                }
                let phase = apq / mag; // e^{iφ}
                let alpha = m[(p, p)].re;
                let gamma = m[(q, q)].re;
                let theta = (gamma - alpha) / (2.0 * mag);
                let t = if theta == 0.0 {
                    1.0
                } else {
                    theta.signum() / (libm::fabs(theta) + libm::sqrt(theta * theta + 1.0))
                };
                let c = 1.0 / libm::sqrt(t * t + 1.0);
                let s = t * c;
                let ph_conj = phase.conj(); // e^{-iφ}

                for k in 0..n {
                    let akp = m[(k, p)];
                    let akq = m[(k, q)];
                    m[(k, p)] = akp * c - akq * ph_conj * s;
                    m[(k, q)] = akp * s + akq * ph_conj * c;
                }
                for k in 0..n {
                    let apk = m[(p, k)];
                    let aqk = m[(q, k)];
                    m[(p, k)] = apk * c - aqk * phase * s;
                    m[(q, k)] = apk * s + aqk * phase * c;
                }
                m[(p, q)] = c64(0.0, 0.0);
                m[(q, p)] = c64(0.0, 0.0);
                m[(p, p)] = c64(m[(p, p)].re, 0.0);
                m[(q, q)] = c64(m[(q, q)].re, 0.0);

                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * c - vkq * ph_conj * s;
                    v[(k, q)] = vkp * s + vkq * ph_conj * c;
                }
            }
        }
    }
    if !converged {
        return Err(Error::NoConvergence("Jacobi eigensolver"));
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(i, i)].re.total_cmp(&m[(j, j)].re));
    let values = order.iter().map(|&i| m[(i, i)].re).collect();
    let vectors = CMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    Ok(Eigh { values, vectors })
}

impl Eigh {
    /// Reassembles `V diag(f(λ)) V†`.
    pub fn apply_fn(&self, f: impl Fn(f64) -> Complex64) -> CMatrix {
        let n = self.values.len();
        let mut scaled = self.vectors.clone();
        for (j, &lam) in self.values.iter().enumerate() {
            let fj = f(lam);
            for i in 0..n {
                scaled[(i, j)] *= fj;
            }
        }
        scaled.matmul(&self.vectors.adjoint())
    }

    pub fn min_value(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }
}

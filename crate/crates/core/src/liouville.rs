//! Liouville-space algebra.
//!
//! Operators on a `d`-dimensional Hilbert space are vectorized by column
//! stacking: entry `(i, j)` lives in slot `j·d + i`. With that convention
//! `vec(A X B) = (Bᵀ ⊗ A) vec(X)`, which is how every superoperator below is
//! assembled. Superoperators are dense `d² × d²` matrices acting in rad/ns.

use alloc::format;
use alloc::vec::Vec;
use core::ops::Add;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{c64, eigh, CMatrix, ZERO};
use crate::model::JumpChannel;
use crate::units::UnitSystem;

/// Layout of vectorized operators.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Vectorization {
    /// `(i, j) → j·d + i`
    ColumnStacking,
}

impl Vectorization {
    pub const fn name(self) -> &'static str {
        match self {
            Vectorization::ColumnStacking => "column-stacking",
        }
    }
}

/// Column-stacked vector of a square operator.
pub fn vectorize(op: &CMatrix) -> Vec<Complex64> {
    assert!(op.is_square(), "only square operators are vectorized");
    let d = op.rows();
    let mut v = Vec::with_capacity(d * d);
    for j in 0..d {
        for i in 0..d {
            v.push(op[(i, j)]);
        }
    }
    v
}

/// Inverse of [`vectorize`]; panics unless `v.len()` is a perfect square.
pub fn devectorize(v: &[Complex64]) -> CMatrix {
    let d = libm::round(libm::sqrt(v.len() as f64)) as usize;
    assert_eq!(d * d, v.len(), "vector length is not a square");
    let mut m = CMatrix::zeros(d, d);
    for j in 0..d {
        for i in 0..d {
            m[(i, j)] = v[j * d + i];
        }
    }
    m
}

/// Hilbert–Schmidt scalar product `(a, b) = Tr[a† b]`.
pub fn hs_inner(a: &CMatrix, b: &CMatrix) -> Result<Complex64> {
    if a.rows() != b.rows() || a.cols() != b.cols() {
        return Err(Error::DimensionMismatch {
            expected: a.rows() * a.cols(),
            found: b.rows() * b.cols(),
        });
    }
    Ok(a.hs_inner(b))
}

/// A linear map on operators, stored as a `d² × d²` matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct SuperOperator {
    matrix: CMatrix,
    dim: usize,
    convention: Vectorization,
}

impl SuperOperator {
    /// Wraps a Liouville-space matrix acting on `d × d` operators.
    pub fn from_matrix(matrix: CMatrix, dim: usize) -> Result<SuperOperator> {
        if matrix.rows() != dim * dim || matrix.cols() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: matrix.rows(),
            });
        }
        Ok(SuperOperator {
            matrix,
            dim,
            convention: Vectorization::ColumnStacking,
        })
    }

    pub fn zero(dim: usize) -> SuperOperator {
        SuperOperator {
            matrix: CMatrix::zeros(dim * dim, dim * dim),
            dim,
            convention: Vectorization::ColumnStacking,
        }
    }

    /// Hilbert-space dimension `d`.
    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    #[inline]
    pub fn convention(&self) -> Vectorization {
        self.convention
    }

    pub fn apply(&self, op: &CMatrix) -> CMatrix {
        devectorize(&self.matrix.matvec(&vectorize(op)))
    }

    pub fn apply_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        self.matrix.matvec(v)
    }

    /// Conjugate transpose: the adjoint with respect to `Tr[a† b]`.
    pub fn adjoint(&self) -> SuperOperator {
        SuperOperator {
            matrix: self.matrix.adjoint(),
            dim: self.dim,
            convention: self.convention,
        }
    }

    pub fn try_add(&self, rhs: &SuperOperator) -> Result<SuperOperator> {
        if self.convention != rhs.convention {
            return Err(Error::ConventionMismatch);
        }
        if self.dim != rhs.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: rhs.dim,
            });
        }
        Ok(SuperOperator {
            matrix: &self.matrix + &rhs.matrix,
            dim: self.dim,
            convention: self.convention,
        })
    }

    pub fn scale(&self, s: Complex64) -> SuperOperator {
        SuperOperator {
            matrix: self.matrix.scale(s),
            dim: self.dim,
            convention: self.convention,
        }
    }

    /// `‖L(ρ)‖` as the max entry, used to check stationarity.
    pub fn residual(&self, rho: &CMatrix) -> f64 {
        self.apply(rho).norm_max()
    }
}

impl Add<&SuperOperator> for &SuperOperator {
    type Output = SuperOperator;
    fn add(self, rhs: &SuperOperator) -> SuperOperator {
        self.try_add(rhs)
            .expect("superoperators must share dimension and convention")
    }
}

/// `X ↦ A X B` as a superoperator.
pub fn sandwich(a: &CMatrix, b: &CMatrix) -> SuperOperator {
    let d = a.rows();
    SuperOperator {
        matrix: b.transpose().kron(a),
        dim: d,
        convention: Vectorization::ColumnStacking,
    }
}

/// `X ↦ -i [h, X]` (ħ = 1); `h` must already be in rad/ns.
pub fn hamiltonian_superop(h: &CMatrix) -> Result<SuperOperator> {
    if !h.is_square() {
        return Err(Error::DimensionMismatch {
            expected: h.rows(),
            found: h.cols(),
        });
    }
    let defect = h.hermiticity_defect();
    if defect > 1e-10 * h.norm_max().max(1.0) {
        return Err(Error::NotHermitian { defect });
    }
    Ok(commutator_superop(h).scale(c64(0.0, -1.0)))
}

/// `X ↦ [b, X]` for any square `b`.
pub fn commutator_superop(b: &CMatrix) -> SuperOperator {
    let d = b.rows();
    let id = CMatrix::identity(d);
    let mut m = id.kron(b);
    m -= &b.transpose().kron(&id);
    SuperOperator {
        matrix: m,
        dim: d,
        convention: Vectorization::ColumnStacking,
    }
}

/// `γ (L ρ L† − ½{ρ, L†L})` with `γ` in 1/ns.
pub fn dissipator_with_rate(op: &CMatrix, rate_per_ns: f64) -> SuperOperator {
    let d = op.rows();
    if rate_per_ns == 0.0 {
        return SuperOperator::zero(d);
    }
    let id = CMatrix::identity(d);
    let ldl = op.adjoint().matmul(op);
    let mut m = op.conj().kron(op);
    let half = c64(-0.5, 0.0);
    m.axpy(half, &id.kron(&ldl));
    m.axpy(half, &ldl.transpose().kron(&id));
    SuperOperator {
        matrix: m.scale_real(rate_per_ns),
        dim: d,
        convention: Vectorization::ColumnStacking,
    }
}

/// Dissipator of one jump channel; the channel rate is given in mK.
pub fn dissipator(channel: &JumpChannel, units: &UnitSystem) -> Result<SuperOperator> {
    if !(channel.rate >= 0.0) || !channel.rate.is_finite() {
        return Err(Error::InvalidParameter {
            name: "rate",
            reason: format!("channel {} has rate {}", channel.label, channel.rate),
        });
    }
    Ok(dissipator_with_rate(
        &channel.operator,
        units.mk_to_rad_per_ns(channel.rate),
    ))
}

/// Full Lindblad generator: commutator with `h` (rad/ns) plus all channel
/// dissipators.
pub fn liouvillian(h: &CMatrix, channels: &[JumpChannel], units: &UnitSystem) -> Result<SuperOperator> {
    let dissipative = dissipative_part(h.rows(), channels, units)?;
    Ok(&hamiltonian_superop(h)? + &dissipative)
}

/// `Σ_μ γ_μ D[L_μ]` over all channels, with the anticommutator terms summed
/// before they are lifted to Liouville space.
pub fn dissipative_part(dim: usize, channels: &[JumpChannel], units: &UnitSystem) -> Result<SuperOperator> {
    let n = dim * dim;
    let mut m = CMatrix::zeros(n, n);
    let mut decay = CMatrix::zeros(dim, dim);
    for ch in channels {
        if ch.operator.rows() != dim || ch.operator.cols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: ch.operator.rows(),
            });
        }
        if !(ch.rate >= 0.0) || !ch.rate.is_finite() {
            return Err(Error::InvalidParameter {
                name: "rate",
                reason: format!("channel {} has rate {}", ch.label, ch.rate),
            });
        }
        if ch.rate == 0.0 {
            continue;
        }
        let rate = units.mk_to_rad_per_ns(ch.rate);
        add_kron_scaled(&mut m, &ch.operator.conj(), &ch.operator, c64(rate, 0.0));
        decay.axpy(c64(rate, 0.0), &ch.operator.adjoint().matmul(&ch.operator));
    }
    let id = CMatrix::identity(dim);
    let half = c64(-0.5, 0.0);
    add_kron_scaled(&mut m, &id, &decay, half);
    add_kron_scaled(&mut m, &decay.transpose(), &id, half);
    Ok(SuperOperator {
        matrix: m,
        dim,
        convention: Vectorization::ColumnStacking,
    })
}

/// `out += s · (a ⊗ b)`, skipping zero entries of `a`.
fn add_kron_scaled(out: &mut CMatrix, a: &CMatrix, b: &CMatrix, s: Complex64) {
    let (br, bc) = (b.rows(), b.cols());
    for i in 0..a.rows() {
        for j in 0..a.cols() {
            let aij = a[(i, j)];
            if aij == ZERO {
                continue;
            }
            let f = s * aij;
            for k in 0..br {
                let row = b.row(k);
                let target = &mut out.row_mut(i * br + k)[j * bc..(j + 1) * bc];
                for (t, &v) in target.iter_mut().zip(row) {
                    *t += f * v;
                }
            }
        }
    }
}

/// Adjoint superoperator.
pub fn adjoint(l: &SuperOperator) -> SuperOperator {
    l.adjoint()
}

/// Tolerances a density operator has to satisfy.
pub const HERMITICITY_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-10;
pub const POSITIVITY_TOL: f64 = 1e-9;

/// Deviations of a matrix from being a density operator.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StateDefects {
    pub hermiticity: f64,
    pub trace_error: f64,
    pub min_eigenvalue: f64,
}

/// A Hermitian, unit-trace, positive semidefinite operator.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityOperator {
    matrix: CMatrix,
}

impl DensityOperator {
    /// Validates the density-operator invariants.
    pub fn new(matrix: CMatrix) -> Result<DensityOperator> {
        let defects = state_defects(&matrix)?;
        if defects.hermiticity > HERMITICITY_TOL {
            return Err(Error::InvalidState(format!(
                "Hermiticity defect {:e}",
                defects.hermiticity
            )));
        }
        if defects.trace_error > TRACE_TOL {
            return Err(Error::InvalidState(format!("trace error {:e}", defects.trace_error)));
        }
        if defects.min_eigenvalue < -POSITIVITY_TOL {
            return Err(Error::InvalidState(format!(
                "negative eigenvalue {:e}",
                defects.min_eigenvalue
            )));
        }
        Ok(DensityOperator { matrix })
    }

    /// Skips validation; for states produced by trace-checked propagation.
    pub(crate) fn from_trusted(matrix: CMatrix) -> DensityOperator {
        DensityOperator { matrix }
    }

    /// A pure state `|ψ⟩⟨ψ|` (normalized here).
    pub fn pure(psi: &[Complex64]) -> Result<DensityOperator> {
        let norm = crate::linalg::vec_norm2(psi);
        if norm == 0.0 {
            return Err(Error::InvalidState("zero state vector".into()));
        }
        let d = psi.len();
        let m = CMatrix::from_fn(d, d, |i, j| psi[i] * psi[j].conj() / (norm * norm));
        DensityOperator::new(m)
    }

    #[inline]
    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn to_vector(&self) -> Vec<Complex64> {
        vectorize(&self.matrix)
    }

    /// `Tr[O ρ]`
    pub fn expectation(&self, observable: &CMatrix) -> Complex64 {
        observable.trace_product(&self.matrix)
    }

    pub fn defects(&self) -> StateDefects {
        state_defects(&self.matrix).expect("square by construction")
    }
}

/// Hermiticity defect, trace error and smallest eigenvalue of the Hermitian part.
pub fn state_defects(m: &CMatrix) -> Result<StateDefects> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch {
            expected: m.rows(),
            found: m.cols(),
        });
    }
    let hermiticity = m.hermiticity_defect();
    let tr = m.trace();
    let trace_error = (tr - c64(1.0, 0.0)).norm();
    let min_eigenvalue = eigh(m)?.min_value();
    Ok(StateDefects {
        hermiticity,
        trace_error,
        min_eigenvalue,
    })
}

/// `ρ ↦ -i[B, ρ]`, the probe perturbation superoperator.
pub fn perturbation_superop(b: &CMatrix) -> SuperOperator {
    commutator_superop(b).scale(c64(0.0, -1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{eig, I, ZERO};
    use crate::spin::spin_matrices;

    fn random_matrix(d: usize, seed: u64) -> CMatrix {
        let mut state = seed;
        let mut next = move || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((state >> 11) as f64) / ((1u64 << 53) as f64) - 0.5
        };
        CMatrix::from_fn(d, d, |_, _| c64(next(), next()))
    }

    #[test]
    fn vectorization_is_column_stacking() {
        let v = vectorize(&CMatrix::identity(2));
        assert_eq!(v, alloc::vec![c64(1.0, 0.0), ZERO, ZERO, c64(1.0, 0.0)]);
        let a = CMatrix::from_real(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(vectorize(&a)[1], c64(3.0, 0.0));
        let b = random_matrix(5, 3);
        assert_eq!(devectorize(&vectorize(&b)), b);
    }

    #[test]
    fn sandwich_matches_products() {
        let a = random_matrix(4, 1);
        let b = random_matrix(4, 2);
        let x = random_matrix(4, 3);
        let direct = a.matmul(&x).matmul(&b);
        assert!(sandwich(&a, &b).apply(&x).max_abs_diff(&direct) < 1e-14);
    }

    #[test]
    fn hs_inner_examples() {
        let id = CMatrix::identity(2);
        assert_eq!(hs_inner(&id, &id).unwrap(), c64(2.0, 0.0));
        let sx = CMatrix::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let sy = CMatrix::from_row_major(2, 2, alloc::vec![ZERO, -I, I, ZERO]);
        assert_eq!(hs_inner(&sx, &sy).unwrap(), ZERO);
        let a = random_matrix(3, 7);
        let b = random_matrix(3, 8);
        assert!((hs_inner(&a, &b).unwrap() - hs_inner(&b, &a).unwrap().conj()).norm() < 1e-13);
        assert!(matches!(
            hs_inner(&a, &CMatrix::identity(2)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn larmor_commutator_by_hand() {
        // d/dt sx = -i[ω sz, sx] = ω sy
        let w = 1.7;
        let s = spin_matrices(0.5).unwrap();
        let l = hamiltonian_superop(&s.sz.scale_real(w)).unwrap();
        let got = l.apply(&s.sx);
        assert!(got.max_abs_diff(&s.sy.scale_real(w)) < 1e-15);
        let got_y = l.apply(&s.sy);
        assert!(got_y.max_abs_diff(&s.sx.scale_real(-w)) < 1e-15);
    }

    #[test]
    fn zero_hamiltonian_and_rate() {
        assert_eq!(
            hamiltonian_superop(&CMatrix::zeros(3, 3)).unwrap(),
            SuperOperator::zero(3)
        );
        let s = spin_matrices(0.5).unwrap();
        assert_eq!(dissipator_with_rate(&s.s_minus, 0.0), SuperOperator::zero(2));
    }

    #[test]
    fn rejects_non_hermitian_hamiltonian() {
        let s = spin_matrices(0.5).unwrap();
        assert!(matches!(
            hamiltonian_superop(&s.s_plus),
            Err(Error::NotHermitian { .. })
        ));
    }

    #[test]
    fn bohr_frequencies() {
        // eigenvalues of -i[h, ·] are -i(E_k - E_l)
        let energies = [0.0, 0.7, -1.3];
        let h = CMatrix::diag_real(&energies);
        let l = hamiltonian_superop(&h).unwrap();
        let e = eig(l.matrix()).unwrap();
        let mut want: Vec<Complex64> = Vec::new();
        for a in energies {
            for b in energies {
                want.push(c64(0.0, -(a - b)));
            }
        }
        for w in want {
            assert!(e.values.iter().any(|z| (z - w).norm() < 1e-12), "missing {w}");
        }
    }

    #[test]
    fn unitary_generator_is_anti_hermitian() {
        let h = random_matrix(4, 11).hermitian_part();
        let l = hamiltonian_superop(&h).unwrap();
        let neg = l.scale(c64(-1.0, 0.0));
        assert!(l.adjoint().matrix().max_abs_diff(neg.matrix()) < 1e-15);
        assert_eq!(adjoint(&adjoint(&l)), l);
    }

    #[test]
    fn dissipator_preserves_trace_and_hermiticity() {
        let op = random_matrix(4, 5);
        let d = dissipator_with_rate(&op, 0.8);
        let rho = {
            let a = random_matrix(4, 6);
            a.matmul(&a.adjoint())
        };
        let out = d.apply(&rho);
        assert!(out.trace().norm() < 1e-12);
        assert!(out.hermiticity_defect() < 1e-13);
        // dual statement: adjoint kills the identity
        let dual = d.adjoint().apply(&CMatrix::identity(4));
        assert!(dual.norm_max() < 1e-12);
    }

    #[test]
    fn adjoint_identity_random_pairs() {
        let h = random_matrix(3, 21).hermitian_part();
        let mut l = hamiltonian_superop(&h).unwrap();
        l = &l + &dissipator_with_rate(&random_matrix(3, 22), 0.4);
        let la = l.adjoint();
        for k in 0..20 {
            let a = random_matrix(3, 100 + k);
            let b = random_matrix(3, 200 + k);
            let lhs = hs_inner(&a, &l.apply(&b)).unwrap();
            let rhs = hs_inner(&la.apply(&a), &b).unwrap();
            assert!((lhs - rhs).norm() < 1e-12);
        }
    }

    #[test]
    fn density_operator_validation() {
        let ok = DensityOperator::new(CMatrix::diag_real(&[0.25, 0.75])).unwrap();
        assert_eq!(ok.dim(), 2);
        assert!(DensityOperator::new(CMatrix::diag_real(&[0.5, 0.6])).is_err());
        assert!(DensityOperator::new(CMatrix::diag_real(&[1.5, -0.5])).is_err());
        let mut nh = CMatrix::diag_real(&[0.5, 0.5]);
        nh[(0, 1)] = c64(0.1, 0.0);
        assert!(DensityOperator::new(nh).is_err());
        let pure = DensityOperator::pure(&[c64(1.0, 0.0), c64(0.0, 1.0)]).unwrap();
        assert!((pure.matrix()[(0, 1)] - c64(0.0, -0.5)).norm() < 1e-15);
    }
}

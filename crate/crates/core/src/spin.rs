//! Spin operators, block-structured Hilbert spaces and total-spin bases.

use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::error::{Error, Result};
use crate::linalg::{c64, CMatrix, ZERO};

/// A spin quantum number, stored as `2s`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Spin(u32);

impl Spin {
    pub const HALF: Spin = Spin(1);
    pub const ONE: Spin = Spin(2);

    /// From a positive half-integer value.
    pub fn new(s: f64) -> Result<Spin> {
        let twice = 2.0 * s;
        let rounded = libm::round(twice);
        if !(s > 0.0) || !s.is_finite() || libm::fabs(twice - rounded) > 1e-12 {
            return Err(Error::InvalidSpin(s));
        }
        Ok(Spin(rounded as u32))
    }

    /// From `2s`; zero is allowed here because coupled multiplets can be singlets.
    pub const fn from_twice(twice: u32) -> Spin {
        Spin(twice)
    }

    #[inline]
    pub const fn twice(self) -> u32 {
        self.0
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0 as f64 / 2.0
    }

    #[inline]
    pub const fn multiplicity(self) -> usize {
        self.0 as usize + 1
    }

    /// `s(s+1)`
    #[inline]
    pub fn casimir(self) -> f64 {
        let s = self.value();
        s * (s + 1.0)
    }
}

impl fmt::Display for Spin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_multiple_of(2) {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

/// Spin matrices in the `|s, m⟩` basis ordered `m = s, s-1, …, -s` (ħ = 1).
#[derive(Clone, Debug)]
pub struct SpinOps {
    pub s: Spin,
    pub sx: CMatrix,
    pub sy: CMatrix,
    pub sz: CMatrix,
    pub s_plus: CMatrix,
    pub s_minus: CMatrix,
}

impl SpinOps {
    pub fn new(s: Spin) -> Result<SpinOps> {
        if s.twice() == 0 {
            return Err(Error::InvalidSpin(0.0));
        }
        let n = s.multiplicity();
        let sv = s.value();
        let m_of = |i: usize| sv - i as f64;
        let sz = CMatrix::diag_real(&(0..n).map(m_of).collect::<Vec<_>>());
        let mut s_plus = CMatrix::zeros(n, n);
        for i in 1..n {
            let m = m_of(i);
            s_plus[(i - 1, i)] = c64(libm::sqrt(sv * (sv + 1.0) - m * (m + 1.0)), 0.0);
        }
        let s_minus = s_plus.adjoint();
        let sx = (&s_plus + &s_minus).scale_real(0.5);
        let sy = (&s_plus - &s_minus).scale(c64(0.0, -0.5));
        Ok(SpinOps {
            s,
            sx,
            sy,
            sz,
            s_plus,
            s_minus,
        })
    }

    /// Convenience wrapper for `spin_matrices(1/2)` and friends.
    pub fn from_value(s: f64) -> Result<SpinOps> {
        SpinOps::new(Spin::new(s)?)
    }

    pub fn dim(&self) -> usize {
        self.s.multiplicity()
    }

    /// `[sx, x]`-style component accessor: 0 → x, 1 → y, 2 → z.
    pub fn component(&self, axis: usize) -> &CMatrix {
        match axis {
            0 => &self.sx,
            1 => &self.sy,
            2 => &self.sz,
            _ => panic!("spin component index {axis} out of range"),
        }
    }
}

/// Standard spin matrices for spin `s`.
pub fn spin_matrices(s: f64) -> Result<SpinOps> {
    SpinOps::from_value(s)
}

/// Electronic manifolds of the chromophore.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Manifold {
    /// Singlet ground state.
    Gs,
    /// Singlet excited state.
    Es,
    /// Lowest triplet.
    T,
}

impl Manifold {
    pub const ALL: [Manifold; 3] = [Manifold::Gs, Manifold::Es, Manifold::T];

    pub const fn label(self) -> &'static str {
        match self {
            Manifold::Gs => "gs",
            Manifold::Es => "es",
            Manifold::T => "t",
        }
    }
}

impl fmt::Display for Manifold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Manifold {
    type Err = Error;
    fn from_str(s: &str) -> Result<Manifold> {
        match s {
            "gs" => Ok(Manifold::Gs),
            "es" => Ok(Manifold::Es),
            "t" => Ok(Manifold::T),
            other => Err(Error::UnknownManifold(other.to_string())),
        }
    }
}

/// What a tensor factor of a manifold represents physically.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpinRole {
    /// The chromophore triplet spin (only present in the `t` manifold).
    Triplet,
    /// Radical number `k` (zero-based).
    Radical(usize),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ManifoldBlock {
    pub label: Manifold,
    /// Tensor factors, first factor slowest-varying.
    pub factors: Vec<(SpinRole, Spin)>,
    pub dim: usize,
    pub offset: usize,
}

impl ManifoldBlock {
    pub fn spins(&self) -> Vec<Spin> {
        self.factors.iter().map(|&(_, s)| s).collect()
    }

    pub fn factor_of(&self, role: SpinRole) -> Option<usize> {
        self.factors.iter().position(|&(r, _)| r == role)
    }
}

/// Which part of a manifold an operator acts on when embedded.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Factor {
    /// The operator spans the whole manifold block.
    Whole,
    /// The operator acts on one tensor factor; identities elsewhere.
    Index(usize),
}

/// Direct sum of electronic manifolds, each a tensor product of spins.
#[derive(Clone, Debug, PartialEq)]
pub struct StructuredSpace {
    manifolds: Vec<ManifoldBlock>,
    total_dim: usize,
}

impl StructuredSpace {
    pub fn new(layout: Vec<(Manifold, Vec<(SpinRole, Spin)>)>) -> StructuredSpace {
        let mut offset = 0;
        let mut manifolds = Vec::with_capacity(layout.len());
        for (label, factors) in layout {
            assert!(
                manifolds.iter().all(|m: &ManifoldBlock| m.label != label),
                "duplicate manifold {label}"
            );
            let dim = factors.iter().map(|(_, s)| s.multiplicity()).product();
            manifolds.push(ManifoldBlock {
                label,
                factors,
                dim,
                offset,
            });
            offset += dim;
        }
        StructuredSpace {
            manifolds,
            total_dim: offset,
        }
    }

    #[inline]
    pub fn total_dim(&self) -> usize {
        self.total_dim
    }

    /// Dimension of the vectorized operator space.
    #[inline]
    pub fn liouville_dim(&self) -> usize {
        self.total_dim * self.total_dim
    }

    pub fn manifolds(&self) -> &[ManifoldBlock] {
        &self.manifolds
    }

    pub fn manifold(&self, label: Manifold) -> Result<&ManifoldBlock> {
        self.manifolds
            .iter()
            .find(|m| m.label == label)
            .ok_or_else(|| Error::UnknownManifold(label.label().to_string()))
    }

    /// Global basis index of `local` within `manifold`.
    pub fn index_of(&self, manifold: Manifold, local: usize) -> Result<usize> {
        let block = self.manifold(manifold)?;
        if local >= block.dim {
            return Err(Error::DimensionMismatch {
                expected: block.dim,
                found: local,
            });
        }
        Ok(block.offset + local)
    }

    pub fn projector(&self, manifold: Manifold) -> Result<CMatrix> {
        let block = self.manifold(manifold)?;
        self.embed(&CMatrix::identity(block.dim), manifold, Factor::Whole)
    }

    /// Places `op` on the block of `manifold`, tensored with identities on the
    /// other factors of that manifold, and zero elsewhere.
    pub fn embed(&self, op: &CMatrix, manifold: Manifold, factor: Factor) -> Result<CMatrix> {
        let block = self.manifold(manifold)?;
        let local = match factor {
            Factor::Whole => {
                if op.rows() != block.dim || op.cols() != block.dim {
                    return Err(Error::DimensionMismatch {
                        expected: block.dim,
                        found: op.rows(),
                    });
                }
                op.clone()
            }
            Factor::Index(k) => {
                let &(_, spin) = block.factors.get(k).ok_or(Error::UnknownFactor {
                    manifold: manifold.label(),
                    factor: k,
                })?;
                if op.rows() != spin.multiplicity() || op.cols() != spin.multiplicity() {
                    return Err(Error::DimensionMismatch {
                        expected: spin.multiplicity(),
                        found: op.rows(),
                    });
                }
                let before: usize = block.factors[..k].iter().map(|(_, s)| s.multiplicity()).product();
                let after: usize = block.factors[k + 1..].iter().map(|(_, s)| s.multiplicity()).product();
                CMatrix::identity(before).kron(op).kron(&CMatrix::identity(after))
            }
        };
        let mut out = CMatrix::zeros(self.total_dim, self.total_dim);
        out.set_block(block.offset, block.offset, &local);
        Ok(out)
    }

    /// `|target_state⟩⟨source_state|` between two manifolds, with both states
    /// given as vectors in the local product bases.
    pub fn transition(
        &self,
        target: Manifold,
        target_state: &[crate::Complex64],
        source: Manifold,
        source_state: &[crate::Complex64],
    ) -> Result<CMatrix> {
        let tb = self.manifold(target)?;
        let sb = self.manifold(source)?;
        if target_state.len() != tb.dim {
            return Err(Error::DimensionMismatch {
                expected: tb.dim,
                found: target_state.len(),
            });
        }
        if source_state.len() != sb.dim {
            return Err(Error::DimensionMismatch {
                expected: sb.dim,
                found: source_state.len(),
            });
        }
        let mut out = CMatrix::zeros(self.total_dim, self.total_dim);
        for (i, &a) in target_state.iter().enumerate() {
            if a == ZERO {
                continue;
            }
            for (j, &b) in source_state.iter().enumerate() {
                out[(tb.offset + i, sb.offset + j)] = a * b.conj();
            }
        }
        Ok(out)
    }

    /// Lifts a state vector of one manifold into the full space.
    pub fn lift_state(&self, manifold: Manifold, local: &[crate::Complex64]) -> Result<Vec<crate::Complex64>> {
        let block = self.manifold(manifold)?;
        if local.len() != block.dim {
            return Err(Error::DimensionMismatch {
                expected: block.dim,
                found: local.len(),
            });
        }
        let mut out = vec![ZERO; self.total_dim];
        out[block.offset..block.offset + block.dim].copy_from_slice(local);
        Ok(out)
    }

    /// Sum over every manifold that carries `role` of the embedded `op`.
    pub fn embed_role(&self, op: &CMatrix, role: SpinRole) -> Result<CMatrix> {
        let mut out = CMatrix::zeros(self.total_dim, self.total_dim);
        for block in &self.manifolds {
            if let Some(k) = block.factor_of(role) {
                out += &self.embed(op, block.label, Factor::Index(k))?;
            }
        }
        Ok(out)
    }
}

/// Quantum numbers of one total-spin basis state.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoupledLabel {
    pub total: Spin,
    /// `2M`
    pub twice_m: i32,
    /// 1-based index distinguishing repeated multiplets with the same total spin.
    pub multiplet: usize,
    /// Intermediate couplings, innermost first.
    pub path: Vec<Spin>,
}

impl CoupledLabel {
    pub fn m(&self) -> f64 {
        self.twice_m as f64 / 2.0
    }
}

/// Total-spin eigenbasis of a tensor product of spins.
#[derive(Clone, Debug)]
pub struct CoupledBasis {
    pub spins: Vec<Spin>,
    /// Column `k` is coupled state `k` in the product basis.
    pub transform: CMatrix,
    pub labels: Vec<CoupledLabel>,
}

impl CoupledBasis {
    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn state(&self, k: usize) -> Vec<crate::Complex64> {
        self.transform.column(k)
    }

    /// Index of the state with the given quantum numbers.
    pub fn find(&self, total: Spin, twice_m: i32, multiplet: usize) -> Option<usize> {
        self.labels
            .iter()
            .position(|l| l.total == total && l.twice_m == twice_m && l.multiplet == multiplet)
    }

    /// Number of distinct multiplets with total spin `total`.
    pub fn multiplicity_of(&self, total: Spin) -> usize {
        self.labels
            .iter()
            .filter(|l| l.total == total)
            .map(|l| l.multiplet)
            .max()
            .unwrap_or(0)
    }

    /// Total `S²`, `S_z` in the product basis.
    pub fn total_spin_operators(&self) -> (CMatrix, CMatrix) {
        total_spin_operators(&self.spins)
    }
}

/// `(S_tot², S_tot,z)` for a tensor product of spins.
pub fn total_spin_operators(spins: &[Spin]) -> (CMatrix, CMatrix) {
    let dims: Vec<usize> = spins.iter().map(|s| s.multiplicity()).collect();
    let total: usize = dims.iter().product();
    let mut comps = [
        CMatrix::zeros(total, total),
        CMatrix::zeros(total, total),
        CMatrix::zeros(total, total),
    ];
    for (k, &s) in spins.iter().enumerate() {
        let ops = SpinOps::new(s).expect("positive spin");
        let before: usize = dims[..k].iter().product();
        let after: usize = dims[k + 1..].iter().product();
        for (axis, comp) in comps.iter_mut().enumerate() {
            let e = CMatrix::identity(before)
                .kron(ops.component(axis))
                .kron(&CMatrix::identity(after));
            *comp += &e;
        }
    }
    let mut s2 = CMatrix::zeros(total, total);
    for comp in &comps {
        s2 += &comp.matmul(comp);
    }
    let [_, _, sz] = comps;
    (s2, sz)
}

struct Multiplet {
    total: Spin,
    path: Vec<Spin>,
    // columns ordered M = S, S-1, …, -S
    states: Vec<Vec<crate::Complex64>>,
}

/// Couples a list of spins to total spin, innermost pair at the end of the
/// list: `s₀ ⊗ (s₁ ⊗ (… ⊗ sₙ))`.
///
/// States carry Condon–Shortley phases. Repeated multiplets of equal total
/// spin are numbered by descending intermediate spin, so for `(1, ½, ½)` the
/// two S = 1 multiplets are "triplet ⊗ radical-pair triplet" (index 1) and
/// "triplet ⊗ radical-pair singlet" (index 2).
pub fn couple_to_total_spin(spins: &[Spin]) -> Result<CoupledBasis> {
    if spins.is_empty() {
        return Err(Error::InvalidParameter {
            name: "spins",
            reason: "at least one spin is required".to_string(),
        });
    }
    if let Some(bad) = spins.iter().find(|s| s.twice() == 0) {
        return Err(Error::InvalidSpin(bad.value()));
    }
    let multiplets = couple_recursive(spins);
    let dim: usize = spins.iter().map(|s| s.multiplicity()).product();

    let mut order: Vec<usize> = (0..multiplets.len()).collect();
    order.sort_by(|&a, &b| {
        multiplets[b]
            .total
            .cmp(&multiplets[a].total)
            .then_with(|| multiplets[b].path.cmp(&multiplets[a].path))
    });

    let mut transform = CMatrix::zeros(dim, dim);
    let mut labels = Vec::with_capacity(dim);
    let mut col = 0;
    let mut prev_total = None;
    let mut index = 0;
    for &mi in &order {
        let mult = &multiplets[mi];
        if prev_total == Some(mult.total) {
            index += 1;
        } else {
            index = 1;
            prev_total = Some(mult.total);
        }
        for (k, state) in mult.states.iter().enumerate() {
            transform.set_column(col, state);
            labels.push(CoupledLabel {
                total: mult.total,
                twice_m: mult.total.twice() as i32 - 2 * k as i32,
                multiplet: index,
                path: mult.path.clone(),
            });
            col += 1;
        }
    }
    Ok(CoupledBasis {
        spins: spins.to_vec(),
        transform,
        labels,
    })
}

fn couple_recursive(spins: &[Spin]) -> Vec<Multiplet> {
    let first = spins[0];
    if spins.len() == 1 {
        let n = first.multiplicity();
        let states = (0..n)
            .map(|k| {
                let mut v = vec![ZERO; n];
                v[k] = c64(1.0, 0.0);
                v
            })
            .collect();
        return vec![Multiplet {
            total: first,
            path: Vec::new(),
            states,
        }];
    }
    let rest = couple_recursive(&spins[1..]);
    let n_first = first.multiplicity();
    let rest_dim: usize = spins[1..].iter().map(|s| s.multiplicity()).product();
    let mut out = Vec::new();
    for inner in rest {
        let j1 = first.twice() as i32;
        let j2 = inner.total.twice() as i32;
        let mut big = j1 + j2;
        while big >= (j1 - j2).abs() {
            let mut states = Vec::with_capacity(big as usize + 1);
            let mut mm = big;
            while mm >= -big {
                let mut v = vec![ZERO; n_first * rest_dim];
                for a in 0..n_first {
                    let m1 = j1 - 2 * a as i32;
                    let m2 = mm - m1;
                    if m2.abs() > j2 {
                        continue;
                    }
                    let cg = clebsch_gordan(j1, m1, j2, m2, big, mm);
                    if cg == 0.0 {
                        continue;
                    }
                    let b = ((j2 - m2) / 2) as usize;
                    for (idx, &amp) in inner.states[b].iter().enumerate() {
                        v[a * rest_dim + idx] += amp * cg;
                    }
                }
                states.push(v);
                mm -= 2;
            }
            let mut path = inner.path.clone();
            if spins.len() > 2 {
                path.push(inner.total);
            }
            out.push(Multiplet {
                total: Spin::from_twice(big as u32),
                path,
                states,
            });
            big -= 2;
        }
    }
    out
}

fn factorial(n: i32) -> f64 {
    debug_assert!(n >= 0);
    (1..=n).map(|k| k as f64).product()
}

/// `⟨j1 m1; j2 m2 | J M⟩` with every argument passed as twice its value.
/// Racah's closed form, Condon–Shortley phase convention.
pub fn clebsch_gordan(j1: i32, m1: i32, j2: i32, m2: i32, j: i32, m: i32) -> f64 {
    if m1 + m2 != m
        || m1.abs() > j1
        || m2.abs() > j2
        || m.abs() > j
        || j > j1 + j2
        || j < (j1 - j2).abs()
        || (j1 + j2 + j) % 2 != 0
        || (j1 + m1) % 2 != 0
        || (j2 + m2) % 2 != 0
        || (j + m) % 2 != 0
    {
        return 0.0;
    }
    // half-integer arithmetic on doubled values
    let h = |x: i32| x / 2;
    let pref = (j + 1) as f64 * factorial(h(j + j1 - j2)) * factorial(h(j - j1 + j2)) * factorial(h(j1 + j2 - j))
        / factorial(h(j1 + j2 + j) + 1);
    let pref2 = factorial(h(j + m))
        * factorial(h(j - m))
        * factorial(h(j1 - m1))
        * factorial(h(j1 + m1))
        * factorial(h(j2 - m2))
        * factorial(h(j2 + m2));
    let mut sum = 0.0;
    let mut k = 0;
    loop {
        let a = h(j1 + j2 - j) - k;
        let b = h(j1 - m1) - k;
        let c = h(j2 + m2) - k;
        if a < 0 || b < 0 || c < 0 {
            break;
        }
        let d = h(j - j2 + m1) + k;
        let e = h(j - j1 - m2) + k;
        if d >= 0 && e >= 0 {
            let term = 1.0 / (factorial(k) * factorial(a) * factorial(b) * factorial(c) * factorial(d) * factorial(e));
            if k % 2 == 0 {
                sum += term;
            } else {
                sum -= term;
            }
        }
        k += 1;
    }
    libm::sqrt(pref * pref2) * sum
}

//! Radical–triplet spin models.
//!
//! The Hilbert space is a direct sum of three electronic manifolds: the
//! ground singlet `gs` and excited singlet `es` of the chromophore, which
//! carry only the radical spins, and the lowest triplet `t`, which carries
//! the triplet spin `S = 1` next to the radicals. Energies are in mK and the
//! frame is the resonant rotating frame of the laser, so both singlet
//! manifolds sit at zero electronic energy.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::error::{Error, Result};
use crate::linalg::{c64, CMatrix};
use crate::liouville::{dissipative_part, hamiltonian_superop, DensityOperator, SuperOperator};
use crate::spin::{couple_to_total_spin, CoupledBasis, Factor, Manifold, Spin, SpinOps, SpinRole, StructuredSpace};
use crate::units::UnitSystem;

/// Number of radicals attached to the chromophore.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ModelKind {
    /// Single radical.
    Srts,
    /// Two radicals.
    Drts,
}

impl ModelKind {
    pub const fn radicals(self) -> usize {
        match self {
            ModelKind::Srts => 1,
            ModelKind::Drts => 2,
        }
    }

    pub const fn label(self) -> &'static str {
        match self {
            ModelKind::Srts => "SRTS",
            ModelKind::Drts => "DRTS",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for ModelKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "SRTS" => Ok(ModelKind::Srts),
            "DRTS" => Ok(ModelKind::Drts),
            _ => Err(Error::InvalidParameter {
                name: "kind",
                reason: format!("`{s}` is neither SRTS nor DRTS"),
            }),
        }
    }
}

/// Physical parameters. Every energy and rate is in mK.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelParams {
    pub kind: ModelKind,
    pub g_triplet: f64,
    pub g_radical: f64,
    /// `μ_B |B|` with the field along z.
    pub zeeman: f64,
    /// Triplet–radical exchange, signed.
    pub j_exchange: f64,
    pub d_zfs: f64,
    pub e_zfs: f64,
    /// Laser coupling between `gs` and `es` in the rotating frame.
    pub v_laser: f64,
    /// Rate of each of the `s₊`, `s₋` channels of the first radical.
    pub gamma_radical_flip: f64,
    /// Rate of the `s_z` channel of the first radical.
    pub gamma_radical_dephase: f64,
    /// Second radical (DRTS only); `None` copies the first radical's value.
    pub gamma_radical2_flip: Option<f64>,
    pub gamma_radical2_dephase: Option<f64>,
    pub gamma_triplet_flip: f64,
    pub gamma_triplet_dephase: f64,
    /// Intersystem crossing `es → t`.
    pub gamma_isc: f64,
    /// Return `t → gs`.
    pub gamma_decay: f64,
}

impl ModelParams {
    /// Baseline parameter set for the given model.
    pub fn baseline(kind: ModelKind) -> ModelParams {
        ModelParams {
            kind,
            g_triplet: 2.0,
            g_radical: 2.0,
            zeeman: 200.0,
            j_exchange: -10.0,
            d_zfs: 20.0,
            e_zfs: 3.0,
            v_laser: 0.67,
            gamma_radical_flip: 0.067,
            gamma_radical_dephase: 0.0,
            gamma_radical2_flip: None,
            gamma_radical2_dephase: None,
            gamma_triplet_flip: 67.0,
            gamma_triplet_dephase: 0.0,
            gamma_isc: 33.0,
            gamma_decay: 0.035,
        }
    }

    pub fn srts() -> ModelParams {
        Self::baseline(ModelKind::Srts)
    }

    pub fn drts() -> ModelParams {
        Self::baseline(ModelKind::Drts)
    }

    /// Every rate set to zero: the closed-system limit.
    pub fn without_dissipation(mut self) -> ModelParams {
        self.gamma_radical_flip = 0.0;
        self.gamma_radical_dephase = 0.0;
        if self.kind == ModelKind::Drts {
            self.gamma_radical2_flip = Some(0.0);
            self.gamma_radical2_dephase = Some(0.0);
        }
        self.gamma_triplet_flip = 0.0;
        self.gamma_triplet_dephase = 0.0;
        self.gamma_isc = 0.0;
        self.gamma_decay = 0.0;
        self
    }

    pub fn radical2_flip(&self) -> f64 {
        self.gamma_radical2_flip.unwrap_or(self.gamma_radical_flip)
    }

    pub fn radical2_dephase(&self) -> f64 {
        self.gamma_radical2_dephase.unwrap_or(self.gamma_radical_dephase)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [
            ("g_triplet", self.g_triplet),
            ("g_radical", self.g_radical),
            ("zeeman", self.zeeman),
            ("j_exchange", self.j_exchange),
            ("d_zfs", self.d_zfs),
            ("e_zfs", self.e_zfs),
            ("v_laser", self.v_laser),
        ];
        for (name, value) in finite {
            if !value.is_finite() {
                return Err(Error::InvalidParameter {
                    name,
                    reason: format!("{value} is not finite"),
                });
            }
        }
        let rates = [
            ("gamma_radical_flip", Some(self.gamma_radical_flip)),
            ("gamma_radical_dephase", Some(self.gamma_radical_dephase)),
            ("gamma_radical2_flip", self.gamma_radical2_flip),
            ("gamma_radical2_dephase", self.gamma_radical2_dephase),
            ("gamma_triplet_flip", Some(self.gamma_triplet_flip)),
            ("gamma_triplet_dephase", Some(self.gamma_triplet_dephase)),
            ("gamma_isc", Some(self.gamma_isc)),
            ("gamma_decay", Some(self.gamma_decay)),
        ];
        for (name, value) in rates {
            if let Some(v) = value {
                if !(v >= 0.0) || !v.is_finite() {
                    return Err(Error::InvalidParameter {
                        name,
                        reason: format!("rate {v} must be finite and non-negative"),
                    });
                }
            }
        }
        if self.kind == ModelKind::Srts {
            for (name, value) in [
                ("gamma_radical2_flip", self.gamma_radical2_flip),
                ("gamma_radical2_dephase", self.gamma_radical2_dephase),
            ] {
                if matches!(value, Some(v) if v != 0.0) {
                    return Err(Error::InvalidParameter {
                        name,
                        reason: String::from("a single-radical model has no second radical"),
                    });
                }
            }
        }
        Ok(())
    }
}

impl Default for ModelParams {
    fn default() -> Self {
        Self::srts()
    }
}

/// The manifold layout for `kind`: `gs` and `es` carry the radicals, `t`
/// carries the triplet spin followed by the radicals.
pub fn build_space(kind: ModelKind) -> StructuredSpace {
    let radicals: Vec<(SpinRole, Spin)> = (0..kind.radicals())
        .map(|k| (SpinRole::Radical(k), Spin::HALF))
        .collect();
    let mut triplet = alloc::vec![(SpinRole::Triplet, Spin::ONE)];
    triplet.extend(radicals.iter().copied());
    StructuredSpace::new(alloc::vec![
        (Manifold::Gs, radicals.clone()),
        (Manifold::Es, radicals),
        (Manifold::T, triplet),
    ])
}

fn triplet_ops() -> SpinOps {
    SpinOps::new(Spin::ONE).expect("spin one")
}

fn radical_ops() -> SpinOps {
    SpinOps::new(Spin::HALF).expect("spin one half")
}

/// Full-space Hamiltonian without laser coupling, in mK.
fn coherent_hamiltonian(space: &StructuredSpace, params: &ModelParams) -> Result<CMatrix> {
    let st = triplet_ops();
    let sr = radical_ops();
    let t = |op: &CMatrix| space.embed(op, Manifold::T, Factor::Index(0));

    let mut h = t(&st.sz)?.scale_real(params.g_triplet * params.zeeman);
    for k in 0..params.kind.radicals() {
        let role = SpinRole::Radical(k);
        h.axpy(
            c64(params.g_radical * params.zeeman, 0.0),
            &space.embed_role(&sr.sz, role)?,
        );
        if params.j_exchange != 0.0 {
            let factor = space.manifold(Manifold::T)?.factor_of(role).expect("radical in t");
            for axis in 0..3 {
                let big = t(st.component(axis))?;
                let small = space.embed(sr.component(axis), Manifold::T, Factor::Index(factor))?;
                h.axpy(c64(params.j_exchange, 0.0), &big.matmul(&small));
            }
        }
    }
    let sz2 = st.sz.matmul(&st.sz);
    let anis = &st.sx.matmul(&st.sx) - &st.sy.matmul(&st.sy);
    h.axpy(c64(params.d_zfs, 0.0), &t(&sz2)?);
    h.axpy(c64(params.e_zfs, 0.0), &t(&anis)?);
    Ok(h)
}

/// Triplet-manifold block of the spin Hamiltonian, in mK.
pub fn build_spin_hamiltonian(params: &ModelParams) -> Result<CMatrix> {
    params.validate()?;
    let space = build_space(params.kind);
    let h = coherent_hamiltonian(&space, params)?;
    let block = space.manifold(Manifold::T)?;
    Ok(h.block(block.offset, block.offset, block.dim, block.dim))
}

/// Full Hamiltonian in mK; with `laser_on` the singlet manifolds are
/// coupled by `V` on identical radical states.
pub fn build_hamiltonian(params: &ModelParams, laser_on: bool) -> Result<CMatrix> {
    params.validate()?;
    let space = build_space(params.kind);
    let mut h = coherent_hamiltonian(&space, params)?;
    if laser_on {
        add_laser(&mut h, &space, params.v_laser)?;
    }
    Ok(h)
}

fn add_laser(h: &mut CMatrix, space: &StructuredSpace, v: f64) -> Result<()> {
    let gs = space.manifold(Manifold::Gs)?;
    let es = space.manifold(Manifold::Es)?;
    for i in 0..gs.dim {
        h[(es.offset + i, gs.offset + i)] += c64(v, 0.0);
        h[(gs.offset + i, es.offset + i)] += c64(v, 0.0);
    }
    Ok(())
}

/// Physical origin of a jump channel.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ChannelFamily {
    /// Relaxation of radical `k`, acting in every manifold.
    Radical(usize),
    /// Relaxation of the bare triplet spin inside `t`.
    Triplet,
    /// Spin-conserving `es → t` crossing.
    Isc,
    /// Spin-conserving `t → gs` return.
    Decay,
}

/// One Lindblad channel: a jump operator on the full space and its rate in mK.
#[derive(Clone, Debug, PartialEq)]
pub struct JumpChannel {
    pub label: String,
    pub family: ChannelFamily,
    pub rate: f64,
    pub operator: CMatrix,
}

/// Total-spin basis of the `es` manifold (radicals only; for a single
/// radical this is the bare spin).
pub fn es_coupled_basis(kind: ModelKind) -> CoupledBasis {
    couple_to_total_spin(&alloc::vec![Spin::HALF; kind.radicals()]).expect("valid spins")
}

/// Total-spin basis of the `t` manifold, coupling the radicals first.
pub fn t_coupled_basis(kind: ModelKind) -> CoupledBasis {
    let mut spins = alloc::vec![Spin::ONE];
    spins.extend(core::iter::repeat_n(Spin::HALF, kind.radicals()));
    couple_to_total_spin(&spins).expect("valid spins")
}

fn m_label(twice_m: i32, total: Spin) -> &'static str {
    match (total.twice(), twice_m) {
        (1, 1) => "up",
        (1, -1) => "down",
        (_, 2) => "plus",
        (_, 0) => "zero",
        (_, -2) => "minus",
        _ => "other",
    }
}

fn isc_and_decay(space: &StructuredSpace, params: &ModelParams, out: &mut Vec<JumpChannel>) {
    let es = es_coupled_basis(params.kind);
    let t = t_coupled_basis(params.kind);
    // Each (S, M) state of es feeds every t multiplet with the same total
    // spin; the rate is split evenly so that the total outflow of every es
    // state equals the crossing rate.
    for (ti, tl) in t.labels.iter().enumerate() {
        let Some(ei) = es
            .labels
            .iter()
            .position(|l| l.total == tl.total && l.twice_m == tl.twice_m)
        else {
            continue;
        };
        let branches = t.multiplicity_of(tl.total);
        let name = match (params.kind, tl.total.twice()) {
            (ModelKind::Srts, _) => format!("doublet_{}", m_label(tl.twice_m, tl.total)),
            (ModelKind::Drts, 0) => String::from("singlet"),
            (ModelKind::Drts, _) => format!("triplet{}_{}", tl.multiplet, m_label(tl.twice_m, tl.total)),
        };
        let t_state = t.state(ti);
        let es_state = es.state(ei);
        out.push(JumpChannel {
            label: format!("isc.{name}"),
            family: ChannelFamily::Isc,
            rate: params.gamma_isc / branches as f64,
            operator: space
                .transition(Manifold::T, &t_state, Manifold::Es, &es_state)
                .expect("dimensions match"),
        });
        out.push(JumpChannel {
            label: format!("decay.{name}"),
            family: ChannelFamily::Decay,
            rate: params.gamma_decay,
            operator: space
                .transition(Manifold::Gs, &es_state, Manifold::T, &t_state)
                .expect("dimensions match"),
        });
    }
}

/// All Lindblad channels of the model, including zero-rate ones.
///
/// Order: radical relaxation (per radical: `s₊`, `s₋`, `s_z`), triplet
/// relaxation (`S₊`, `S₋`, `S_z`), crossing channels, return channels.
pub fn build_jump_channels(params: &ModelParams) -> Result<Vec<JumpChannel>> {
    params.validate()?;
    let space = build_space(params.kind);
    let sr = radical_ops();
    let st = triplet_ops();
    let mut out = Vec::new();
    for k in 0..params.kind.radicals() {
        let (flip, dephase) = if k == 0 {
            (params.gamma_radical_flip, params.gamma_radical_dephase)
        } else {
            (params.radical2_flip(), params.radical2_dephase())
        };
        for (name, op, rate) in [
            ("s_plus", &sr.s_plus, flip),
            ("s_minus", &sr.s_minus, flip),
            ("s_z", &sr.sz, dephase),
        ] {
            out.push(JumpChannel {
                label: format!("radical{}.{name}", k + 1),
                family: ChannelFamily::Radical(k),
                rate,
                operator: space.embed_role(op, SpinRole::Radical(k))?,
            });
        }
    }
    for (name, op, rate) in [
        ("s_plus", &st.s_plus, params.gamma_triplet_flip),
        ("s_minus", &st.s_minus, params.gamma_triplet_flip),
        ("s_z", &st.sz, params.gamma_triplet_dephase),
    ] {
        out.push(JumpChannel {
            label: format!("triplet.{name}"),
            family: ChannelFamily::Triplet,
            rate,
            operator: space.embed(op, Manifold::T, Factor::Index(0))?,
        });
    }
    let mut transitions = Vec::new();
    isc_and_decay(&space, params, &mut transitions);
    out.extend(transitions.iter().filter(|c| c.family == ChannelFamily::Isc).cloned());
    out.extend(transitions.into_iter().filter(|c| c.family == ChannelFamily::Decay));
    Ok(out)
}

/// Maximally mixed radical state in the ground manifold.
pub fn initial_state(params: &ModelParams) -> Result<DensityOperator> {
    params.validate()?;
    let space = build_space(params.kind);
    let dim = space.manifold(Manifold::Gs)?.dim;
    DensityOperator::new(space.projector(Manifold::Gs)?.scale_real(1.0 / dim as f64))
}

/// Everything needed to propagate one parameter point.
#[derive(Clone, Debug)]
pub struct Model {
    pub params: ModelParams,
    pub units: UnitSystem,
    pub space: StructuredSpace,
    pub channels: Vec<JumpChannel>,
    /// Hamiltonian without laser, mK.
    pub h_off: CMatrix,
    /// Hamiltonian with laser, mK.
    pub h_on: CMatrix,
    /// Generators in rad/ns.
    pub l_off: SuperOperator,
    pub l_on: SuperOperator,
}

impl Model {
    pub fn new(params: ModelParams) -> Result<Model> {
        Self::with_units(params, UnitSystem::codata())
    }

    pub fn with_units(params: ModelParams, units: UnitSystem) -> Result<Model> {
        params.validate()?;
        let space = build_space(params.kind);
        let channels = build_jump_channels(&params)?;
        let h_off = coherent_hamiltonian(&space, &params)?;
        let mut h_on = h_off.clone();
        add_laser(&mut h_on, &space, params.v_laser)?;
        let scale = units.mk_to_rad_per_ns;
        let dissipative = dissipative_part(space.total_dim(), &channels, &units)?;
        let l_off = &hamiltonian_superop(&h_off.scale_real(scale))? + &dissipative;
        let l_on = &hamiltonian_superop(&h_on.scale_real(scale))? + &dissipative;
        Ok(Model {
            params,
            units,
            space,
            channels,
            h_off,
            h_on,
            l_off,
            l_on,
        })
    }

    pub fn kind(&self) -> ModelKind {
        self.params.kind
    }

    pub fn dim(&self) -> usize {
        self.space.total_dim()
    }

    pub fn initial_state(&self) -> DensityOperator {
        initial_state(&self.params).expect("validated parameters")
    }

    pub fn liouvillian(&self, laser_on: bool) -> &SuperOperator {
        if laser_on {
            &self.l_on
        } else {
            &self.l_off
        }
    }

    pub fn hamiltonian(&self, laser_on: bool) -> &CMatrix {
        if laser_on {
            &self.h_on
        } else {
            &self.h_off
        }
    }

    /// Projector onto the `t`-manifold states of total spin `total`.
    pub fn triplet_total_spin_projector(&self, total: Spin) -> CMatrix {
        let basis = t_coupled_basis(self.kind());
        let block = self.space.manifold(Manifold::T).expect("t manifold");
        let mut p = CMatrix::zeros(block.dim, block.dim);
        for (k, label) in basis.labels.iter().enumerate() {
            if label.total != total {
                continue;
            }
            let v = basis.state(k);
            for i in 0..block.dim {
                for j in 0..block.dim {
                    p[(i, j)] += v[i] * v[j].conj();
                }
            }
        }
        self.space
            .embed(&p, Manifold::T, Factor::Whole)
            .expect("block dimensions match")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{eigh, ZERO};

    fn sorted_eigs(h: &CMatrix) -> Vec<f64> {
        eigh(h).unwrap().values
    }

    #[test]
    fn space_dimensions() {
        let s = build_space(ModelKind::Srts);
        assert_eq!(s.total_dim(), 10);
        assert_eq!(s.liouville_dim(), 100);
        let d = build_space(ModelKind::Drts);
        assert_eq!(d.total_dim(), 20);
        assert_eq!(d.liouville_dim(), 400);
        let dims: Vec<usize> = d.manifolds().iter().map(|m| m.dim).collect();
        assert_eq!(dims, alloc::vec![4, 4, 12]);
    }

    #[test]
    fn zero_field_splitting_levels() {
        // oracle: the 3×3 ZFS matrix diagonalized on its own
        let mut p = ModelParams::srts();
        p.zeeman = 0.0;
        p.j_exchange = 0.0;
        let h = build_spin_hamiltonian(&p).unwrap();
        let st = triplet_ops();
        let mut zfs = st.sz.matmul(&st.sz).scale_real(20.0);
        zfs.axpy(c64(3.0, 0.0), &(&st.sx.matmul(&st.sx) - &st.sy.matmul(&st.sy)));
        let single = sorted_eigs(&zfs);
        for (got, want) in single.iter().zip([0.0, 17.0, 23.0]) {
            assert!((got - want).abs() < 1e-12);
        }
        let got = sorted_eigs(&h);
        let want = [0.0, 0.0, 17.0, 17.0, 23.0, 23.0];
        for (g, w) in got.iter().zip(want) {
            assert!((g - w).abs() < 1e-12, "{got:?}");
        }
    }

    #[test]
    fn exchange_levels() {
        // S·s = (S_tot² − S² − s²)/2 on 1 ⊗ 1/2
        let mut p = ModelParams::srts();
        p.zeeman = 0.0;
        p.d_zfs = 0.0;
        p.e_zfs = 0.0;
        let got = sorted_eigs(&build_spin_hamiltonian(&p).unwrap());
        let quartet = -10.0 * (0.5 * (3.75 - 2.0 - 0.75));
        let doublet = -10.0 * (0.5 * (0.75 - 2.0 - 0.75));
        let mut want = alloc::vec![quartet; 4];
        want.extend([doublet; 2]);
        want.sort_by(f64::total_cmp);
        for (g, w) in got.iter().zip(&want) {
            assert!((g - w).abs() < 1e-12, "{got:?}");
        }
    }

    #[test]
    fn zero_parameters_give_zero_operator() {
        let mut p = ModelParams::srts();
        p.zeeman = 0.0;
        p.j_exchange = 0.0;
        p.d_zfs = 0.0;
        p.e_zfs = 0.0;
        p.v_laser = 0.0;
        assert!(build_hamiltonian(&p, true).unwrap().norm_max() == 0.0);
    }

    #[test]
    fn laser_term_placement() {
        for kind in [ModelKind::Srts, ModelKind::Drts] {
            let p = ModelParams::baseline(kind);
            let on = build_hamiltonian(&p, true).unwrap();
            let off = build_hamiltonian(&p, false).unwrap();
            let diff = &on - &off;
            assert!((diff.norm_max() - 0.67).abs() < 1e-15);
            let space = build_space(kind);
            let gs = space.manifold(Manifold::Gs).unwrap().clone();
            let es = space.manifold(Manifold::Es).unwrap().clone();
            let cross = diff.block(es.offset, gs.offset, es.dim, gs.dim);
            assert!(cross.max_abs_diff(&CMatrix::identity(gs.dim).scale_real(0.67)) == 0.0);
            let mut rest = diff.clone();
            rest.set_block(es.offset, gs.offset, &CMatrix::zeros(es.dim, gs.dim));
            rest.set_block(gs.offset, es.offset, &CMatrix::zeros(gs.dim, es.dim));
            assert!(rest.norm_max() == 0.0);
            // gs and es blocks of the laser-free Hamiltonian coincide
            let gsb = off.block(gs.offset, gs.offset, gs.dim, gs.dim);
            let esb = off.block(es.offset, es.offset, es.dim, es.dim);
            assert_eq!(gsb, esb);
            assert!(off.block(gs.offset, es.offset, gs.dim, es.dim).norm_max() == 0.0);
            assert!(on.hermiticity_defect() < 1e-12);
        }
    }

    #[test]
    fn channel_counts_and_labels() {
        let s = build_jump_channels(&ModelParams::srts()).unwrap();
        assert_eq!(s.len(), 10);
        assert_eq!(s.iter().filter(|c| c.family == ChannelFamily::Isc).count(), 2);
        assert!(s.iter().any(|c| c.label == "isc.doublet_up"));
        let d = build_jump_channels(&ModelParams::drts()).unwrap();
        assert_eq!(d.len(), 23);
        assert_eq!(d.iter().filter(|c| c.family == ChannelFamily::Isc).count(), 7);
        assert_eq!(d.iter().filter(|c| c.family == ChannelFamily::Decay).count(), 7);
        assert!(d.iter().any(|c| c.label == "isc.singlet"));
        assert!(d.iter().any(|c| c.label == "decay.triplet2_minus"));
    }

    #[test]
    fn srts_isc_target_state() {
        let p = ModelParams::srts();
        let space = build_space(p.kind);
        let ch = build_jump_channels(&p).unwrap();
        let up = ch.iter().find(|c| c.label == "isc.doublet_up").unwrap();
        let es_up = space.lift_state(Manifold::Es, &[c64(1.0, 0.0), ZERO]).unwrap();
        let out = up.operator.matvec(&es_up);
        let t = space.manifold(Manifold::T).unwrap();
        let local = &out[t.offset..t.offset + t.dim];
        // oracle: |1/2, +1/2⟩ from the S² eigenvector with Sz = +1/2
        let (s2, sz) = crate::spin::total_spin_operators(&[Spin::ONE, Spin::HALF]);
        let e = eigh(&(&s2 + &sz.scale_real(0.01))).unwrap();
        let oracle = e.vectors.column(1); // eigenvalue 0.75 + 0.005
        assert!((e.values[1] - 0.755).abs() < 1e-12);
        let overlap: crate::Complex64 = oracle.iter().zip(local).map(|(a, b)| a.conj() * b).sum();
        assert!((overlap.norm() - 1.0).abs() < 1e-12);
        // fixed phase convention: √(2/3) on |1⟩|↓⟩, −√(1/3) on |0⟩|↑⟩
        assert!((local[1] - c64(libm::sqrt(2.0 / 3.0), 0.0)).norm() < 1e-12);
        assert!((local[2] - c64(-libm::sqrt(1.0 / 3.0), 0.0)).norm() < 1e-12);
    }

    #[test]
    fn transitions_conserve_total_spin() {
        for kind in [ModelKind::Srts, ModelKind::Drts] {
            let p = ModelParams::baseline(kind);
            let space = build_space(kind);
            let es = es_coupled_basis(kind);
            let t = t_coupled_basis(kind);
            let chans = build_jump_channels(&p).unwrap();
            let isc: Vec<_> = chans.iter().filter(|c| c.family == ChannelFamily::Isc).collect();
            for c in &isc {
                for (k, label) in es.labels.iter().enumerate() {
                    let v = space.lift_state(Manifold::Es, &es.state(k)).unwrap();
                    let out = c.operator.matvec(&v);
                    let tb = space.manifold(Manifold::T).unwrap();
                    let local = &out[tb.offset..tb.offset + tb.dim];
                    if crate::linalg::vec_norm2(local) < 1e-12 {
                        continue;
                    }
                    // the image is a coupled t state with the same (S, M)
                    let hit: Vec<usize> = (0..t.dim())
                        .filter(|&j| {
                            let overlap: crate::Complex64 =
                                t.state(j).iter().zip(local).map(|(a, b)| a.conj() * b).sum();
                            overlap.norm() > 1e-10
                        })
                        .collect();
                    assert_eq!(hit.len(), 1);
                    assert_eq!(t.labels[hit[0]].total, label.total);
                    assert_eq!(t.labels[hit[0]].twice_m, label.twice_m);
                }
            }
            // rate-weighted outflow is the es projector
            let mut sum = CMatrix::zeros(space.total_dim(), space.total_dim());
            for c in &isc {
                sum.axpy(
                    c64(c.rate / p.gamma_isc, 0.0),
                    &c.operator.adjoint().matmul(&c.operator),
                );
                let ldl = c.operator.adjoint().matmul(&c.operator);
                assert!(ldl.matmul(&ldl).max_abs_diff(&ldl) < 1e-12, "partial isometry");
            }
            assert!(sum.max_abs_diff(&space.projector(Manifold::Es).unwrap()) < 1e-12);
            for c in chans.iter().filter(|c| c.family == ChannelFamily::Decay) {
                let ldl = c.operator.adjoint().matmul(&c.operator);
                assert!(ldl.matmul(&ldl).max_abs_diff(&ldl) < 1e-12);
            }
        }
    }

    #[test]
    fn initial_states() {
        let s = initial_state(&ModelParams::srts()).unwrap();
        let mut want = alloc::vec![0.0; 10];
        want[0] = 0.5;
        want[1] = 0.5;
        assert_eq!(s.matrix(), &CMatrix::diag_real(&want));
        let d = initial_state(&ModelParams::drts()).unwrap();
        for i in 0..4 {
            assert!((d.matrix()[(i, i)].re - 0.25).abs() < 1e-15);
        }
        assert!((d.matrix().trace().re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn parameter_validation() {
        let mut p = ModelParams::srts();
        p.gamma_decay = -1.0;
        assert!(matches!(
            p.validate(),
            Err(Error::InvalidParameter {
                name: "gamma_decay",
                ..
            })
        ));
        let mut p = ModelParams::srts();
        p.gamma_radical2_flip = Some(0.1);
        assert!(matches!(
            p.validate(),
            Err(Error::InvalidParameter {
                name: "gamma_radical2_flip",
                ..
            })
        ));
        p.gamma_radical2_flip = Some(0.0);
        assert!(p.validate().is_ok());
        let mut p = ModelParams::drts();
        p.zeeman = f64::NAN;
        assert!(p.validate().is_err());
        assert_eq!("drts".parse::<ModelKind>().unwrap(), ModelKind::Drts);
        assert!("xrts".parse::<ModelKind>().is_err());
    }

    #[test]
    fn model_generators_are_stable() {
        let m = Model::new(ModelParams::srts()).unwrap();
        assert_eq!(m.l_on.matrix().rows(), 100);
        let e = crate::linalg::eig(m.l_on.matrix()).unwrap();
        let abscissa = e.values.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
        assert!(abscissa <= 1e-10, "{abscissa}");
        let dual = m.l_on.adjoint().apply(&CMatrix::identity(10));
        assert!(dual.norm_max() < 1e-10);
    }

    #[test]
    fn quintet_projector_rank() {
        let m = Model::new(ModelParams::drts()).unwrap();
        let p = m.triplet_total_spin_projector(Spin::from_twice(4));
        assert!((p.trace().re - 5.0).abs() < 1e-12);
        assert!(p.matmul(&p).max_abs_diff(&p) < 1e-12);
    }
}

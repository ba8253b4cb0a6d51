//! Time evolution under piecewise-constant Liouvillians.
//!
//! A [`SegmentPropagator`] applies `exp(L Δ)` to vectorized states for one
//! constant generator. Long intervals use a cache of binary powers
//! `E_j = exp(L h 2^j)` built by repeated squaring from one Padé
//! exponential, so that any interval costs a handful of matrix-vector
//! products plus a short Taylor step. Short intervals use the Taylor action
//! alone.

use alloc::vec::Vec;
use core::cell::{OnceCell, RefCell};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{c64, eig, expm, CMatrix, Eig, TaylorAction};
use crate::liouville::{devectorize, vectorize, DensityOperator, SuperOperator};
use crate::model::{Model, ModelParams};
use crate::spin::{Manifold, SpinOps, SpinRole, StructuredSpace};

/// Largest tolerated `|Tr ρ − 1|` before propagation is declared failed.
pub const TRACE_DRIFT_LIMIT: f64 = 1e-6;

/// Laser-on/laser-off schedule and sampling grid, in ns.
#[derive(Clone, Debug, PartialEq)]
pub struct Protocol {
    pub t_on_end: f64,
    pub t_total: f64,
    pub sample_times: Vec<f64>,
}

impl Protocol {
    pub const DEFAULT_T_ON_END: f64 = 8.0;
    pub const DEFAULT_T_TOTAL: f64 = 4000.0;
    pub const DEFAULT_SAMPLES: usize = 200;
    /// First point of the default logarithmic grid.
    pub const DEFAULT_FIRST_SAMPLE: f64 = 1e-2;

    pub fn new(t_on_end: f64, t_total: f64, sample_times: Vec<f64>) -> Result<Protocol> {
        let p = Protocol {
            t_on_end,
            t_total,
            sample_times,
        };
        p.validate()?;
        Ok(p)
    }

    /// `samples` log-spaced points on `(0, t_total]` plus the switch time.
    pub fn with_log_grid(t_on_end: f64, t_total: f64, samples: usize) -> Result<Protocol> {
        Self::new(t_on_end, t_total, log_grid(t_on_end, t_total, samples))
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_on_end > 0.0) || !(self.t_on_end <= self.t_total) || !self.t_total.is_finite() {
            return Err(Error::InvalidParameter {
                name: "protocol",
                reason: alloc::format!("need 0 < t_on_end ({}) <= t_total ({})", self.t_on_end, self.t_total),
            });
        }
        if self.sample_times.is_empty() {
            return Err(Error::InvalidParameter {
                name: "sample_times",
                reason: "no sample times".into(),
            });
        }
        let in_range = self.sample_times.iter().all(|&t| (0.0..=self.t_total).contains(&t));
        let increasing = self.sample_times.windows(2).all(|w| w[0] < w[1]);
        if !in_range || !increasing {
            return Err(Error::InvalidParameter {
                name: "sample_times",
                reason: "sample times must increase strictly within [0, t_total]".into(),
            });
        }
        Ok(())
    }
}

impl Default for Protocol {
    fn default() -> Self {
        Protocol::with_log_grid(Self::DEFAULT_T_ON_END, Self::DEFAULT_T_TOTAL, Self::DEFAULT_SAMPLES)
            .expect("default protocol is valid")
    }
}

/// Log-spaced points from [`Protocol::DEFAULT_FIRST_SAMPLE`] (or below
/// `t_total` if that is shorter) to `t_total`, with `t_on_end` inserted.
pub fn log_grid(t_on_end: f64, t_total: f64, samples: usize) -> Vec<f64> {
    let first = Protocol::DEFAULT_FIRST_SAMPLE.min(t_total * 1e-3);
    let mut out: Vec<f64> = if samples <= 1 {
        alloc::vec![t_total]
    } else {
        let (a, b) = (libm::log10(first), libm::log10(t_total));
        (0..samples)
            .map(|k| libm::pow(10.0, a + (b - a) * k as f64 / (samples - 1) as f64))
            .collect()
    };
    if let Some(last) = out.last_mut() {
        *last = t_total;
    }
    out.push(t_on_end);
    out.sort_by(f64::total_cmp);
    out.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs().max(1.0));
    out
}

/// Populations of the three electronic manifolds.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ManifoldPopulations {
    pub gs: f64,
    pub es: f64,
    pub t: f64,
}

impl ManifoldPopulations {
    pub fn get(&self, m: Manifold) -> f64 {
        match m {
            Manifold::Gs => self.gs,
            Manifold::Es => self.es,
            Manifold::T => self.t,
        }
    }

    pub fn sum(&self) -> f64 {
        self.gs + self.es + self.t
    }
}

/// Sampled states of one protocol run.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<DensityOperator>,
    pub populations: Vec<ManifoldPopulations>,
    /// `⟨s₁·s₂⟩` per sample, for two-radical models.
    pub spin_correlation: Option<Vec<f64>>,
}

impl Trajectory {
    pub fn population_series(&self, m: Manifold) -> Vec<f64> {
        self.populations.iter().map(|p| p.get(m)).collect()
    }

    /// Index of the sample closest to `t`.
    pub fn nearest_index(&self, t: f64) -> usize {
        let mut best = 0;
        for (i, &ti) in self.times.iter().enumerate() {
            if (ti - t).abs() < (self.times[best] - t).abs() {
                best = i;
            }
        }
        best
    }
}

/// `exp(L Δ)` applied to vectorized operators for a fixed generator.
///
/// Each call picks its method from `Δ` alone: a sparse Taylor action while
/// its cost stays within [`TAYLOR_BUDGET`] dense matrix products, the power
/// cache otherwise. The cache grows on demand and its entries do not depend
/// on how far it has grown, so results are reproducible bit for bit whatever
/// sequence of calls came before.
pub struct SegmentPropagator {
    generator: CMatrix,
    taylor: TaylorAction,
    norm: f64,
    step: f64,
    powers: RefCell<Vec<CMatrix>>,
}

/// Taylor is used while `matvecs · nnz ≤ TAYLOR_BUDGET · n³`.
pub const TAYLOR_BUDGET: f64 = 0.25;

impl SegmentPropagator {
    pub fn new(l: &SuperOperator) -> SegmentPropagator {
        Self::from_matrix(l.matrix().clone())
    }

    pub fn from_matrix(generator: CMatrix) -> SegmentPropagator {
        let norm = generator.norm_1();
        let step = if norm > 0.0 {
            crate::linalg::expm::THETA_13 / norm
        } else {
            f64::INFINITY
        };
        SegmentPropagator {
            taylor: TaylorAction::new(&generator),
            generator,
            norm,
            step,
            powers: RefCell::new(Vec::new()),
        }
    }

    pub fn generator(&self) -> &CMatrix {
        &self.generator
    }

    /// Whether an interval `dt` goes through the power cache.
    pub fn uses_power_cache(&self, dt: f64) -> bool {
        let n = self.generator.rows() as f64;
        let cost = self.taylor.matvecs(dt) as f64 * self.taylor.nnz().max(1) as f64;
        self.norm > 0.0 && cost > TAYLOR_BUDGET * n * n * n
    }

    /// Number of cached powers so far.
    pub fn cached_powers(&self) -> usize {
        self.powers.borrow().len()
    }

    fn ensure_powers(&self, count: usize) -> Result<()> {
        let mut powers = self.powers.borrow_mut();
        if powers.is_empty() {
            powers.push(expm(&self.generator.scale_real(self.step))?);
        }
        while powers.len() < count {
            let last = powers.last().expect("nonempty");
            let next = last.matmul(last);
            powers.push(next);
        }
        Ok(())
    }

    /// `exp(L dt) v` for `dt ≥ 0`.
    pub fn apply(&self, v: &[Complex64], dt: f64) -> Result<Vec<Complex64>> {
        if !(dt >= 0.0) || !dt.is_finite() {
            return Err(Error::InvalidParameter {
                name: "dt",
                reason: alloc::format!("propagation interval {dt} must be finite and non-negative"),
            });
        }
        if !self.uses_power_cache(dt) {
            return Ok(self.taylor.apply(dt, v));
        }
        let mut count = libm::floor(dt / self.step);
        let mut rest = dt - count * self.step;
        if rest < 0.0 {
            count -= 1.0;
            rest += self.step;
        }
        let bits = count as u64;
        let needed = (64 - bits.leading_zeros()) as usize;
        self.ensure_powers(needed.max(1))?;
        let powers = self.powers.borrow();
        let mut out = self.taylor.apply(rest, v);
        let mut rem = bits;
        let mut j = 0;
        while rem != 0 {
            if rem & 1 == 1 {
                out = powers[j].matvec(&out);
            }
            rem >>= 1;
            j += 1;
        }
        Ok(out)
    }
}

fn trace_of_vec(v: &[Complex64], d: usize) -> Complex64 {
    (0..d).map(|i| v[i * d + i]).sum()
}

fn check_trace(v: &[Complex64], d: usize, expected: Complex64) -> Result<()> {
    let drift = (trace_of_vec(v, d) - expected).norm();
    if drift > TRACE_DRIFT_LIMIT || !drift.is_finite() {
        return Err(Error::TraceDrift { drift });
    }
    Ok(())
}

/// `exp(L t) ρ`. The trace is checked, never renormalized.
pub fn matrix_exponential_apply(l: &SuperOperator, state: &DensityOperator, t: f64) -> Result<DensityOperator> {
    if !(t >= 0.0) {
        return Err(Error::InvalidParameter {
            name: "t",
            reason: alloc::format!("propagation time {t} is negative"),
        });
    }
    if state.dim() != l.dim() {
        return Err(Error::DimensionMismatch {
            expected: l.dim(),
            found: state.dim(),
        });
    }
    let prop = SegmentPropagator::new(l);
    let v = prop.apply(&state.to_vector(), t)?;
    check_trace(&v, l.dim(), state.matrix().trace())?;
    Ok(DensityOperator::from_trusted(devectorize(&v)))
}

/// `Tr[P_m ρ]`.
pub fn manifold_population(space: &StructuredSpace, state: &DensityOperator, manifold: Manifold) -> Result<f64> {
    let block = space.manifold(manifold)?;
    if state.dim() != space.total_dim() {
        return Err(Error::DimensionMismatch {
            expected: space.total_dim(),
            found: state.dim(),
        });
    }
    let m = state.matrix();
    Ok((block.offset..block.offset + block.dim).map(|i| m[(i, i)].re).sum())
}

pub fn populations(space: &StructuredSpace, state: &DensityOperator) -> Result<ManifoldPopulations> {
    Ok(ManifoldPopulations {
        gs: manifold_population(space, state, Manifold::Gs)?,
        es: manifold_population(space, state, Manifold::Es)?,
        t: manifold_population(space, state, Manifold::T)?,
    })
}

/// `s₁·s₂` with both radicals embedded across all manifolds.
pub fn radical_pair_operator(space: &StructuredSpace) -> Result<CMatrix> {
    let carries = |k| {
        space
            .manifolds()
            .iter()
            .any(|m| m.factor_of(SpinRole::Radical(k)).is_some())
    };
    if !carries(1) {
        return Err(Error::WrongModel { expected: "DRTS" });
    }
    let s = SpinOps::new(crate::spin::Spin::HALF)?;
    let mut out = CMatrix::zeros(space.total_dim(), space.total_dim());
    for axis in 0..3 {
        let a = space.embed_role(s.component(axis), SpinRole::Radical(0))?;
        let b = space.embed_role(s.component(axis), SpinRole::Radical(1))?;
        out += &a.matmul(&b);
    }
    Ok(out)
}

/// `⟨s₁·s₂⟩`, defined for two-radical spaces only.
pub fn spin_correlation(space: &StructuredSpace, state: &DensityOperator) -> Result<f64> {
    let op = radical_pair_operator(space)?;
    Ok(state.expectation(&op).re)
}

/// Runs the protocol for a freshly built model.
pub fn evolve_protocol(params: &ModelParams, protocol: &Protocol) -> Result<Trajectory> {
    let model = Model::new(params.clone())?;
    evolve_model(&model, protocol)
}

/// Runs the protocol from the model's initial state.
pub fn evolve_model(model: &Model, protocol: &Protocol) -> Result<Trajectory> {
    evolve_from(model, &model.initial_state(), protocol)
}

/// Propagates `rho0` (taken at `t = 0`) through the protocol.
pub fn evolve_from(model: &Model, rho0: &DensityOperator, protocol: &Protocol) -> Result<Trajectory> {
    protocol.validate()?;
    let corr_op = radical_pair_operator(&model.space).ok();
    let prop = ProtocolPropagator::new(model, rho0, protocol.t_on_end)?;
    let states = protocol
        .sample_times
        .iter()
        .map(|&t| prop.state_at(t))
        .collect::<Result<Vec<_>>>()?;
    let populations = states
        .iter()
        .map(|s| populations(&model.space, s))
        .collect::<Result<Vec<_>>>()?;
    let spin_correlation = corr_op.map(|op| states.iter().map(|s| s.expectation(&op).re).collect());
    Ok(Trajectory {
        times: protocol.sample_times.clone(),
        states,
        populations,
        spin_correlation,
    })
}

/// The two segment propagators of a laser-on/laser-off run.
///
/// Every state is computed from `t = 0` (through the switch state), so the
/// result at a given time does not depend on which other times were asked
/// for.
pub struct ProtocolPropagator {
    on: SegmentPropagator,
    off: SegmentPropagator,
    t_on_end: f64,
    start: Vec<Complex64>,
    trace: Complex64,
    dim: usize,
    switch_state: OnceCell<Vec<Complex64>>,
}

impl ProtocolPropagator {
    pub fn new(model: &Model, rho0: &DensityOperator, t_on_end: f64) -> Result<ProtocolPropagator> {
        if !(t_on_end >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "t_on_end",
                reason: alloc::format!("{t_on_end} is negative"),
            });
        }
        if rho0.dim() != model.dim() {
            return Err(Error::DimensionMismatch {
                expected: model.dim(),
                found: rho0.dim(),
            });
        }
        let on = SegmentPropagator::new(&model.l_on);
        let off = SegmentPropagator::new(&model.l_off);
        let start = rho0.to_vector();
        let trace = rho0.matrix().trace();
        Ok(ProtocolPropagator {
            on,
            off,
            t_on_end,
            start,
            trace,
            dim: model.dim(),
            switch_state: OnceCell::new(),
        })
    }

    /// State at the end of pumping, computed on first use.
    fn switch_state(&self) -> Result<&Vec<Complex64>> {
        if let Some(v) = self.switch_state.get() {
            return Ok(v);
        }
        let v = self.on.apply(&self.start, self.t_on_end)?;
        check_trace(&v, self.dim, self.trace)?;
        Ok(self.switch_state.get_or_init(|| v))
    }

    /// Whether the laser is on at `t` (the switch instant counts as off).
    pub fn laser_on_at(&self, t: f64) -> bool {
        t < self.t_on_end
    }

    pub fn state_vector_at(&self, t: f64) -> Result<Vec<Complex64>> {
        let v = if t <= self.t_on_end {
            self.on.apply(&self.start, t)?
        } else {
            self.off.apply(self.switch_state()?, t - self.t_on_end)?
        };
        check_trace(&v, self.dim, self.trace)?;
        Ok(v)
    }

    pub fn state_at(&self, t: f64) -> Result<DensityOperator> {
        Ok(DensityOperator::from_trusted(devectorize(&self.state_vector_at(t)?)))
    }
}

/// State at a single time under the protocol (laser on until `t_on_end`).
pub fn state_at(model: &Model, t: f64, t_on_end: f64) -> Result<DensityOperator> {
    ProtocolPropagator::new(model, &model.initial_state(), t_on_end)?.state_at(t)
}

/// Condition numbers above this are reported as ill-conditioned.
pub const SPECTRAL_CONDITION_LIMIT: f64 = 1e8;

/// Eigendecomposition `L = Σ λ_k r_k l_kᵀ` with `l_jᵀ r_k = δ_jk`.
#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<Complex64>,
    /// Columns are right eigenvectors.
    pub right: CMatrix,
    /// Rows are left eigenvectors.
    pub left: CMatrix,
    /// `‖R‖₁ ‖L‖₁`
    pub condition: f64,
}

impl SpectralDecomposition {
    fn from_eig(e: Eig) -> SpectralDecomposition {
        SpectralDecomposition {
            eigenvalues: e.values,
            right: e.right,
            left: e.left,
            condition: e.condition,
        }
    }

    /// `Σ r_k e^{λ_k t} (l_kᵀ v)`
    pub fn apply_exp(&self, t: f64, v: &[Complex64]) -> Vec<Complex64> {
        let mut coeffs = self.left.matvec(v);
        for (c, lam) in coeffs.iter_mut().zip(&self.eigenvalues) {
            *c *= (lam * t).exp();
        }
        self.right.matvec(&coeffs)
    }

    pub fn exp_matrix(&self, t: f64) -> CMatrix {
        let mut scaled = self.right.clone();
        let n = scaled.rows();
        for (k, lam) in self.eigenvalues.iter().enumerate() {
            let f = (lam * t).exp();
            for i in 0..n {
                scaled[(i, k)] *= f;
            }
        }
        scaled.matmul(&self.left)
    }

    /// `Σ r_k (l_kᵀ v) / (z − λ_k)`, the resolvent `(z − L)⁻¹ v`.
    pub fn apply_resolvent(&self, z: Complex64, v: &[Complex64]) -> Vec<Complex64> {
        let mut coeffs = self.left.matvec(v);
        for (c, lam) in coeffs.iter_mut().zip(&self.eigenvalues) {
            *c /= z - lam;
        }
        self.right.matvec(&coeffs)
    }

    /// Eigenvalues within `tol` of zero.
    pub fn zero_modes(&self, tol: f64) -> usize {
        self.eigenvalues.iter().filter(|z| z.norm() <= tol).count()
    }

    pub fn spectral_abscissa(&self) -> f64 {
        self.eigenvalues.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Full non-Hermitian eigendecomposition of a superoperator.
pub fn spectral_decompose(l: &SuperOperator) -> Result<SpectralDecomposition> {
    spectral_decompose_matrix(l.matrix())
}

pub fn spectral_decompose_matrix(m: &CMatrix) -> Result<SpectralDecomposition> {
    let e = eig(m)?;
    if !(e.condition <= SPECTRAL_CONDITION_LIMIT) {
        return Err(Error::IllConditioned { condition: e.condition });
    }
    Ok(SpectralDecomposition::from_eig(e))
}

/// Classical fourth-order Runge–Kutta with a fixed step.
pub fn integrate_rk4(
    mut rhs: impl FnMut(f64, &[Complex64]) -> Vec<Complex64>,
    y0: &[Complex64],
    t0: f64,
    t1: f64,
    steps: usize,
) -> Vec<Complex64> {
    let h = (t1 - t0) / steps as f64;
    let mut y = y0.to_vec();
    let mut tmp = y.clone();
    let axpy = |out: &mut Vec<Complex64>, y: &[Complex64], k: &[Complex64], a: f64| {
        for ((o, &yi), &ki) in out.iter_mut().zip(y).zip(k) {
            *o = yi + ki * a;
        }
    };
    for step in 0..steps {
        let t = t0 + step as f64 * h;
        let k1 = rhs(t, &y);
        axpy(&mut tmp, &y, &k1, 0.5 * h);
        let k2 = rhs(t + 0.5 * h, &tmp);
        axpy(&mut tmp, &y, &k2, 0.5 * h);
        let k3 = rhs(t + 0.5 * h, &tmp);
        axpy(&mut tmp, &y, &k3, h);
        let k4 = rhs(t + h, &tmp);
        for i in 0..y.len() {
            y[i] += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * (h / 6.0);
        }
    }
    y
}

/// Splitting `L = L₀ + L₁` where `L₀ = −i[h₀, ·]` is unitary.
///
/// The interaction-picture state `ρ_I = e^{−L₀t} ρ` obeys
/// `dρ_I/dt = e^{−L₀t} L₁ e^{L₀t} ρ_I`; it is integrated with fixed-step RK4
/// and mapped back with `e^{L₀t}`.
pub struct InteractionPicture {
    energies: Vec<f64>,
    basis: CMatrix,
    perturbation: SuperOperator,
}

impl InteractionPicture {
    /// `h0` in rad/ns.
    pub fn new(h0: &CMatrix, perturbation: SuperOperator) -> Result<InteractionPicture> {
        let defect = h0.hermiticity_defect();
        if defect > 1e-10 * h0.norm_max().max(1.0) {
            return Err(Error::NotHermitian { defect });
        }
        if perturbation.dim() != h0.rows() {
            return Err(Error::DimensionMismatch {
                expected: h0.rows(),
                found: perturbation.dim(),
            });
        }
        let e = crate::linalg::eigh(h0)?;
        Ok(InteractionPicture {
            energies: e.values,
            basis: e.vectors,
            perturbation,
        })
    }

    fn unitary(&self, t: f64) -> CMatrix {
        // e^{−i h₀ t}
        let n = self.energies.len();
        let mut scaled = self.basis.clone();
        for (k, &e) in self.energies.iter().enumerate() {
            let f = c64(libm::cos(e * t), -libm::sin(e * t));
            for i in 0..n {
                scaled[(i, k)] *= f;
            }
        }
        scaled.matmul(&self.basis.adjoint())
    }

    /// `e^{L₀t} X = U X U†` with `U = e^{−i h₀ t}`.
    pub fn free_evolution(&self, x: &CMatrix, t: f64) -> CMatrix {
        let u = self.unitary(t);
        u.matmul(x).matmul(&u.adjoint())
    }

    /// `e^{−L₀t} L₁ e^{L₀t} X`
    pub fn perturbation_at(&self, t: f64, x: &CMatrix) -> CMatrix {
        let u = self.unitary(t);
        let forward = u.matmul(x).matmul(&u.adjoint());
        let kicked = self.perturbation.apply(&forward);
        u.adjoint().matmul(&kicked).matmul(&u)
    }

    /// `ρ(t)` obtained through the interaction picture.
    pub fn evolve(&self, rho0: &DensityOperator, t: f64, steps: usize) -> DensityOperator {
        let rho_i = integrate_rk4(
            |s, y| vectorize(&self.perturbation_at(s, &devectorize(y))),
            &rho0.to_vector(),
            0.0,
            t,
            steps,
        );
        DensityOperator::from_trusted(self.free_evolution(&devectorize(&rho_i), t))
    }
}

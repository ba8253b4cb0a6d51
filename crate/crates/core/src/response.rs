//! Open-system linear response.
//!
//! A probe couples through `H' ∝ B` and is read out through `A`. For a
//! reference state `ρ` evolving under `L₀`, the response function is
//! `φ(τ) = Tr[A e^{L₀τ} 𝔅ρ]` with `𝔅 = −i[B, ·]`; its damped Laplace
//! transform is
//!
//! ```text
//! χ(ω + iε) = ∫₀^∞ φ(τ) e^{(iω − ε)τ} dτ = −Tr[A (L₀ + iω − ε)⁻¹ 𝔅ρ]
//!           = −((L₀† − iω − ε)⁻¹ A†, 𝔅ρ)
//! ```
//!
//! which for a closed system reduces to Kubo's `i ∫ ⟨[B, A(τ)]⟩ e^{iωτ−ετ}`.
//! Frequencies and broadenings passed to the functions here are in rad/ns;
//! [`SpectrumConfig`] holds them in mK.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{c64, eigh, CMatrix, Lu, I};
use crate::liouville::{devectorize, perturbation_superop, vectorize, DensityOperator, SuperOperator};
use crate::model::{Model, ModelParams};
use crate::propagate::{Protocol, ProtocolPropagator, SegmentPropagator};
use crate::spin::{Factor, Manifold, Spin, SpinOps, SpinRole, StructuredSpace};
use crate::units::UnitSystem;

/// Human-readable statement of the sign and shift convention, recorded in
/// every output.
pub const SIGN_CONVENTION: &str =
    "chi(w+ie,t) = -Tr[A (L0 + i w - e)^-1 (-i[B, rho_t])] = -((L0^dag - i w - e)^-1 A^dag, -i[B, rho_t]); \
     closed limit i*Int <[B, A(tau)]> exp(i w tau - e tau); EPR signal = -Im chi";

/// One additive piece of the observable.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbeComponent {
    pub label: String,
    pub operator: CMatrix,
}

/// Observable `A` (as an ordered sum of components) and Hermitian
/// perturbation `B`.
#[derive(Clone, Debug, PartialEq)]
pub struct Probe {
    observable: CMatrix,
    generator: CMatrix,
    components: Vec<ProbeComponent>,
}

impl Probe {
    /// Single-component probe.
    pub fn new(observable: CMatrix, generator: CMatrix) -> Result<Probe> {
        Self::from_components(
            alloc::vec![ProbeComponent {
                label: "total".to_string(),
                operator: observable,
            }],
            generator,
        )
    }

    /// `A` is the sum of the components, accumulated in the given order.
    pub fn from_components(components: Vec<ProbeComponent>, generator: CMatrix) -> Result<Probe> {
        if components.is_empty() {
            return Err(Error::InvalidParameter {
                name: "components",
                reason: "a probe needs at least one component".into(),
            });
        }
        let d = generator.rows();
        if !generator.is_square() {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: generator.cols(),
            });
        }
        let defect = generator.hermiticity_defect();
        if defect > 1e-12 * generator.norm_max().max(1.0) {
            return Err(Error::NotHermitian { defect });
        }
        let mut observable = CMatrix::zeros(d, d);
        for c in &components {
            if c.operator.rows() != d || c.operator.cols() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: c.operator.rows(),
                });
            }
            observable += &c.operator;
        }
        Ok(Probe {
            observable,
            generator,
            components,
        })
    }

    /// Transverse spin probe `A = B = S_x + Σ s_kx`: the triplet operator in
    /// `t`, each radical operator across all manifolds.
    pub fn epr(space: &StructuredSpace) -> Result<Probe> {
        let st = SpinOps::new(Spin::ONE)?;
        let sr = SpinOps::new(Spin::HALF)?;
        let mut components = alloc::vec![ProbeComponent {
            label: "triplet".to_string(),
            operator: space.embed(&st.sx, Manifold::T, Factor::Index(0))?,
        }];
        let radicals = space
            .manifolds()
            .iter()
            .flat_map(|m| m.factors.iter())
            .filter_map(|&(r, _)| match r {
                SpinRole::Radical(k) => Some(k),
                SpinRole::Triplet => None,
            })
            .max()
            .map_or(0, |k| k + 1);
        for k in 0..radicals {
            components.push(ProbeComponent {
                label: alloc::format!("radical{}", k + 1),
                operator: space.embed_role(&sr.sx, SpinRole::Radical(k))?,
            });
        }
        let mut b = CMatrix::zeros(space.total_dim(), space.total_dim());
        for c in &components {
            b += &c.operator;
        }
        Self::from_components(components, b)
    }

    pub fn observable(&self) -> &CMatrix {
        &self.observable
    }

    pub fn generator(&self) -> &CMatrix {
        &self.generator
    }

    pub fn components(&self) -> &[ProbeComponent] {
        &self.components
    }

    pub fn labels(&self) -> Vec<String> {
        self.components.iter().map(|c| c.label.clone()).collect()
    }

    pub fn dim(&self) -> usize {
        self.generator.rows()
    }

    /// `𝔅 = −i[B, ·]`
    pub fn perturbation(&self) -> SuperOperator {
        perturbation_superop(&self.generator)
    }

    fn check_dim(&self, d: usize) -> Result<()> {
        if d != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: d,
            });
        }
        Ok(())
    }
}

/// A susceptibility value with its per-component parts; `total` is the sum
/// of `components` in order.
#[derive(Clone, Debug, PartialEq)]
pub struct ChiValue {
    pub total: Complex64,
    pub components: Vec<Complex64>,
}

impl ChiValue {
    fn from_components(components: Vec<Complex64>) -> ChiValue {
        let mut total = c64(0.0, 0.0);
        for &c in &components {
            total += c;
        }
        ChiValue { total, components }
    }
}

fn check_broadening(epsilon: f64, omega: f64) -> Result<()> {
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(Error::InvalidParameter {
            name: "epsilon",
            reason: alloc::format!("broadening {epsilon} must be positive"),
        });
    }
    if !omega.is_finite() {
        return Err(Error::InvalidParameter {
            name: "omega",
            reason: alloc::format!("frequency {omega} is not finite"),
        });
    }
    Ok(())
}

/// LU factors of `L₀ + iω − ε`, reusable for many states and probes.
pub struct Resolvent {
    lu: Lu,
    shifted: CMatrix,
    dim: usize,
}

impl Resolvent {
    /// `omega`, `epsilon` in rad/ns.
    pub fn new(l0: &SuperOperator, omega: f64, epsilon: f64) -> Result<Resolvent> {
        check_broadening(epsilon, omega)?;
        let mut shifted = l0.matrix().clone();
        shifted.add_diagonal(c64(-epsilon, omega));
        let lu = Lu::factor(&shifted)?;
        Ok(Resolvent {
            lu,
            shifted,
            dim: l0.dim(),
        })
    }

    /// `(L₀ + iω − ε)⁻¹ v`, with one step of iterative refinement.
    pub fn solve(&self, v: &[Complex64]) -> Vec<Complex64> {
        let mut x = self.lu.solve_vec(v);
        let ax = self.shifted.matvec(&x);
        let r: Vec<Complex64> = v.iter().zip(&ax).map(|(a, b)| a - b).collect();
        let dx = self.lu.solve_vec(&r);
        for (xi, di) in x.iter_mut().zip(&dx) {
            *xi += di;
        }
        x
    }

    /// Relative residual `‖(L₀ + iω − ε)x − v‖ / ‖v‖`.
    pub fn residual(&self, x: &[Complex64], v: &[Complex64]) -> f64 {
        let ax = self.shifted.matvec(x);
        let num = ax.iter().zip(v).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        let den = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if den == 0.0 {
            num
        } else {
            num / den
        }
    }

    /// Non-stationary susceptibility of `rho_t`.
    pub fn chi(&self, probe: &Probe, rho_t: &DensityOperator) -> Result<ChiValue> {
        probe.check_dim(self.dim)?;
        probe.check_dim(rho_t.dim())?;
        let kicked = probe.perturbation().apply_vec(&rho_t.to_vector());
        let response = devectorize(&self.solve(&kicked));
        let parts = probe
            .components
            .iter()
            .map(|c| -c.operator.trace_product(&response))
            .collect();
        Ok(ChiValue::from_components(parts))
    }
}

/// `χ(ω + iε, t)` of a (generally non-stationary) state `rho_t`.
pub fn chi_nonstationary(
    l0: &SuperOperator,
    probe: &Probe,
    rho_t: &DensityOperator,
    omega: f64,
    epsilon: f64,
) -> Result<ChiValue> {
    Resolvent::new(l0, omega, epsilon)?.chi(probe, rho_t)
}

/// Largest `‖L₀ vec ρ₀‖_max` accepted as stationary.
pub const STATIONARITY_TOL: f64 = 1e-8;

/// `χ(ω + iε)` of a stationary state, in the Heisenberg form
/// `i[(B X, ρ₀) − (X B, ρ₀)]` with `X = (L₀† − iω − ε)⁻¹ A†`.
pub fn chi_stationary(
    l0: &SuperOperator,
    probe: &Probe,
    rho0: &DensityOperator,
    omega: f64,
    epsilon: f64,
) -> Result<ChiValue> {
    check_broadening(epsilon, omega)?;
    probe.check_dim(l0.dim())?;
    probe.check_dim(rho0.dim())?;
    let residual = l0.residual(rho0.matrix());
    if residual > STATIONARITY_TOL {
        return Err(Error::NotStationary { residual });
    }
    let mut shifted = l0.matrix().adjoint();
    shifted.add_diagonal(c64(-epsilon, -omega));
    let lu = Lu::factor(&shifted)?;
    let b = probe.generator();
    let rho = rho0.matrix();
    let parts = probe
        .components
        .iter()
        .map(|c| {
            let x = devectorize(&lu.solve_vec(&vectorize(&c.operator.adjoint())));
            let first = b.matmul(&x).hs_inner(rho);
            let second = x.matmul(b).hs_inner(rho);
            I * (first - second)
        })
        .collect();
    Ok(ChiValue::from_components(parts))
}

/// Closed-system Kubo susceptibility from the eigendecomposition of `h`
/// (rad/ns); `rho0` must commute with `h`.
pub fn kubo_closed(h: &CMatrix, probe: &Probe, rho0: &DensityOperator, omega: f64, epsilon: f64) -> Result<ChiValue> {
    check_broadening(epsilon, omega)?;
    probe.check_dim(h.rows())?;
    probe.check_dim(rho0.dim())?;
    let defect = h.commutator(rho0.matrix()).norm_max();
    if defect > 1e-10 * h.norm_max().max(1.0) {
        return Err(Error::NonCommuting { defect });
    }
    let e = eigh(h)?;
    let v = &e.vectors;
    let vh = v.adjoint();
    let to_eigen = |x: &CMatrix| vh.matmul(x).matmul(v);
    let rho = to_eigen(rho0.matrix());
    let b = to_eigen(probe.generator());
    let energies = &e.values;
    let rho_b = rho.matmul(&b);
    let b_rho = b.matmul(&rho);
    let n = energies.len();
    let z = c64(omega, epsilon);
    let parts = probe
        .components
        .iter()
        .map(|c| {
            let a = to_eigen(&c.operator);
            let mut sum = c64(0.0, 0.0);
            // −Σ (ρB)_ml A_lm / (E_l − E_m + z) + Σ A_kl (Bρ)_lk / (E_k − E_l + z)
            for i in 0..n {
                for j in 0..n {
                    sum -= rho_b[(i, j)] * a[(j, i)] / (energies[j] - energies[i] + z);
                    sum += a[(i, j)] * b_rho[(j, i)] / (energies[i] - energies[j] + z);
                }
            }
            sum
        })
        .collect();
    Ok(ChiValue::from_components(parts))
}

/// `φ(τ) = Tr[A e^{L₀τ} 𝔅ρ_t]` on a nondecreasing grid `τ ≥ 0`.
///
/// The perturbed state is propagated from one grid point to the next.
pub fn phi_time_domain(
    l0: &SuperOperator,
    probe: &Probe,
    rho_t: &DensityOperator,
    tau_grid: &[f64],
) -> Result<Vec<Complex64>> {
    probe.check_dim(l0.dim())?;
    probe.check_dim(rho_t.dim())?;
    if tau_grid.iter().any(|&t| !(t >= 0.0)) || tau_grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidParameter {
            name: "tau_grid",
            reason: "delays must be non-negative and nondecreasing".into(),
        });
    }
    let prop = SegmentPropagator::new(l0);
    let a = probe.observable();
    let mut x = probe.perturbation().apply_vec(&rho_t.to_vector());
    let mut now = 0.0;
    let mut out = Vec::with_capacity(tau_grid.len());
    for &tau in tau_grid {
        x = prop.apply(&x, tau - now)?;
        now = tau;
        out.push(a.trace_product(&devectorize(&x)));
    }
    Ok(out)
}

/// Sweep settings. Energies in mK, times in ns.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumConfig {
    /// Microwave angular frequency as an energy.
    pub omega: f64,
    /// Numerical broadening of the resolvent.
    pub epsilon: f64,
    /// Zeeman energies `μ_B B` to sweep.
    pub field_grid: Vec<f64>,
    /// Time at which the reference state is taken.
    pub observe_time: f64,
}

impl SpectrumConfig {
    pub const DEFAULT_OMEGA: f64 = 200.0;
    pub const DEFAULT_EPSILON: f64 = 0.1;
    pub const DEFAULT_OBSERVE_TIME: f64 = 1.0;

    pub fn validate(&self) -> Result<()> {
        check_broadening(self.epsilon, self.omega)?;
        if self.field_grid.is_empty() || self.field_grid.iter().any(|f| !f.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "field_grid",
                reason: "the field grid must be nonempty and finite".into(),
            });
        }
        if !(self.observe_time >= 0.0) || !self.observe_time.is_finite() {
            return Err(Error::InvalidParameter {
                name: "observe_time",
                reason: alloc::format!("{} is not a valid time", self.observe_time),
            });
        }
        Ok(())
    }
}

impl Default for SpectrumConfig {
    fn default() -> Self {
        SpectrumConfig {
            omega: Self::DEFAULT_OMEGA,
            epsilon: Self::DEFAULT_EPSILON,
            field_grid: uniform_grid(0.0, 400.0, 201),
            observe_time: Self::DEFAULT_OBSERVE_TIME,
        }
    }
}

/// `n` evenly spaced points on `[lo, hi]`.
pub fn uniform_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => alloc::vec![lo],
        _ => (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect(),
    }
}

/// Susceptibility along a field sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumResult {
    pub fields: Vec<f64>,
    pub chi: Vec<Complex64>,
    /// `components[i][k]`: component `k` at field `i`.
    pub components: Vec<Vec<Complex64>>,
    pub component_labels: Vec<String>,
    pub convention: &'static str,
}

impl SpectrumResult {
    /// Absorption signal `−Im χ`.
    pub fn signal(&self) -> Vec<f64> {
        self.chi.iter().map(|z| -z.im).collect()
    }

    /// Signal divided by its largest magnitude (unchanged if all zero).
    pub fn normalized_signal(&self) -> Vec<f64> {
        normalize(&self.signal())
    }

    pub fn component_signal(&self, k: usize) -> Vec<f64> {
        self.components.iter().map(|c| -c[k].im).collect()
    }

    /// Largest `|Σ components − χ|` over the sweep.
    pub fn component_defect(&self) -> f64 {
        self.chi
            .iter()
            .zip(&self.components)
            .map(|(total, parts)| {
                let mut s = c64(0.0, 0.0);
                for &p in parts {
                    s += p;
                }
                (s - total).norm()
            })
            .fold(0.0, f64::max)
    }
}

/// `y / max |y|`.
pub fn normalize(y: &[f64]) -> Vec<f64> {
    let m = y.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if m == 0.0 {
        y.to_vec()
    } else {
        y.iter().map(|v| v / m).collect()
    }
}

/// Evaluates `point` at every field and assembles the result in grid order.
pub fn field_sweep(
    fields: &[f64],
    labels: Vec<String>,
    mut point: impl FnMut(f64) -> Result<ChiValue>,
) -> Result<SpectrumResult> {
    let mut chi = Vec::with_capacity(fields.len());
    let mut components = Vec::with_capacity(fields.len());
    for &f in fields {
        let v = point(f)?;
        chi.push(v.total);
        components.push(v.components);
    }
    Ok(SpectrumResult {
        fields: fields.to_vec(),
        chi,
        components,
        component_labels: labels,
        convention: SIGN_CONVENTION,
    })
}

/// χ at one field for a list of observation times, reusing the model,
/// propagators and resolvent factorizations.
///
/// The reference state evolves from the model's initial state under the
/// laser-on generator until `t_on_end` and the laser-off generator after;
/// the resolvent uses whichever generator is active at the observation time.
pub fn field_point_over_times(
    params: &ModelParams,
    config: &SpectrumConfig,
    t_on_end: f64,
    units: &UnitSystem,
    field: f64,
    times: &[f64],
) -> Result<Vec<ChiValue>> {
    let mut p = params.clone();
    p.zeeman = field;
    let model = Model::with_units(p, *units)?;
    let probe = Probe::epr(&model.space)?;
    let prop = ProtocolPropagator::new(&model, &model.initial_state(), t_on_end)?;
    let omega = units.mk_to_rad_per_ns(config.omega);
    let epsilon = units.mk_to_rad_per_ns(config.epsilon);
    let mut on: Option<Resolvent> = None;
    let mut off: Option<Resolvent> = None;
    let mut out = Vec::with_capacity(times.len());
    for &t in times {
        let rho = prop.state_at(t)?;
        let laser = prop.laser_on_at(t);
        let slot = if laser { &mut on } else { &mut off };
        if slot.is_none() {
            *slot = Some(Resolvent::new(model.liouvillian(laser), omega, epsilon)?);
        }
        out.push(slot.as_ref().expect("just set").chi(&probe, &rho)?);
    }
    Ok(out)
}

/// Component labels of the standard probe for a model kind.
pub fn epr_labels(params: &ModelParams) -> Vec<String> {
    let mut labels = alloc::vec!["triplet".to_string()];
    for k in 0..params.kind.radicals() {
        labels.push(alloc::format!("radical{}", k + 1));
    }
    labels
}

/// TR-EPR spectrum at `config.observe_time`.
pub fn epr_sweep(params: &ModelParams, config: &SpectrumConfig, protocol: &Protocol) -> Result<SpectrumResult> {
    epr_sweep_with_units(params, config, protocol, &UnitSystem::codata())
}

pub fn epr_sweep_with_units(
    params: &ModelParams,
    config: &SpectrumConfig,
    protocol: &Protocol,
    units: &UnitSystem,
) -> Result<SpectrumResult> {
    config.validate()?;
    params.validate()?;
    protocol.validate()?;
    let t_on_end = protocol.t_on_end;
    field_sweep(&config.field_grid, epr_labels(params), |f| {
        let mut v = field_point_over_times(params, config, t_on_end, units, f, &[config.observe_time])?;
        Ok(v.pop().expect("one time"))
    })
}

/// χ over a time × field grid.
#[derive(Clone, Debug, PartialEq)]
pub struct TreprSurface {
    pub times: Vec<f64>,
    pub fields: Vec<f64>,
    /// `chi[i][j]`: time `i`, field `j`.
    pub chi: Vec<Vec<Complex64>>,
    pub convention: &'static str,
}

impl TreprSurface {
    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.chi[i]
    }

    /// `Σ_j |Im χ|` per time.
    pub fn integrated_signal(&self) -> Vec<f64> {
        self.chi
            .iter()
            .map(|row| row.iter().map(|z| z.im.abs()).sum())
            .collect()
    }
}

/// Time-resolved surface; `config.observe_time` is ignored in favour of
/// `time_grid`.
pub fn trepr_surface(
    params: &ModelParams,
    config: &SpectrumConfig,
    protocol: &Protocol,
    time_grid: &[f64],
) -> Result<TreprSurface> {
    config.validate()?;
    params.validate()?;
    protocol.validate()?;
    let t_on_end = protocol.t_on_end;
    if time_grid.is_empty() || time_grid.iter().any(|&t| !(t >= 0.0) || !t.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "time_grid",
            reason: "times must be finite and non-negative".into(),
        });
    }
    let units = UnitSystem::codata();
    let columns = config
        .field_grid
        .iter()
        .map(|&f| field_point_over_times(params, config, t_on_end, &units, f, time_grid))
        .collect::<Result<Vec<_>>>()?;
    Ok(assemble_surface(time_grid, &config.field_grid, &columns))
}

/// Transposes per-field columns into a time-major surface.
pub fn assemble_surface(times: &[f64], fields: &[f64], columns: &[Vec<ChiValue>]) -> TreprSurface {
    let chi = (0..times.len())
        .map(|i| columns.iter().map(|col| col[i].total).collect())
        .collect();
    TreprSurface {
        times: times.to_vec(),
        fields: fields.to_vec(),
        chi,
        convention: SIGN_CONVENTION,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::liouville::{dissipator_with_rate, hamiltonian_superop};
    use crate::spin::spin_matrices;

    fn two_level(p: f64, w0: f64) -> (CMatrix, DensityOperator, Probe) {
        let s = spin_matrices(0.5).unwrap();
        let h = s.sz.scale_real(w0);
        let rho = DensityOperator::new(CMatrix::diag_real(&[p, 1.0 - p])).unwrap();
        let probe = Probe::new(s.sx.clone(), s.sx.clone()).unwrap();
        (h, rho, probe)
    }

    /// χ for A = B = s_x, h = ω₀ s_z, ρ = diag(p, 1−p), summed by hand:
    /// the |↑⟩↔|↓⟩ matrix elements are ½.
    fn hand_two_level(p: f64, w0: f64, w: f64, eps: f64) -> Complex64 {
        let z = c64(w, eps);
        let (e_up, e_dn) = (0.5 * w0, -0.5 * w0);
        let q = 1.0 - p;
        // −Σ ρ_m |B_ml|² / (E_l − E_m + z) + Σ ρ_m |A_ml|² / (E_m − E_l + z)
        let first = -(p * 0.25 / (e_dn - e_up + z) + q * 0.25 / (e_up - e_dn + z));
        let second = p * 0.25 / (e_up - e_dn + z) + q * 0.25 / (e_dn - e_up + z);
        first + second
    }

    #[test]
    fn kubo_two_level_by_hand() {
        let (h, rho, probe) = two_level(0.8, 1.3);
        for w in [-2.0, -1.3, 0.0, 0.7, 1.3, 3.0] {
            let got = kubo_closed(&h, &probe, &rho, w, 0.05).unwrap().total;
            let want = hand_two_level(0.8, 1.3, w, 0.05);
            assert!((got - want).norm() < 1e-13, "{w}: {got} vs {want}");
        }
        // residues scale with the polarization 2p − 1
        let peak = |p| kubo_closed(&h, &probe, &two_level(p, 1.3).1, 1.3, 0.05).unwrap().total;
        assert!((peak(0.9) / peak(0.7) - c64(2.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn kubo_zero_for_commuting_probe() {
        let s = spin_matrices(0.5).unwrap();
        let (h, rho, _) = two_level(0.8, 1.3);
        let probe = Probe::new(s.sz.clone(), s.sz.clone()).unwrap();
        assert_eq!(kubo_closed(&h, &probe, &rho, 0.4, 0.1).unwrap().total, c64(0.0, 0.0));
        let l = hamiltonian_superop(&h).unwrap();
        assert!(chi_nonstationary(&l, &probe, &rho, 0.4, 0.1).unwrap().total.norm() < 1e-15);
    }

    #[test]
    fn kubo_reality_symmetry() {
        // Hermitian A and B give χ(−ω + iε) = χ(ω + iε)*
        let (h, rho, probe) = two_level(0.7, 2.0);
        for w in [0.3, 1.9, 2.5] {
            let plus = kubo_closed(&h, &probe, &rho, w, 0.2).unwrap().total;
            let minus = kubo_closed(&h, &probe, &rho, -w, 0.2).unwrap().total;
            assert!((minus - plus.conj()).norm() < 1e-13);
        }
        assert!(kubo_closed(&h, &probe, &rho, 1.0, -0.2).is_err());
    }

    #[test]
    fn three_routes_agree_on_closed_system() {
        let (h, rho, probe) = two_level(0.85, 1.1);
        let l = hamiltonian_superop(&h).unwrap();
        for k in 0..20 {
            let w = -3.0 + 0.3 * k as f64;
            let a = kubo_closed(&h, &probe, &rho, w, 0.07).unwrap().total;
            let b = chi_stationary(&l, &probe, &rho, w, 0.07).unwrap().total;
            let c = chi_nonstationary(&l, &probe, &rho, w, 0.07).unwrap().total;
            let scale = a.norm().max(1e-300);
            assert!((a - b).norm() / scale < 1e-10);
            assert!((a - c).norm() / scale < 1e-10);
        }
    }

    #[test]
    fn stationarity_is_checked() {
        let s = spin_matrices(0.5).unwrap();
        let (h, _, probe) = two_level(0.8, 1.0);
        let l = hamiltonian_superop(&h).unwrap();
        let r = libm::sqrt(0.5);
        let x_state = DensityOperator::pure(&[c64(r, 0.0), c64(r, 0.0)]).unwrap();
        assert!(matches!(
            chi_stationary(&l, &probe, &x_state, 1.0, 0.1),
            Err(Error::NotStationary { .. })
        ));
        assert!(matches!(
            kubo_closed(&h, &probe, &x_state, 1.0, 0.1),
            Err(Error::NonCommuting { .. })
        ));
        let _ = s;
    }

    #[test]
    fn damped_two_level_stationary_matches_nonstationary() {
        // amplitude damping drives the spin to |↓⟩, which is stationary
        let s = spin_matrices(0.5).unwrap();
        let h = s.sz.scale_real(1.4);
        let l = &hamiltonian_superop(&h).unwrap() + &dissipator_with_rate(&s.s_minus, 0.3);
        let rho = DensityOperator::new(CMatrix::diag_real(&[0.0, 1.0])).unwrap();
        let probe = Probe::new(s.sx.clone(), s.sx.clone()).unwrap();
        for w in [0.5, 1.4, 2.0] {
            let a = chi_stationary(&l, &probe, &rho, w, 0.05).unwrap().total;
            let b = chi_nonstationary(&l, &probe, &rho, w, 0.05).unwrap().total;
            assert!((a - b).norm() < 1e-9 * a.norm().max(1.0));
        }
    }

    #[test]
    fn phi_at_zero_and_closed_commutator() {
        let (h, rho, probe) = two_level(0.75, 1.7);
        let l = hamiltonian_superop(&h).unwrap();
        let tau = [0.0, 0.3, 1.1, 2.9];
        let phi = phi_time_domain(&l, &probe, &rho, &tau).unwrap();
        let kicked = probe.perturbation().apply(rho.matrix());
        assert!((phi[0] - probe.observable().trace_product(&kicked)).norm() < 1e-15);
        // i⟨[B, A(τ)]⟩ with A(τ) = e^{ihτ} A e^{−ihτ}
        let e = eigh(&h).unwrap();
        for (k, &t) in tau.iter().enumerate() {
            let u = e.apply_fn(|x| c64(libm::cos(x * t), libm::sin(x * t)));
            let a_t = u.matmul(probe.observable()).matmul(&u.adjoint());
            let comm = probe.generator().commutator(&a_t);
            let want = I * comm.trace_product(rho.matrix());
            assert!((phi[k] - want).norm() < 1e-10);
        }
        assert!(phi_time_domain(&l, &probe, &rho, &[1.0, 0.5]).is_err());
    }

    #[test]
    fn resolvent_residual_is_small() {
        let m = Model::new(ModelParams::srts()).unwrap();
        let probe = Probe::epr(&m.space).unwrap();
        let r = Resolvent::new(&m.l_on, 26.0, 0.013).unwrap();
        let v = probe.perturbation().apply_vec(&m.initial_state().to_vector());
        let v: Vec<Complex64> = v
            .iter()
            .enumerate()
            .map(|(i, z)| z + c64(1e-3 * i as f64, 0.0))
            .collect();
        let x = r.solve(&v);
        assert!(r.residual(&x, &v) < 1e-10);
    }

    #[test]
    fn epr_probe_components_sum() {
        let m = Model::new(ModelParams::drts()).unwrap();
        let probe = Probe::epr(&m.space).unwrap();
        assert_eq!(probe.labels(), alloc::vec!["triplet", "radical1", "radical2"]);
        assert_eq!(probe.observable(), probe.generator());
    }

    #[test]
    fn sweep_components_add_up_and_surface_rows_match() {
        let params = ModelParams::srts();
        let config = SpectrumConfig {
            field_grid: uniform_grid(90.0, 110.0, 5),
            observe_time: 3.0,
            ..SpectrumConfig::default()
        };
        let protocol = Protocol::default();
        let spec = epr_sweep(&params, &config, &protocol).unwrap();
        assert_eq!(spec.component_defect(), 0.0);
        let surface = trepr_surface(&params, &config, &protocol, &[1.0, 3.0, 20.0]).unwrap();
        assert_eq!(surface.row(1), &spec.chi[..]);
    }

    #[test]
    fn grids_and_normalization() {
        assert_eq!(uniform_grid(0.0, 400.0, 201)[100], 200.0);
        assert_eq!(normalize(&[1.0, -4.0, 2.0]), alloc::vec![0.25, -1.0, 0.5]);
        assert_eq!(normalize(&[0.0, 0.0]), alloc::vec![0.0, 0.0]);
        let mut c = SpectrumConfig::default();
        assert!(c.validate().is_ok());
        c.epsilon = 0.0;
        assert!(c.validate().is_err());
    }
}

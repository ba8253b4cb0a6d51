//! Energy and rate units.
//!
//! Model parameters are energies in millikelvin. Dynamics run with ħ = 1 in
//! angular frequency units of rad/ns; [`UnitSystem`] is the only place the
//! two are related.

/// Boltzmann constant, J/K (exact, SI 2019).
pub const BOLTZMANN_J_PER_K: f64 = 1.380_649e-23;
/// Reduced Planck constant, J·s (exact, SI 2019).
pub const HBAR_J_S: f64 = 1.054_571_817e-34;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UnitSystem {
    /// `k_B · (1 mK) / ħ` expressed in rad/ns.
    pub mk_to_rad_per_ns: f64,
}

impl UnitSystem {
    pub const fn codata() -> Self {
        UnitSystem {
            mk_to_rad_per_ns: BOLTZMANN_J_PER_K * 1e-3 / HBAR_J_S * 1e-9,
        }
    }

    /// A custom conversion factor, e.g. to study sensitivity to the
    /// mK → frequency mapping.
    pub const fn with_factor(mk_to_rad_per_ns: f64) -> Self {
        UnitSystem { mk_to_rad_per_ns }
    }

    #[inline]
    pub fn mk_to_rad_per_ns(&self, mk: f64) -> f64 {
        mk * self.mk_to_rad_per_ns
    }

    #[inline]
    pub fn rad_per_ns_to_mk(&self, w: f64) -> f64 {
        w / self.mk_to_rad_per_ns
    }
}

impl Default for UnitSystem {
    fn default() -> Self {
        Self::codata()
    }
}

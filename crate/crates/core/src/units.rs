//! Natural units used throughout the crate: hbar = 1 and 2m = 1.
//!
//! In these units the free wavenumber is `k = sqrt(E)` and the group velocity
//! is `v = dE/dk = 2k`. Conversion to laboratory units only happens for
//! display, see [`PhysicalUnits`].

use serde::{Deserialize, Serialize};

/// Reduced Planck constant.
pub const HBAR: f64 = 1.0;

/// Planck constant `h = 2 pi hbar`, the per-resonance quantum of the delay integral.
pub const PLANCK: f64 = 2.0 * std::f64::consts::PI * HBAR;

/// Free wavenumber at energy `e`.
#[inline]
pub fn wavenumber(e: f64) -> f64 {
    e.sqrt()
}

/// Group velocity `dE/dk` at energy `e`.
#[inline]
pub fn velocity(e: f64) -> f64 {
    2.0 * e.sqrt()
}

/// Time for a free particle to cover `2a` at energy `e`.
#[inline]
pub fn free_flight_time(a: f64, e: f64) -> f64 {
    2.0 * a / velocity(e)
}

const HBAR_SI: f64 = 1.054_571_817e-34;
const EV_SI: f64 = 1.602_176_634e-19;
const AMU_SI: f64 = 1.660_539_066_60e-27;

/// Display-only conversion block.
///
/// With a particle mass `m` (atomic mass units) and a length unit `l`
/// (nanometres), one natural energy unit is `hbar^2 / (2 m l^2)` and one
/// natural time unit is `hbar` divided by that energy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalUnits {
    pub mass_amu: f64,
    pub length_nm: f64,
}

impl PhysicalUnits {
    /// Neutron mass and a 1 nm length scale, the reflectometry setting.
    pub fn neutron_nm() -> Self {
        Self {
            mass_amu: 1.008_664_915_88,
            length_nm: 1.0,
        }
    }

    /// Energy unit in neV.
    pub fn energy_unit_nev(&self) -> f64 {
        let m = self.mass_amu * AMU_SI;
        let l = self.length_nm * 1e-9;
        HBAR_SI * HBAR_SI / (2.0 * m * l * l) / EV_SI * 1e9
    }

    /// Time unit in nanoseconds.
    pub fn time_unit_ns(&self) -> f64 {
        let e_joule = self.energy_unit_nev() * 1e-9 * EV_SI;
        HBAR_SI / e_joule * 1e9
    }
}

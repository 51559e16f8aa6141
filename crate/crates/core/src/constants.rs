//! Physical constants (CODATA 2018) and the internal unit system.
//!
//! Internally hbar = 1 and every energy is an angular frequency in rad/ps,
//! so time is carried in ps and 1 rad/ps = 1e12 rad/s. All public inputs
//! stay in conventional units (cm^-1, THz, K, V/m, Debye) and are converted
//! exactly once at construction time.

use std::f64::consts::PI;

/// Speed of light (m/s), exact.
pub const SPEED_OF_LIGHT_M_PER_S: f64 = 299_792_458.0;

/// Reduced Planck constant (J s).
pub const HBAR_J_S: f64 = 1.054_571_817e-34;

/// Boltzmann constant (J/K), exact.
pub const BOLTZMANN_J_PER_K: f64 = 1.380_649e-23;

/// One Debye in C m (1 D = 1e-21/c C m).
pub const DEBYE_C_M: f64 = 1e-21 / SPEED_OF_LIGHT_M_PER_S;

/// Atomic unit of electric field strength (V/m).
pub const ATOMIC_FIELD_V_PER_M: f64 = 5.142_206_747_63e11;

/// Conversion factors between external units and internal rad/ps quantities.
#[derive(Debug, Clone, Copy)]
pub struct UnitSystem {
    /// rad/ps per cm^-1 of wavenumber.
    pub radps_per_cm1: f64,
    /// rad/ps per THz of ordinary frequency.
    pub radps_per_thz: f64,
    /// rad/ps per kelvin (k_B T / hbar).
    pub radps_per_kelvin: f64,
    /// rad/ps per (Debye * V/m) of dipole-field coupling (mu E / hbar).
    pub radps_per_debye_v_per_m: f64,
}

impl UnitSystem {
    pub const fn new() -> Self {
        UnitSystem {
            radps_per_cm1: 2.0 * PI * SPEED_OF_LIGHT_M_PER_S * 1e2 * 1e-12,
            radps_per_thz: 2.0 * PI,
            radps_per_kelvin: BOLTZMANN_J_PER_K / HBAR_J_S * 1e-12,
            radps_per_debye_v_per_m: DEBYE_C_M / HBAR_J_S * 1e-12,
        }
    }

    pub fn wavenumber_to_angular(&self, cm1: f64) -> f64 {
        cm1 * self.radps_per_cm1
    }

    pub fn angular_to_wavenumber(&self, radps: f64) -> f64 {
        radps / self.radps_per_cm1
    }

    /// Ordinary frequency in THz to angular frequency in rad/ps.
    pub fn thz_to_angular(&self, thz: f64) -> f64 {
        thz * self.radps_per_thz
    }

    pub fn angular_to_thz(&self, radps: f64) -> f64 {
        radps / self.radps_per_thz
    }

    /// Thermal energy k_B T as an angular frequency.
    pub fn kelvin_to_angular(&self, kelvin: f64) -> f64 {
        kelvin * self.radps_per_kelvin
    }

    /// Dipole-field interaction energy mu E / hbar as an angular frequency.
    pub fn dipole_field_to_angular(&self, mu_debye: f64, field_v_per_m: f64) -> f64 {
        mu_debye * field_v_per_m * self.radps_per_debye_v_per_m
    }
}

impl Default for UnitSystem {
    fn default() -> Self {
        Self::new()
    }
}

/// The crate-wide unit system instance.
pub const UNITS: UnitSystem = UnitSystem::new();

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips() {
        let u = UnitSystem::new();
        for &x in &[1.457, 0.1, 123.456, 1e-3] {
            let back = u.angular_to_wavenumber(u.wavenumber_to_angular(x));
            assert!((back - x).abs() <= 1e-12 * x.abs());
            let back = u.angular_to_thz(u.thz_to_angular(x));
            assert!((back - x).abs() <= 1e-12 * x.abs());
        }
    }

    #[test]
    fn known_magnitudes() {
        let u = UnitSystem::new();
        // 1 cm^-1 is 0.0299792458 THz of ordinary frequency.
        let radps = u.wavenumber_to_angular(1.0);
        assert!((u.angular_to_thz(radps) - 0.029_979_245_8).abs() < 1e-12);
        // 2.89 D at 7e6 V/m is about 0.64 rad/ps.
        let g = u.dipole_field_to_angular(2.89, 7e6);
        assert!((g - 0.639_88).abs() < 5e-4, "got {g}");
        // k_B * 2 K is about 0.262 rad/ps.
        assert!((u.kelvin_to_angular(2.0) - 0.261_84).abs() < 5e-4);
    }
}

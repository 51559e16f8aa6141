//! The single-cycle THz pulse: waveform, time-integrated area, and spectrum.

use num_complex::Complex64;
use serde::Serialize;

use crate::constants::UNITS;
use crate::error::{Error, Result};
use crate::quad;

/// Default absolute phase; it removes the DC component of the spectrum,
/// making the pulse area vanish.
pub const DEFAULT_PHI_C: f64 = std::f64::consts::FRAC_PI_2;

/// A linearly polarized single-cycle pulse
/// E(t) = E0 sin^2(pi t / T) cos(omega_c t + phi_c), supported on [0, T]
/// with T = 2 pi / omega_c (one carrier cycle).
#[derive(Debug, Clone, Serialize)]
pub struct PulseParams {
    e0: f64,
    omega_c: f64,
    phi_c: f64,
}

impl PulseParams {
    /// Build from a peak field in V/m and an ordinary carrier frequency in THz.
    pub fn from_thz(e0_v_per_m: f64, freq_thz: f64, phi_c: f64) -> Result<Self> {
        Self::from_angular(e0_v_per_m, UNITS.thz_to_angular(freq_thz), phi_c)
    }

    /// Build from a peak field in V/m and a carrier angular frequency in rad/ps.
    pub fn from_angular(e0_v_per_m: f64, omega_c_radps: f64, phi_c: f64) -> Result<Self> {
        if !(e0_v_per_m >= 0.0) {
            return Err(Error::invalid(format!(
                "peak field must be non-negative, got {e0_v_per_m} V/m"
            )));
        }
        if !(omega_c_radps > 0.0) {
            return Err(Error::invalid(format!(
                "carrier frequency must be positive, got {omega_c_radps} rad/ps"
            )));
        }
        Ok(PulseParams {
            e0: e0_v_per_m,
            omega_c: omega_c_radps,
            phi_c,
        })
    }

    /// Carrier resonant with the lowest rotational transition omega_0 = 2B.
    pub fn resonant(mol: &crate::rotor::MoleculeSpec, e0_v_per_m: f64, phi_c: f64) -> Result<Self> {
        Self::from_angular(e0_v_per_m, mol.omega0(), phi_c)
    }

    /// Peak field strength in V/m.
    pub fn e0(&self) -> f64 {
        self.e0
    }

    /// Carrier angular frequency in rad/ps.
    pub fn omega_c(&self) -> f64 {
        self.omega_c
    }

    pub fn phi_c(&self) -> f64 {
        self.phi_c
    }

    /// Pulse duration T = 2 pi / omega_c in ps.
    pub fn duration(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.omega_c
    }

    /// Same pulse with a different peak field.
    pub fn with_e0(&self, e0_v_per_m: f64) -> Result<Self> {
        Self::from_angular(e0_v_per_m, self.omega_c, self.phi_c)
    }
}

/// Field value in V/m at time t (ps); identically zero outside [0, T].
pub fn field_at(t: f64, p: &PulseParams) -> f64 {
    let big_t = p.duration();
    if t < 0.0 || t > big_t {
        return 0.0;
    }
    let env = (std::f64::consts::PI * t / big_t).sin();
    p.e0 * env * env * (p.omega_c * t + p.phi_c).cos()
}

/// Time-integrated pulse area over [0, T] in (V/m) ps.
pub fn pulse_area(p: &PulseParams) -> f64 {
    // The integrand carries the carrier plus two envelope sidebands; 4 omega_c
    // bounds every frequency present.
    quad::integrate(|t| field_at(t, p), 0.0, p.duration(), 4.0 * p.omega_c)
}

/// Spectral amplitude A(omega) = int_0^T E(t) e^{i omega t} dt for omega in rad/ps.
pub fn spectrum(p: &PulseParams, omega: f64) -> Complex64 {
    quad::integrate_complex(
        |t| Complex64::from_polar(1.0, omega * t) * field_at(t, p),
        0.0,
        p.duration(),
        omega.abs() + 4.0 * p.omega_c,
    )
}

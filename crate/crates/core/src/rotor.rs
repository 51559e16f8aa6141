//! Rigid-rotor energetics, dipole matrix elements, and thermal weights.

use serde::Serialize;

use crate::constants::UNITS;
use crate::error::{Error, Result};

/// Default cumulative tail cut for the Boltzmann table.
pub const DEFAULT_BOLTZMANN_CUTOFF: f64 = 1e-6;

/// A linear polar molecule treated as a rigid rotor.
///
/// The rotational constant enters in cm^-1 and the permanent dipole moment
/// in Debye; both are converted to internal angular-frequency units on
/// construction and never touched again.
#[derive(Debug, Clone, Serialize)]
pub struct MoleculeSpec {
    pub name: String,
    pub b_cm1: f64,
    pub mu_debye: f64,
    #[serde(skip)]
    b_radps: f64,
    #[serde(skip)]
    mu_radps_per_field: f64,
}

impl MoleculeSpec {
    pub fn new(name: impl Into<String>, b_cm1: f64, mu_debye: f64) -> Result<Self> {
        if !(b_cm1 > 0.0) {
            return Err(Error::invalid(format!(
                "rotational constant must be positive, got {b_cm1} cm^-1"
            )));
        }
        if !(mu_debye >= 0.0) {
            return Err(Error::invalid(format!(
                "dipole moment must be non-negative, got {mu_debye} D"
            )));
        }
        Ok(MoleculeSpec {
            name: name.into(),
            b_cm1,
            mu_debye,
            b_radps: UNITS.wavenumber_to_angular(b_cm1),
            mu_radps_per_field: UNITS.dipole_field_to_angular(mu_debye, 1.0),
        })
    }

    /// B = 1.457 cm^-1, mu = 2.89 D.
    pub fn hcn() -> Self {
        Self::new("HCN", 1.457, 2.89).expect("HCN preset is valid")
    }

    /// Look up a molecule preset by name (case-insensitive).
    pub fn preset(name: &str) -> Option<Self> {
        match name.to_ascii_uppercase().as_str() {
            "HCN" => Some(Self::hcn()),
            _ => None,
        }
    }

    /// Rotational constant B in rad/ps.
    pub fn b(&self) -> f64 {
        self.b_radps
    }

    /// Interaction energy mu*E/hbar in rad/ps for a field in V/m.
    pub fn dipole_coupling(&self, field_v_per_m: f64) -> f64 {
        self.mu_radps_per_field * field_v_per_m
    }

    /// Lowest transition frequency omega_0 = 2B in rad/ps.
    pub fn omega0(&self) -> f64 {
        2.0 * self.b_radps
    }
}

/// Rotational state label |J M> with |M| <= J enforced at construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct RotLabel {
    j: u32,
    m: i32,
}

impl RotLabel {
    pub fn new(j: u32, m: i32) -> Result<Self> {
        if m.unsigned_abs() > j {
            return Err(Error::invalid(format!("|M| = {} exceeds J = {j}", m.abs())));
        }
        Ok(RotLabel { j, m })
    }

    pub fn j(&self) -> u32 {
        self.j
    }

    pub fn m(&self) -> i32 {
        self.m
    }
}

impl std::fmt::Display for RotLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "|{},{}>", self.j, self.m)
    }
}

/// Rotational eigenenergy E_J = B J(J+1) in rad/ps.
pub fn rot_energy(j: u32, mol: &MoleculeSpec) -> f64 {
    mol.b() * (j as f64) * (j as f64 + 1.0)
}

/// Transition frequency omega_J = E_{J+1} - E_J = 2B(J+1) in rad/ps.
pub fn transition_freq(j: u32, mol: &MoleculeSpec) -> f64 {
    2.0 * mol.b() * (j as f64 + 1.0)
}

/// Matrix element <J+1 M|cos theta|J M> = sqrt((J+1)^2 - M^2) / sqrt((2J+1)(2J+3)).
pub fn cos_theta_element(j: u32, m: i32) -> Result<f64> {
    if m.unsigned_abs() > j {
        return Err(Error::invalid(format!("|M| = {} exceeds J = {j}", m.abs())));
    }
    let jf = j as f64;
    let mf = m as f64;
    let num = (jf + 1.0) * (jf + 1.0) - mf * mf;
    Ok((num / ((2.0 * jf + 1.0) * (2.0 * jf + 3.0))).sqrt())
}

/// Boltzmann weight table over (J0, M) sublevels.
///
/// Each sublevel carries exp(-E_J / k_B T) / Z with Z = sum_J (2J+1) exp(-E_J / k_B T),
/// so summing over the (2J+1) sublevels of every level gives 1. The table is cut at
/// the smallest J* whose cumulative weight reaches 1 - cutoff and renormalized to
/// sum to exactly 1.
pub fn boltzmann_weights(
    temperature_k: f64,
    mol: &MoleculeSpec,
    cutoff: f64,
) -> Result<Vec<(RotLabel, f64)>> {
    if !(temperature_k > 0.0) {
        return Err(Error::invalid(format!(
            "temperature must be positive, got {temperature_k} K"
        )));
    }
    if !(cutoff > 0.0 && cutoff < 1.0) {
        return Err(Error::invalid(format!("cutoff must be in (0,1), got {cutoff}")));
    }
    let kt = UNITS.kelvin_to_angular(temperature_k);

    // Partition function; terms decay like exp(-B J^2 / kT), so stop once
    // the running tail is far below the cutoff.
    let mut z = 0.0;
    let mut terms = Vec::new();
    for j in 0..10_000u32 {
        let w = (-rot_energy(j, mol) / kt).exp();
        let level = (2.0 * j as f64 + 1.0) * w;
        terms.push(w);
        z += level;
        if level < 1e-3 * cutoff * z && j > 0 {
            break;
        }
    }

    let mut table = Vec::new();
    let mut cumulative = 0.0;
    for (j, &w) in terms.iter().enumerate() {
        let j = j as u32;
        let per_sublevel = w / z;
        for m in -(j as i32)..=(j as i32) {
            table.push((RotLabel { j, m }, per_sublevel));
        }
        cumulative += (2.0 * j as f64 + 1.0) * per_sublevel;
        if 1.0 - cumulative <= cutoff {
            break;
        }
    }

    let total: f64 = table.iter().map(|(_, w)| w).sum();
    for (_, w) in &mut table {
        *w /= total;
    }
    Ok(table)
}

/// Ratio sum_J (2J+1) e_J / sum_J e_J over the levels of a weight table.
///
/// This is the factor between the two thermal-averaging conventions used by
/// [`crate::observables::ThermalWeighting`].
pub fn level_weight_ratio(table: &[(RotLabel, f64)]) -> f64 {
    let level_sum: f64 = table.iter().filter(|(l, _)| l.m() == 0).map(|(_, w)| w).sum();
    let sublevel_sum: f64 = table.iter().map(|(_, w)| w).sum();
    sublevel_sum / level_sum
}

/// Revival period tau = pi / B in ps.
pub fn revival_time(mol: &MoleculeSpec) -> f64 {
    std::f64::consts::PI / mol.b()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::UNITS;

    #[test]
    fn ground_state_energy_is_zero() {
        let mol = MoleculeSpec::hcn();
        assert_eq!(rot_energy(0, &mol), 0.0);
    }

    #[test]
    fn energy_j1_is_2b() {
        let mol = MoleculeSpec::hcn();
        let e1 = rot_energy(1, &mol);
        assert!((UNITS.angular_to_wavenumber(e1) - 2.914).abs() < 1e-12);
    }

    #[test]
    fn omega0_in_thz() {
        // omega_0 = 2B is about 0.0874 THz; the rounded 0.09 THz value is
        // reported in docs only and never hard-coded.
        let mol = MoleculeSpec::hcn();
        let f = UNITS.angular_to_thz(mol.omega0());
        assert!((f - 0.0874).abs() < 5e-4, "got {f}");
    }

    #[test]
    fn energies_monotone_and_spaced_by_2b() {
        let mol = MoleculeSpec::hcn();
        for j in 0..20 {
            let gap = rot_energy(j + 1, &mol) - rot_energy(j, &mol);
            assert!(gap > 0.0);
            assert!((gap - 2.0 * mol.b() * (j as f64 + 1.0)).abs() < 1e-14);
        }
    }

    #[test]
    fn cos_theta_low_j_values() {
        assert!((cos_theta_element(0, 0).unwrap() - 1.0 / 3.0_f64.sqrt()).abs() < 1e-15);
        assert!((cos_theta_element(1, 0).unwrap() - 2.0 / 15.0_f64.sqrt()).abs() < 1e-15);
        assert!((cos_theta_element(1, 1).unwrap() - 1.0 / 5.0_f64.sqrt()).abs() < 1e-15);
        assert!((cos_theta_element(1, -1).unwrap() - 1.0 / 5.0_f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn cos_theta_rejects_bad_m() {
        assert!(cos_theta_element(0, 1).is_err());
        assert!(cos_theta_element(2, -3).is_err());
        assert!(RotLabel::new(1, 2).is_err());
    }

    #[test]
    fn cos_theta_in_unit_interval() {
        for j in 0..20u32 {
            for m in -(j as i32)..=(j as i32) {
                let v = cos_theta_element(j, m).unwrap();
                assert!(v > 0.0 && v < 1.0);
            }
        }
    }

    #[test]
    fn boltzmann_cold_limit() {
        let mol = MoleculeSpec::hcn();
        let table = boltzmann_weights(1e-3, &mol, 1e-6).unwrap();
        assert_eq!(table.len(), 1);
        assert_eq!(table[0].0, RotLabel::new(0, 0).unwrap());
        assert!((table[0].1 - 1.0).abs() < 1e-15);
    }

    #[test]
    fn boltzmann_2k_dominated_by_j0_and_j1() {
        let mol = MoleculeSpec::hcn();
        let table = boltzmann_weights(2.0, &mol, 1e-6).unwrap();
        let w: f64 = table
            .iter()
            .filter(|(l, _)| l.j() <= 1)
            .map(|(_, w)| w)
            .sum();
        assert!(w > 0.98, "J<=1 weight {w}");
        let w0 = table.iter().find(|(l, _)| l.j() == 0).unwrap().1;
        assert!((w0 - 0.7257).abs() < 1e-3, "got {w0}");
    }

    #[test]
    fn boltzmann_normalized_and_monotone() {
        let mol = MoleculeSpec::hcn();
        for t in [0.5, 2.0, 10.0, 77.0] {
            let table = boltzmann_weights(t, &mol, 1e-6).unwrap();
            let sum: f64 = table.iter().map(|(_, w)| w).sum();
            assert!((sum - 1.0).abs() < 1e-14);
            for win in table.windows(2) {
                assert!(win[1].1 <= win[0].1 + 1e-15);
                assert!(win[0].1 >= 0.0);
            }
        }
    }

    #[test]
    fn boltzmann_rejects_bad_input() {
        let mol = MoleculeSpec::hcn();
        assert!(boltzmann_weights(0.0, &mol, 1e-6).is_err());
        assert!(boltzmann_weights(-1.0, &mol, 1e-6).is_err());
        assert!(boltzmann_weights(2.0, &mol, 0.0).is_err());
    }

    #[test]
    fn revival_time_hcn() {
        let mol = MoleculeSpec::hcn();
        let tau = revival_time(&mol);
        assert!((tau - 11.45).abs() < 0.01, "got {tau}");
        // Doubling B halves tau.
        let mol2 = MoleculeSpec::new("X", 2.0 * 1.457, 2.89).unwrap();
        assert!((revival_time(&mol2) - tau / 2.0).abs() < 1e-12);
        // tau * omega_0 = 2 pi.
        assert!((tau * mol.omega0() - 2.0 * std::f64::consts::PI).abs() < 1e-12);
    }

    #[test]
    fn molecule_validation() {
        assert!(MoleculeSpec::new("bad", -1.0, 2.0).is_err());
        assert!(MoleculeSpec::new("bad", 1.0, -2.0).is_err());
        assert!(MoleculeSpec::preset("hcn").is_some());
        assert!(MoleculeSpec::preset("OCS").is_none());
    }
}

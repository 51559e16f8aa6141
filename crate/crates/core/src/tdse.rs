//! Exact propagation of interaction-picture coefficients in a truncated
//! rotational basis at fixed M.
//!
//! The coefficient ODE couples neighbouring J only:
//!   dc_J/dt = i g(t) [ m_{J-1} e^{+i w_{J-1} t} c_{J-1} + m_J e^{-i w_J t} c_{J+1} ]
//! with g(t) = mu E(t) / hbar, m_J = <J+1 M|cos theta|J M>, w_J = 2B(J+1).

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ode::{self, OdeOptions, OdeStats, SampleMode};
use crate::pulse::{field_at, PulseParams};
use crate::rotor::{cos_theta_element, rot_energy, transition_freq, MoleculeSpec, RotLabel};

/// Population threshold in the top two basis states above which the
/// truncation is considered leaky.
pub const TRUNCATION_LEAK_LIMIT: f64 = 1e-8;

/// Default truncation level for scan workloads at E0 <= 8e6 V/m.
pub const DEFAULT_J_MAX: u32 = 10;

/// Default relative tolerance of the coefficient integrator.
pub const DEFAULT_TOL: f64 = 1e-10;

/// Truncated basis {|J M| <= J <= J_max>} at fixed M.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct BasisSpec {
    m: i32,
    j_max: u32,
}

impl BasisSpec {
    pub fn new(m: i32, j_max: u32) -> Result<Self> {
        if j_max < m.unsigned_abs() + 2 {
            return Err(Error::invalid(format!(
                "J_max = {j_max} must be at least |M| + 2 = {}",
                m.unsigned_abs() + 2
            )));
        }
        Ok(BasisSpec { m, j_max })
    }

    pub fn m(&self) -> i32 {
        self.m
    }

    pub fn j_min(&self) -> u32 {
        self.m.unsigned_abs()
    }

    pub fn j_max(&self) -> u32 {
        self.j_max
    }

    pub fn dim(&self) -> usize {
        (self.j_max - self.j_min() + 1) as usize
    }

    /// Index of J within the coefficient vector.
    pub fn index_of(&self, j: u32) -> Option<usize> {
        (self.j_min()..=self.j_max)
            .position(|jj| jj == j)
    }

    pub fn j_values(&self) -> impl Iterator<Item = u32> {
        self.j_min()..=self.j_max
    }
}

/// Interaction-picture coefficients c_J at a reference time.
///
/// Schrodinger-picture amplitudes are c_J e^{-i E_J t}; free evolution only
/// moves `t_ref`, the coefficients themselves stay fixed once the pulse is over.
#[derive(Debug, Clone)]
pub struct WavepacketCoeffs {
    pub basis: BasisSpec,
    pub t_ref: f64,
    pub coeffs: Vec<Complex64>,
}

impl WavepacketCoeffs {
    pub fn new(basis: BasisSpec, t_ref: f64, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != basis.dim() {
            return Err(Error::invalid(format!(
                "coefficient vector length {} does not match basis dimension {}",
                coeffs.len(),
                basis.dim()
            )));
        }
        Ok(WavepacketCoeffs { basis, t_ref, coeffs })
    }

    /// Basis state |J M> as a wave packet (c_J = 1).
    pub fn basis_state(basis: BasisSpec, initial: RotLabel) -> Result<Self> {
        if initial.m() != basis.m() {
            return Err(Error::invalid(format!(
                "initial state {initial} does not match basis M = {}",
                basis.m()
            )));
        }
        let idx = basis.index_of(initial.j()).ok_or_else(|| {
            Error::invalid(format!("initial state {initial} outside basis range"))
        })?;
        let mut coeffs = vec![Complex64::ZERO; basis.dim()];
        coeffs[idx] = Complex64::ONE;
        Ok(WavepacketCoeffs { basis, t_ref: 0.0, coeffs })
    }

    pub fn norm_sq(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Population |c_J|^2, zero for J outside the basis.
    pub fn population(&self, j: u32) -> f64 {
        self.basis
            .index_of(j)
            .map(|i| self.coeffs[i].norm_sqr())
            .unwrap_or(0.0)
    }

    /// Schrodinger-picture amplitudes a_J = c_J e^{-i E_J t} at time t.
    pub fn schrodinger_amplitudes(&self, t: f64, mol: &MoleculeSpec) -> Vec<Complex64> {
        self.basis
            .j_values()
            .zip(&self.coeffs)
            .map(|(j, c)| c * Complex64::from_polar(1.0, -rot_energy(j, mol) * t))
            .collect()
    }
}

/// Free evolution: interaction-picture coefficients are untouched, only the
/// reference time advances. Observables reconstruct the phases at their own
/// evaluation time.
pub fn free_evolve(w: &WavepacketCoeffs, dt: f64) -> WavepacketCoeffs {
    WavepacketCoeffs {
        basis: w.basis,
        t_ref: w.t_ref + dt,
        coeffs: w.coeffs.clone(),
    }
}

/// A propagated coefficient history with its provenance.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub basis: BasisSpec,
    pub pulse: PulseParams,
    pub molecule: MoleculeSpec,
    pub times: Vec<f64>,
    pub snapshots: Vec<Vec<Complex64>>,
    pub stats: OdeStats,
}

impl Trajectory {
    pub fn state_at_index(&self, k: usize) -> WavepacketCoeffs {
        WavepacketCoeffs {
            basis: self.basis,
            t_ref: self.times[k],
            coeffs: self.snapshots[k].clone(),
        }
    }

    /// Coefficients at the end of the pulse.
    pub fn final_state(&self) -> WavepacketCoeffs {
        self.state_at_index(self.times.len() - 1)
    }

    pub fn end_time(&self) -> f64 {
        *self.times.last().expect("trajectory has at least one sample")
    }

    /// Snapshot taken exactly at time t, if one exists.
    pub fn snapshot_at(&self, t: f64) -> Option<WavepacketCoeffs> {
        let idx = self
            .times
            .binary_search_by(|probe| probe.partial_cmp(&t).unwrap())
            .ok()
            .or_else(|| {
                self.times
                    .iter()
                    .position(|&ts| (ts - t).abs() <= 1e-9 * self.end_time().max(1.0))
            })?;
        Some(self.state_at_index(idx))
    }
}

struct Coupling {
    /// m_J for J = J_min .. J_max - 1.
    elems: Vec<f64>,
    /// w_J for the same range.
    freqs: Vec<f64>,
}

fn couplings(basis: &BasisSpec, mol: &MoleculeSpec) -> Coupling {
    let mut elems = Vec::with_capacity(basis.dim() - 1);
    let mut freqs = Vec::with_capacity(basis.dim() - 1);
    for j in basis.j_min()..basis.j_max() {
        elems.push(cos_theta_element(j, basis.m()).expect("|M| <= J by construction"));
        freqs.push(transition_freq(j, mol));
    }
    Coupling { elems, freqs }
}

fn propagate_impl(
    initial: RotLabel,
    pulse: &PulseParams,
    mol: &MoleculeSpec,
    basis: BasisSpec,
    tol: f64,
    sample_times: Option<&[f64]>,
) -> Result<Trajectory> {
    let start = WavepacketCoeffs::basis_state(basis, initial)?;
    let coupling = couplings(&basis, mol);
    let n = basis.dim();
    let t_end = pulse.duration();

    let rhs = |t: f64, y: &[Complex64], dy: &mut [Complex64]| {
        let g = mol.dipole_coupling(field_at(t, pulse));
        if g == 0.0 {
            dy.iter_mut().for_each(|d| *d = Complex64::ZERO);
            return;
        }
        let ig = Complex64::new(0.0, g);
        dy[0] = ig * coupling.elems[0] * Complex64::from_polar(1.0, -coupling.freqs[0] * t) * y[1];
        for k in 1..n - 1 {
            let up = coupling.elems[k] * Complex64::from_polar(1.0, -coupling.freqs[k] * t) * y[k + 1];
            let down =
                coupling.elems[k - 1] * Complex64::from_polar(1.0, coupling.freqs[k - 1] * t) * y[k - 1];
            dy[k] = ig * (up + down);
        }
        dy[n - 1] = ig
            * coupling.elems[n - 2]
            * Complex64::from_polar(1.0, coupling.freqs[n - 2] * t)
            * y[n - 2];
    };

    let opts = OdeOptions::with_tol(tol);
    let mut times = Vec::new();
    let mut snapshots = Vec::new();
    let mode = match sample_times {
        Some(ts) => SampleMode::At(ts),
        None => SampleMode::AcceptedSteps,
    };
    let (final_y, stats) = ode::integrate(
        rhs,
        0.0,
        t_end,
        start.coeffs,
        &opts,
        mode,
        |t, y| {
            times.push(t);
            snapshots.push(y.to_vec());
        },
    )?;

    if times.last().map(|&t| t < t_end).unwrap_or(true) {
        times.push(t_end);
        snapshots.push(final_y.clone());
    }

    let leak: f64 = final_y[n - 1].norm_sqr() + final_y[n - 2].norm_sqr();
    if leak > TRUNCATION_LEAK_LIMIT {
        return Err(Error::TruncationLeak {
            j_max: basis.j_max(),
            leak,
        });
    }

    Ok(Trajectory {
        basis,
        pulse: pulse.clone(),
        molecule: mol.clone(),
        times,
        snapshots,
        stats,
    })
}

/// Propagate |initial> through the pulse window [0, T], recording every
/// accepted step.
pub fn propagate(
    initial: RotLabel,
    pulse: &PulseParams,
    mol: &MoleculeSpec,
    basis: BasisSpec,
    tol: f64,
) -> Result<Trajectory> {
    propagate_impl(initial, pulse, mol, basis, tol, None)
}

/// Propagate recording snapshots exactly at the given ascending times
/// (all within [0, T]); the final state at T is always included.
pub fn propagate_sampled(
    initial: RotLabel,
    pulse: &PulseParams,
    mol: &MoleculeSpec,
    basis: BasisSpec,
    tol: f64,
    sample_times: &[f64],
) -> Result<Trajectory> {
    propagate_impl(initial, pulse, mol, basis, tol, Some(sample_times))
}

/// Smallest J_max for which the truncation leak check passes and the final
/// populations are stable under J_max -> J_max + 2 at the 1e-8 level.
pub fn auto_truncate(
    initial: RotLabel,
    pulse: &PulseParams,
    mol: &MoleculeSpec,
) -> Result<BasisSpec> {
    auto_truncate_with_tol(initial, pulse, mol, DEFAULT_TOL)
}

pub fn auto_truncate_with_tol(
    initial: RotLabel,
    pulse: &PulseParams,
    mol: &MoleculeSpec,
    tol: f64,
) -> Result<BasisSpec> {
    let j_floor = (initial.m().unsigned_abs() + 2).max(initial.j() + 2);
    let mut j_max = j_floor;
    let mut prev: Option<Trajectory> = None;
    while j_max <= 64 {
        let basis = BasisSpec::new(initial.m(), j_max)?;
        match propagate(initial, pulse, mol, basis, tol) {
            Ok(traj) => {
                if let Some(p) = &prev {
                    // prev is at j_max - 2; compare shared populations.
                    let stable = p
                        .basis
                        .j_values()
                        .all(|j| {
                            (p.final_state().population(j) - traj.final_state().population(j))
                                .abs()
                                < 1e-8
                        });
                    if stable {
                        return Ok(p.basis);
                    }
                }
                prev = Some(traj);
            }
            Err(Error::TruncationLeak { .. }) => {
                prev = None;
            }
            Err(e) => return Err(e),
        }
        j_max += 2;
    }
    Err(Error::invalid(
        "auto truncation did not converge below J_max = 64",
    ))
}

//! Orientation traces, angular densities, populations, relative phases, and
//! revival-amplitude extraction.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::legendre::theta_norm;
use crate::pulse::PulseParams;
use crate::rotor::{
    boltzmann_weights, cos_theta_element, level_weight_ratio, revival_time, MoleculeSpec, RotLabel,
};
use crate::tdse::{propagate_sampled, Trajectory, WavepacketCoeffs};

/// How per-state traces are combined into the thermal average.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ThermalWeighting {
    /// The Boltzmann factor is normalized across rotational levels J and
    /// every magnetic sublevel of a level carries the full level weight.
    /// This is the convention behind the reference orientation traces.
    PerLevel,
    /// Weights normalized across all (J, M) sublevels; a proper ensemble
    /// average whose weights sum to one.
    PerSublevel,
}

/// Dense-grid size for the extremum search over one revival period.
pub const OQR_SCAN_POINTS: usize = 4096;

/// Golden-section refinement stops at this fraction of the revival period.
pub const OQR_TIME_RESOLUTION: f64 = 1e-4;

/// Orientation `<cos theta>` of a single wave packet at time t, from the
/// pairwise cosine sum over neighbouring-J coherences:
/// sum_J 2 |c_{J+1}| |c_J| M_{J+1,J} cos(w_J t - phi_J).
pub fn orientation_at(w: &WavepacketCoeffs, t: f64, mol: &MoleculeSpec) -> f64 {
    let amps = w.schrodinger_amplitudes(t, mol);
    let m = w.basis.m();
    let mut total = 0.0;
    for (k, j) in w.basis.j_values().enumerate().take(amps.len() - 1) {
        let lower = amps[k];
        let upper = amps[k + 1];
        if lower.norm_sqr() == 0.0 || upper.norm_sqr() == 0.0 {
            continue;
        }
        let elem = cos_theta_element(j, m).expect("basis guarantees |M| <= J");
        // |c_{J+1}||c_J| cos(w_J t - phi_J) = Re(a_J conj(a_{J+1})) with the
        // free phases already inside the Schrodinger amplitudes.
        total += 2.0 * elem * (lower * upper.conj()).re;
    }
    total
}

/// The same observable as a tridiagonal quadratic form <psi|cos theta|psi>.
/// Kept as a second, independently coded route for validation.
pub fn orientation_quadratic(w: &WavepacketCoeffs, t: f64, mol: &MoleculeSpec) -> f64 {
    let amps = w.schrodinger_amplitudes(t, mol);
    let m = w.basis.m();
    let n = amps.len();
    let mut total = Complex64::ZERO;
    for (k, j) in w.basis.j_values().enumerate() {
        // Row k of the cos(theta) matrix applied to the amplitude vector.
        let mut row = Complex64::ZERO;
        if k > 0 {
            row += cos_theta_element(j - 1, m).expect("valid") * amps[k - 1];
        }
        if k + 1 < n {
            row += cos_theta_element(j, m).expect("valid") * amps[k + 1];
        }
        total += amps[k].conj() * row;
    }
    total.re
}

/// One member of the thermal ensemble.
#[derive(Debug, Clone)]
pub struct EnsembleMember {
    pub initial: RotLabel,
    pub weight: f64,
    pub trajectory: Trajectory,
}

/// Boltzmann-weighted set of propagated trajectories sharing one pulse and
/// molecule. Member weights always sum to one; the level-normalized
/// convention is applied as a single scale factor at evaluation time.
#[derive(Debug, Clone)]
pub struct ThermalEnsemble {
    pub members: Vec<EnsembleMember>,
    pub temperature_k: Option<f64>,
    pub weighting: ThermalWeighting,
    level_factor: f64,
}

impl ThermalEnsemble {
    /// Propagate every thermally occupied (J0, M) sublevel through the pulse.
    ///
    /// `pulse_samples` lists times inside [0, T] at which during-pulse
    /// snapshots will later be requested (may be empty).
    #[allow(clippy::too_many_arguments)]
    pub fn build(
        mol: &MoleculeSpec,
        pulse: &PulseParams,
        temperature_k: f64,
        j_max: u32,
        tol: f64,
        weighting: ThermalWeighting,
        cutoff: f64,
        pulse_samples: &[f64],
    ) -> Result<Self> {
        let table = boltzmann_weights(temperature_k, mol, cutoff)?;
        let level_factor = level_weight_ratio(&table);
        let members: Result<Vec<EnsembleMember>> = table
            .par_iter()
            .map(|(label, weight)| {
                let basis = crate::tdse::BasisSpec::new(label.m(), j_max.max(label.j() + 2))?;
                let trajectory = propagate_sampled(*label, pulse, mol, basis, tol, pulse_samples)?;
                Ok(EnsembleMember {
                    initial: *label,
                    weight: *weight,
                    trajectory,
                })
            })
            .collect();
        Ok(ThermalEnsemble {
            members: members?,
            temperature_k: Some(temperature_k),
            weighting,
            level_factor,
        })
    }

    /// A single trajectory with unit weight (zero-temperature limit).
    pub fn single(trajectory: Trajectory) -> Self {
        // The first snapshot is the initial basis state; recover its J.
        let j0 = trajectory.snapshots[0]
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.norm_sqr().partial_cmp(&b.1.norm_sqr()).unwrap())
            .map(|(k, _)| trajectory.basis.j_min() + k as u32)
            .expect("non-empty snapshot");
        ThermalEnsemble {
            members: vec![EnsembleMember {
                initial: RotLabel::new(j0, trajectory.basis.m())
                    .expect("basis-consistent label"),
                weight: 1.0,
                trajectory,
            }],
            temperature_k: None,
            weighting: ThermalWeighting::PerSublevel,
            level_factor: 1.0,
        }
    }

    pub fn pulse(&self) -> &PulseParams {
        &self.members[0].trajectory.pulse
    }

    pub fn molecule(&self) -> &MoleculeSpec {
        &self.members[0].trajectory.molecule
    }

    /// Scale applied on top of the normalized member weights.
    pub fn trace_scale(&self) -> f64 {
        match self.weighting {
            ThermalWeighting::PerLevel => self.level_factor,
            ThermalWeighting::PerSublevel => 1.0,
        }
    }

    /// Weighted orientation at a post-pulse time (free evolution only).
    fn orientation_free(&self, t: f64, mol: &MoleculeSpec) -> f64 {
        self.trace_scale()
            * self
                .members
                .iter()
                .map(|m| m.weight * orientation_at(&m.trajectory.final_state(), t, mol))
                .sum::<f64>()
    }
}

/// A sampled orientation trace.
#[derive(Debug, Clone, Serialize)]
pub struct OrientationTrace {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

/// Thermally averaged `<cos theta>(t)` over arbitrary times.
///
/// Times inside the pulse window read the stored trajectory snapshots (the
/// ensemble must have been built with those sample times); later times use
/// free evolution of the final coefficients.
pub fn thermal_trace(ensemble: &ThermalEnsemble, times: &[f64]) -> Result<OrientationTrace> {
    let mol = ensemble.molecule().clone();
    let t_end = ensemble.pulse().duration();
    let scale = ensemble.trace_scale();
    let mut values = vec![0.0; times.len()];
    for member in &ensemble.members {
        for (v, &t) in values.iter_mut().zip(times) {
            let w = if t < t_end {
                member.trajectory.snapshot_at(t).ok_or_else(|| {
                    Error::invalid(format!(
                        "no snapshot at t = {t} ps; build the ensemble with this sample time"
                    ))
                })?
            } else {
                member.trajectory.final_state()
            };
            *v += scale * member.weight * orientation_at(&w, t, &mol);
        }
    }
    Ok(OrientationTrace {
        times: times.to_vec(),
        values,
    })
}

/// Angular probability density of one wave packet at angles theta (radians),
/// azimuth integrated out: |sum_J a_J(t) Theta_J^M(cos theta)|^2, normalized
/// so that int_0^pi density sin(theta) d(theta) = 1.
pub fn angular_density(
    w: &WavepacketCoeffs,
    t: f64,
    theta_grid: &[f64],
    mol: &MoleculeSpec,
) -> Vec<f64> {
    let amps = w.schrodinger_amplitudes(t, mol);
    let m = w.basis.m();
    theta_grid
        .iter()
        .map(|&theta| {
            let x = theta.cos();
            let mut psi = Complex64::ZERO;
            for (k, j) in w.basis.j_values().enumerate() {
                if amps[k].norm_sqr() > 0.0 {
                    psi += amps[k] * theta_norm(j, m, x);
                }
            }
            psi.norm_sqr()
        })
        .collect()
}

/// Weighted angular density of the ensemble.
///
/// Under [`ThermalWeighting::PerLevel`] the map carries the same
/// level-normalized scale as the orientation trace, so its sin(theta)
/// integral equals [`ThermalEnsemble::trace_scale`] rather than one.
pub fn thermal_angular_density(
    ensemble: &ThermalEnsemble,
    t: f64,
    theta_grid: &[f64],
) -> Result<Vec<f64>> {
    let mol = ensemble.molecule().clone();
    let t_end = ensemble.pulse().duration();
    let scale = ensemble.trace_scale();
    let mut out = vec![0.0; theta_grid.len()];
    for member in &ensemble.members {
        let w = if t < t_end {
            member
                .trajectory
                .snapshot_at(t)
                .ok_or_else(|| Error::invalid(format!("no snapshot at t = {t} ps")))?
        } else {
            member.trajectory.final_state()
        };
        let dens = angular_density(&w, t, theta_grid, &mol);
        for (o, d) in out.iter_mut().zip(dens) {
            *o += scale * member.weight * d;
        }
    }
    Ok(out)
}

/// Extrema of the post-pulse orientation trace over one revival period.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct OqrReport {
    pub max_value: f64,
    pub min_value: f64,
    pub t_max: f64,
    pub t_min: f64,
}

impl OqrReport {
    /// A_OQR = max - min, in [0, 2].
    pub fn amplitude(&self) -> f64 {
        self.max_value - self.min_value
    }

    /// Largest magnitude of the orientation over the period.
    pub fn abs_max(&self) -> f64 {
        self.max_value.abs().max(self.min_value.abs())
    }
}

fn golden_section<F: Fn(f64) -> f64>(f: &F, mut a: f64, mut b: f64, xtol: f64) -> (f64, f64) {
    let inv_phi = 0.5 * (5.0_f64.sqrt() - 1.0);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > xtol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

/// Extrema of a tau-periodic function over [t0, t0 + tau]: dense grid scan
/// plus golden-section refinement around the best brackets.
fn extrema_over_period<F: Fn(f64) -> f64>(f: F, t0: f64, tau: f64) -> OqrReport {
    let n = OQR_SCAN_POINTS;
    let mut idx_max = 0usize;
    let mut idx_min = 0usize;
    let mut v_max = f64::NEG_INFINITY;
    let mut v_min = f64::INFINITY;
    for i in 0..n {
        let t = t0 + tau * i as f64 / n as f64;
        let v = f(t);
        if v > v_max {
            v_max = v;
            idx_max = i;
        }
        if v < v_min {
            v_min = v;
            idx_min = i;
        }
    }
    let dt = tau / n as f64;
    let xtol = OQR_TIME_RESOLUTION * tau;
    // Periodicity makes a bracket sticking out of [t0, t0 + tau] harmless.
    let bracket = |i: usize| {
        let t = t0 + tau * i as f64 / n as f64;
        (t - dt, t + dt)
    };
    let (a, b) = bracket(idx_max);
    let (t_max, max_value) = golden_section(&f, a, b, xtol);
    let neg = |t: f64| -f(t);
    let (a, b) = bracket(idx_min);
    let (t_min, neg_min) = golden_section(&neg, a, b, xtol);
    OqrReport {
        max_value,
        min_value: -neg_min,
        t_max,
        t_min,
    }
}

/// Locate the thermal orientation extrema over [T, T + tau].
pub fn oqr_amplitude(ensemble: &ThermalEnsemble, mol: &MoleculeSpec) -> OqrReport {
    let t0 = ensemble.pulse().duration();
    extrema_over_period(
        |t| ensemble.orientation_free(t, mol),
        t0,
        revival_time(mol),
    )
}

/// Extrema of a single freely evolving wave packet over [t_start, t_start + tau].
pub fn oqr_amplitude_state(w: &WavepacketCoeffs, t_start: f64, mol: &MoleculeSpec) -> OqrReport {
    extrema_over_period(|t| orientation_at(w, t, mol), t_start, revival_time(mol))
}

/// Time between two successive post-pulse orientation maxima.
pub fn revival_spacing(ensemble: &ThermalEnsemble, mol: &MoleculeSpec) -> f64 {
    let tau = revival_time(mol);
    let f = |t: f64| ensemble.orientation_free(t, mol);
    let first = extrema_over_period(f, ensemble.pulse().duration(), tau);
    let second = extrema_over_period(f, first.t_max + 0.5 * tau, tau);
    second.t_max - first.t_max
}

/// Populations |c_J|^2 and wrapped relative phases
/// phi_J = arg(a_{J+1}) - arg(a_J) of the Schrodinger amplitudes at time t.
#[derive(Debug, Clone, Serialize)]
pub struct PhaseReport {
    pub labels: Vec<RotLabel>,
    pub populations: Vec<f64>,
    /// phi_J for consecutive pairs, wrapped to [0, 2 pi); zero by convention
    /// when either amplitude vanishes.
    pub phases: Vec<f64>,
}

pub fn populations_and_phases(w: &WavepacketCoeffs, t: f64, mol: &MoleculeSpec) -> PhaseReport {
    let amps = w.schrodinger_amplitudes(t, mol);
    let labels: Vec<RotLabel> = w
        .basis
        .j_values()
        .map(|j| RotLabel::new(j, w.basis.m()).expect("valid basis label"))
        .collect();
    let populations: Vec<f64> = amps.iter().map(|a| a.norm_sqr()).collect();
    let tau = 2.0 * std::f64::consts::PI;
    let phases: Vec<f64> = amps
        .windows(2)
        .map(|pair| {
            if pair[0].norm() < 1e-12 || pair[1].norm() < 1e-12 {
                0.0
            } else {
                (pair[1].arg() - pair[0].arg()).rem_euclid(tau)
            }
        })
        .collect();
    PhaseReport {
        labels,
        populations,
        phases,
    }
}

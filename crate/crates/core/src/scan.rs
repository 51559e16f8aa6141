//! Experiment orchestration: parameter grids, the simulate / magnus-orders
//! workflows, and deterministic file output.

use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::config::{BasisChoice, InitialState, ModelKind, RunConfig};
use crate::constants::UNITS;
use crate::error::{Error, Result};
use crate::magnus::{self, MagnusOrder};
use crate::observables::{
    self, oqr_amplitude, oqr_amplitude_state, populations_and_phases, thermal_angular_density,
    thermal_trace, OqrReport, PhaseReport, ThermalEnsemble,
};
use crate::pulse::{spectrum, PulseParams};
use crate::rotor::{revival_time, RotLabel};
use crate::tdse::{auto_truncate_with_tol, propagate, propagate_sampled, BasisSpec};

/// Outcome of one grid point; failures never abort the rest of the grid.
#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PointOutcome {
    Ok {
        report: OqrReport,
        a_oqr: f64,
        phases: PhaseReport,
        solver_steps: u64,
    },
    Failed {
        error: String,
    },
}

#[derive(Debug, Clone, Serialize)]
pub struct ScanPoint {
    pub e0_v_per_m: f64,
    pub delta1_thz: f64,
    pub outcome: PointOutcome,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunMeta {
    pub version: String,
    pub wall_time_s: f64,
    /// Accepted plus rejected steps summed over every trajectory integration
    /// in the run (zero where no coefficient ODE is involved).
    pub solver_steps: u64,
    pub config: RunConfig,
}

fn meta(cfg: &RunConfig, start: Instant, solver_steps: u64) -> RunMeta {
    RunMeta {
        version: env!("CARGO_PKG_VERSION").to_string(),
        wall_time_s: start.elapsed().as_secs_f64(),
        solver_steps,
        config: cfg.clone(),
    }
}

fn trajectory_steps(stats: &crate::ode::OdeStats) -> u64 {
    (stats.accepted + stats.rejected) as u64
}

#[derive(Debug, Clone, Serialize)]
pub struct ScanResult {
    pub e0_axis: Vec<f64>,
    pub delta1_axis_thz: Vec<f64>,
    /// Row-major over (E0, delta1).
    pub points: Vec<ScanPoint>,
    pub meta: RunMeta,
}

impl ScanResult {
    pub fn point(&self, i_e0: usize, i_d1: usize) -> &ScanPoint {
        &self.points[i_e0 * self.delta1_axis_thz.len() + i_d1]
    }

    pub fn a_oqr(&self, i_e0: usize, i_d1: usize) -> Option<f64> {
        match &self.point(i_e0, i_d1).outcome {
            PointOutcome::Ok { a_oqr, .. } => Some(*a_oqr),
            PointOutcome::Failed { .. } => None,
        }
    }
}

fn resolve_basis(cfg: &RunConfig, label: RotLabel, pulse: &PulseParams) -> Result<BasisSpec> {
    match cfg.basis {
        BasisChoice::Fixed(j) => BasisSpec::new(label.m(), j.max(label.j() + 2)),
        BasisChoice::Auto => auto_truncate_with_tol(label, pulse, &cfg.molecule, cfg.tol),
    }
}

fn thermal_j_max(cfg: &RunConfig, pulse: &PulseParams) -> Result<u32> {
    match cfg.basis {
        BasisChoice::Fixed(j) => Ok(j),
        BasisChoice::Auto => Ok(auto_truncate_with_tol(
            RotLabel::new(0, 0).expect("valid"),
            pulse,
            &cfg.molecule,
            cfg.tol,
        )?
        .j_max()),
    }
}

/// Evaluate one scan point under the configured model.
fn evaluate_point(cfg: &RunConfig, pulse: &PulseParams) -> Result<(OqrReport, PhaseReport, u64)> {
    let mol = &cfg.molecule;
    let t_end = pulse.duration();
    match cfg.model {
        ModelKind::Exact => match &cfg.initial {
            InitialState::Single(label) => {
                let basis = resolve_basis(cfg, *label, pulse)?;
                let traj = propagate(*label, pulse, mol, basis, cfg.tol)?;
                let steps = trajectory_steps(&traj.stats);
                let phases = populations_and_phases(&traj.final_state(), t_end, mol);
                let report = oqr_amplitude(&ThermalEnsemble::single(traj), mol);
                Ok((report, phases, steps))
            }
            InitialState::Thermal {
                temperature_k,
                weighting,
                cutoff,
            } => {
                let j_max = thermal_j_max(cfg, pulse)?;
                let ens = ThermalEnsemble::build(
                    mol,
                    pulse,
                    *temperature_k,
                    j_max,
                    cfg.tol,
                    *weighting,
                    *cutoff,
                    &[],
                )?;
                let report = oqr_amplitude(&ens, mol);
                let steps = ens
                    .members
                    .iter()
                    .map(|m| trajectory_steps(&m.trajectory.stats))
                    .sum();
                // Phase report of the highest-weight member.
                let lead = ens
                    .members
                    .iter()
                    .max_by(|a, b| a.weight.partial_cmp(&b.weight).unwrap())
                    .expect("ensemble has members");
                let phases = populations_and_phases(&lead.trajectory.final_state(), t_end, mol);
                Ok((report, phases, steps))
            }
        },
        ModelKind::Magnus => {
            let InitialState::Single(label) = &cfg.initial else {
                return Err(Error::invalid(
                    "the magnus model runs from a single initial state",
                ));
            };
            let orders = cfg.magnus_order_set()?;
            let amps = magnus::evolve_block(&orders, pulse, mol, *label, &cfg.magnus_options())?;
            let w = magnus::block_wavepacket(amps, label.m(), t_end)?;
            let report = oqr_amplitude_state(&w, t_end, mol);
            let phases = populations_and_phases(&w, t_end, mol);
            Ok((report, phases, 0))
        }
    }
}

fn pulse_at(cfg: &RunConfig, e0: f64, delta1_thz: f64) -> Result<PulseParams> {
    let omega_c = cfg.molecule.omega0() + UNITS.thz_to_angular(delta1_thz);
    PulseParams::from_angular(e0, omega_c, cfg.pulse.phi_c())
}

/// Evaluate the revival amplitude on the (E0, delta1) grid.
///
/// Grid points are independent computations gathered into pre-indexed slots,
/// so the result is identical for any worker count.
pub fn run_scan(cfg: &RunConfig) -> Result<ScanResult> {
    let start = Instant::now();
    let e0_axis = cfg.e0_grid.values();
    let delta1_axis = cfg.delta1_grid_thz.values();
    let jobs: Vec<(usize, usize)> = (0..e0_axis.len())
        .flat_map(|i| (0..delta1_axis.len()).map(move |j| (i, j)))
        .collect();

    let eval = |&(i, j): &(usize, usize)| -> ScanPoint {
        let e0 = e0_axis[i];
        let d1 = delta1_axis[j];
        let outcome = pulse_at(cfg, e0, d1)
            .and_then(|pulse| evaluate_point(cfg, &pulse))
            .map(|(report, phases, solver_steps)| PointOutcome::Ok {
                a_oqr: report.amplitude(),
                report,
                phases,
                solver_steps,
            })
            .unwrap_or_else(|e| PointOutcome::Failed { error: e.to_string() });
        ScanPoint {
            e0_v_per_m: e0,
            delta1_thz: d1,
            outcome,
        }
    };

    let points: Vec<ScanPoint> = if cfg.output.threads > 0 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.output.threads)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
        pool.install(|| jobs.par_iter().map(eval).collect())
    } else {
        jobs.par_iter().map(eval).collect()
    };

    let total_steps: u64 = points
        .iter()
        .map(|p| match &p.outcome {
            PointOutcome::Ok { solver_steps, .. } => *solver_steps,
            PointOutcome::Failed { .. } => 0,
        })
        .sum();
    Ok(ScanResult {
        e0_axis,
        delta1_axis_thz: delta1_axis,
        points,
        meta: meta(cfg, start, total_steps),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct DensityMap {
    pub times: Vec<f64>,
    pub thetas: Vec<f64>,
    /// `values[i_time][i_theta]`
    pub values: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SimulateResult {
    pub trace: observables::OrientationTrace,
    pub density: DensityMap,
    pub report: OqrReport,
    pub revival_spacing_ps: f64,
    pub meta: RunMeta,
}

/// Full evolution artifact set: orientation trace over [0, T + n tau],
/// angular density map, and the revival report.
pub fn run_simulate(cfg: &RunConfig) -> Result<SimulateResult> {
    let start = Instant::now();
    let mol = &cfg.molecule;
    let pulse = &cfg.pulse;
    let t_end = pulse.duration();
    let tau = revival_time(mol);
    let total = t_end + cfg.free_periods * tau;

    let times: Vec<f64> = (0..cfg.trace_points)
        .map(|i| total * i as f64 / (cfg.trace_points - 1) as f64)
        .collect();
    let density_times: Vec<f64> = (0..cfg.density_time_points)
        .map(|i| total * i as f64 / (cfg.density_time_points - 1) as f64)
        .collect();
    // Every during-pulse evaluation time must exist as a snapshot.
    let mut pulse_samples: Vec<f64> = times
        .iter()
        .chain(density_times.iter())
        .copied()
        .filter(|&t| t < t_end)
        .collect();
    pulse_samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pulse_samples.dedup();

    let ensemble = match &cfg.initial {
        InitialState::Thermal {
            temperature_k,
            weighting,
            cutoff,
        } => {
            let j_max = thermal_j_max(cfg, pulse)?;
            ThermalEnsemble::build(
                mol,
                pulse,
                *temperature_k,
                j_max,
                cfg.tol,
                *weighting,
                *cutoff,
                &pulse_samples,
            )?
        }
        InitialState::Single(label) => {
            let basis = resolve_basis(cfg, *label, pulse)?;
            ThermalEnsemble::single(propagate_sampled(
                *label,
                pulse,
                mol,
                basis,
                cfg.tol,
                &pulse_samples,
            )?)
        }
    };

    let trace = thermal_trace(&ensemble, &times)?;
    let thetas: Vec<f64> = (0..cfg.theta_points)
        .map(|i| std::f64::consts::PI * i as f64 / (cfg.theta_points - 1) as f64)
        .collect();
    let values: Result<Vec<Vec<f64>>> = density_times
        .iter()
        .map(|&t| thermal_angular_density(&ensemble, t, &thetas))
        .collect();
    let report = oqr_amplitude(&ensemble, mol);
    let spacing = observables::revival_spacing(&ensemble, mol);
    let solver_steps = ensemble
        .members
        .iter()
        .map(|m| trajectory_steps(&m.trajectory.stats))
        .sum();

    Ok(SimulateResult {
        trace,
        density: DensityMap {
            times: density_times,
            thetas,
            values: values?,
        },
        report,
        revival_spacing_ps: spacing,
        meta: meta(cfg, start, solver_steps),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct OrderCurve {
    pub order_tag: String,
    /// Block populations [pop_J0, pop_J1, pop_J2] per E0 grid value.
    pub final_pops: Vec<[f64; 3]>,
}

#[derive(Debug, Clone, Serialize)]
pub struct OrderTimeTrace {
    pub order_tag: String,
    pub pops: Vec<[f64; 3]>,
}

#[derive(Debug, Clone, Serialize)]
pub struct MagnusOrdersResult {
    pub e0_axis: Vec<f64>,
    pub curves: Vec<OrderCurve>,
    pub time_axis: Vec<f64>,
    pub time_traces: Vec<OrderTimeTrace>,
    pub meta: RunMeta,
}

fn order_tag(orders: &[MagnusOrder]) -> String {
    orders.iter().map(|o| o.to_string()).collect()
}

fn block_pops(amps: &[crate::linalg::C64; 3]) -> [f64; 3] {
    [amps[0].norm_sqr(), amps[1].norm_sqr(), amps[2].norm_sqr()]
}

/// Population transfer under single-order propagators and their union:
/// final populations against E0, plus time-resolved populations at the
/// configured peak field.
pub fn run_magnus_orders(cfg: &RunConfig) -> Result<MagnusOrdersResult> {
    let start = Instant::now();
    let InitialState::Single(label) = &cfg.initial else {
        return Err(Error::Config(
            "magnus-orders needs initial.mode = \"single\"".into(),
        ));
    };
    let slot = magnus::block_slot(*label)?;
    let mol = &cfg.molecule;
    let opts = cfg.magnus_options();
    let order_sets: Vec<Vec<MagnusOrder>> = vec![
        vec![MagnusOrder::One],
        vec![MagnusOrder::Two],
        vec![MagnusOrder::Three],
        MagnusOrder::ALL.to_vec(),
    ];

    let e0_axis = cfg.e0_grid.values();
    let per_e0: Vec<Vec<[f64; 3]>> = e0_axis
        .par_iter()
        .map(|&e0| -> Result<Vec<[f64; 3]>> {
            let pulse = cfg.pulse.with_e0(e0)?;
            let kernels = magnus::magnus_kernels(&pulse, mol, label.m(), pulse.duration(), &opts)?;
            order_sets
                .iter()
                .map(|set| {
                    let sel: Vec<magnus::MagnusKernel> =
                        set.iter().map(|o| kernels[o.index()]).collect();
                    let u = magnus::truncated_propagator(&sel)?;
                    Ok(block_pops(&u.column(slot)))
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let mut curves: Vec<OrderCurve> = order_sets
        .iter()
        .map(|set| OrderCurve {
            order_tag: order_tag(set),
            final_pops: Vec::with_capacity(e0_axis.len()),
        })
        .collect();
    for pops in per_e0 {
        for (curve, p) in curves.iter_mut().zip(pops) {
            curve.final_pops.push(p);
        }
    }

    // Time-resolved populations at the configured E0.
    let t_end = cfg.pulse.duration();
    let time_axis: Vec<f64> = (0..cfg.magnus_time_points)
        .map(|i| t_end * (i as f64 + 1.0) / cfg.magnus_time_points as f64)
        .collect();
    let sampled = magnus::magnus_kernels_sampled(&cfg.pulse, mol, label.m(), &time_axis, &opts)?;
    let mut time_traces: Vec<OrderTimeTrace> = order_sets
        .iter()
        .map(|set| OrderTimeTrace {
            order_tag: order_tag(set),
            pops: Vec::with_capacity(time_axis.len()),
        })
        .collect();
    for (_t, kernels) in &sampled {
        for (trace, set) in time_traces.iter_mut().zip(&order_sets) {
            let sel: Vec<magnus::MagnusKernel> = set.iter().map(|o| kernels[o.index()]).collect();
            let u = magnus::truncated_propagator(&sel)?;
            trace.pops.push(block_pops(&u.column(slot)));
        }
    }

    Ok(MagnusOrdersResult {
        e0_axis,
        curves,
        time_axis,
        time_traces,
        meta: meta(cfg, start, 0),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectrumResult {
    pub omega_thz: Vec<f64>,
    pub abs_a: Vec<f64>,
    pub meta: RunMeta,
}

/// |A(omega)| of the configured pulse on a frequency grid up to 4 f_c.
pub fn run_spectrum(cfg: &RunConfig, points: usize) -> Result<SpectrumResult> {
    let start = Instant::now();
    if points < 2 {
        return Err(Error::Config("spectrum needs at least 2 points".into()));
    }
    let f_max = 4.0 * UNITS.angular_to_thz(cfg.pulse.omega_c());
    let omega_thz: Vec<f64> = (0..points)
        .map(|i| f_max * i as f64 / (points - 1) as f64)
        .collect();
    let abs_a = omega_thz
        .iter()
        .map(|&f| spectrum(&cfg.pulse, UNITS.thz_to_angular(f)).norm())
        .collect();
    Ok(SpectrumResult {
        omega_thz,
        abs_a,
        meta: meta(cfg, start, 0),
    })
}

//! Rotational wave-packet dynamics of linear polar molecules driven by a
//! zero-area single-cycle THz pulse.
//!
//! The crate propagates the coefficient equations of a rigid rotor exactly in
//! a truncated basis, evaluates thermally averaged orientation observables
//! and their revival structure, and carries a three-state analysis built on
//! the Magnus expansion of the time-evolution operator with closed-form
//! first-order propagators and numerically accumulated higher-order kernels.
//!
//! Entry points:
//! - [`rotor`]: molecule data, energies, dipole matrix elements, thermal weights.
//! - [`pulse`]: the single-cycle pulse, its area and spectrum.
//! - [`tdse`]: exact coefficient propagation and basis truncation control.
//! - [`magnus`]: beta integrals, kernels, and block propagators.
//! - [`observables`]: orientation traces, angular densities, revival reports.
//! - [`scan`] / [`config`] / [`output`]: experiment orchestration and files.

// Validation uses `!(x > 0.0)` on purpose: unlike `x <= 0.0` it also rejects
// NaN. Index loops over the fixed 3x3 matrices stay as written.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::needless_range_loop)]

pub mod config;
pub mod constants;
pub mod error;
pub mod legendre;
pub mod linalg;
pub mod magnus;
pub mod observables;
pub mod ode;
pub mod output;
pub mod pulse;
pub mod quad;
pub mod rotor;
pub mod scan;
pub mod tdse;

pub use config::{BasisChoice, InitialState, ModelKind, RunConfig};
pub use constants::{UnitSystem, UNITS};
pub use error::{Error, Result};
pub use magnus::{
    beta_integrals, first_order_state, first_order_unitary, magnus_kernel, single_order_propagator,
    truncated_propagator, BetaPair, FirstOrderDecomposition, MagnusKernel, MagnusOptions,
    MagnusOrder,
};
pub use observables::{
    angular_density, oqr_amplitude, oqr_amplitude_state, orientation_at, populations_and_phases,
    thermal_trace, OqrReport, OrientationTrace, PhaseReport, ThermalEnsemble, ThermalWeighting,
};
pub use pulse::{field_at, pulse_area, spectrum, PulseParams, DEFAULT_PHI_C};
pub use rotor::{
    boltzmann_weights, cos_theta_element, revival_time, rot_energy, transition_freq, MoleculeSpec,
    RotLabel,
};
pub use tdse::{
    auto_truncate, free_evolve, propagate, propagate_sampled, BasisSpec, Trajectory,
    WavepacketCoeffs,
};

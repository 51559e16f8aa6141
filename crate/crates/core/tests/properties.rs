//! Cross-module identities and invariants that tie independent code paths
//! together.

mod common;

use num_complex::Complex64;
use oqr_core::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn hcn() -> MoleculeSpec {
    MoleculeSpec::hcn()
}

fn resonant(e0: f64) -> PulseParams {
    PulseParams::resonant(&hcn(), e0, DEFAULT_PHI_C).unwrap()
}

/// beta_0(T) is mu_10 times the pulse spectrum at omega_0 (two quadrature
/// paths through different modules).
#[test]
fn beta_equals_dipole_times_spectrum() {
    let mol = hcn();
    for (e0, f_thz) in [(7e6, 0.0874), (2e6, 0.12), (3e7, 0.1)] {
        let p = PulseParams::from_thz(e0, f_thz, DEFAULT_PHI_C).unwrap();
        let b = beta_integrals(&p, &mol, 0, p.duration()).unwrap();
        let mu10 = mol.dipole_coupling(cos_theta_element(0, 0).unwrap());
        let mu21 = mol.dipole_coupling(cos_theta_element(1, 0).unwrap());
        let a0 = spectrum(&p, mol.omega0());
        let a1 = spectrum(&p, transition_freq(1, &mol));
        assert!((b.beta0 - mu10 * a0).norm() <= 1e-12 * b.beta0.norm().max(1e-30));
        assert!((b.beta1 - mu21 * a1).norm() <= 1e-12 * b.beta1.norm().max(1e-30));
    }
}

/// At weak field the exact propagation lands on the first-order closed form
/// within 1e-4 in every population.
#[test]
fn weak_field_matches_first_order_closed_form() {
    let mol = hcn();
    let p = resonant(1e5);
    let basis = BasisSpec::new(0, 6).unwrap();
    let traj = propagate(RotLabel::new(0, 0).unwrap(), &p, &mol, basis, 1e-11).unwrap();
    let fin = traj.final_state();
    let b = beta_integrals(&p, &mol, 0, p.duration()).unwrap();
    let closed = first_order_state(0, 0, &b).unwrap();
    for (j, c) in closed.iter().enumerate() {
        let diff = (fin.population(j as u32) - c.norm_sqr()).abs();
        assert!(diff < 1e-4, "J = {j}: diff {diff}");
    }
}

/// At weak field the exact propagation agrees with exp(S1 + S2 + S3) of the
/// three-level block to 1e-6 in every block population (the leakage above the
/// block is itself far below 1e-6 there).
#[test]
fn weak_field_truncated_magnus_matches_exact_three_level() {
    let mol = hcn();
    let p = resonant(1e5);
    for (label, slot) in [
        (RotLabel::new(0, 0).unwrap(), 0usize),
        (RotLabel::new(1, 0).unwrap(), 1),
        (RotLabel::new(1, 1).unwrap(), 1),
    ] {
        let basis = BasisSpec::new(label.m(), 6).unwrap();
        let traj = propagate(label, &p, &mol, basis, 1e-12).unwrap();
        let fin = traj.final_state();

        let kernels: Vec<MagnusKernel> = MagnusOrder::ALL
            .iter()
            .map(|o| {
                magnus_kernel(*o, &p, &mol, label.m(), p.duration(), &MagnusOptions::default())
                    .unwrap()
            })
            .collect();
        let u = truncated_propagator(&kernels).unwrap();
        let amps = u.column(slot);
        let block_js: [Option<u32>; 3] = if label.m() == 0 {
            [Some(0), Some(1), Some(2)]
        } else {
            [None, Some(1), Some(2)]
        };
        for (k, j) in block_js.iter().enumerate() {
            let model = amps[k].norm_sqr();
            let exact = j.map(|j| fin.population(j)).unwrap_or(0.0);
            assert!(
                (model - exact).abs() < 1e-6,
                "{label} block slot {k}: {model} vs {exact}"
            );
        }
    }
}

/// The lowest relative phase of a weakly driven packet matches the
/// closed-form argument to 1e-3 rad, and the phase pipeline reproduces the
/// hand-computed arguments of the closed-form state itself.
///
/// phi_1 is excluded from the exact comparison: the direct two-photon piece
/// of the |20> amplitude scales with the same power of E0 as the ladder
/// piece, so its phase offset against the first-order form does not vanish
/// at weak field.
#[test]
fn weak_field_phases_match_closed_form() {
    let mol = hcn();
    let p = resonant(1e5);
    let basis = BasisSpec::new(0, 6).unwrap();
    let traj = propagate(RotLabel::new(0, 0).unwrap(), &p, &mol, basis, 1e-11).unwrap();
    let t_end = p.duration();
    let report = populations_and_phases(&traj.final_state(), t_end, &mol);

    let b = beta_integrals(&p, &mol, 0, t_end).unwrap();
    let closed = first_order_state(0, 0, &b).unwrap();
    let model = block_phase(&closed, 0, t_end, &mol);
    let mut d = (report.phases[0] - model[0]).abs();
    d = d.min(2.0 * std::f64::consts::PI - d);
    assert!(d < 1e-3, "phi_0: {} vs {}", report.phases[0], model[0]);

    // Pipeline check: wrapped phases of the closed-form state equal the
    // hand-computed amplitude arguments including the free phases.
    let e = |j: u32| rot_energy(j, &mol);
    let tau = 2.0 * std::f64::consts::PI;
    let hand = [
        (closed[1].arg() - e(1) * t_end - closed[0].arg() + e(0) * t_end).rem_euclid(tau),
        (closed[2].arg() - e(2) * t_end - closed[1].arg() + e(1) * t_end).rem_euclid(tau),
    ];
    for (k, (got, want)) in model.iter().zip(&hand).enumerate() {
        let mut d = (got - want).abs();
        d = d.min(tau - d);
        assert!(d < 1e-12, "pipeline phi_{k}: {got} vs {want}");
    }
}

/// Schrodinger-picture relative phases of block amplitudes, wrapped.
fn block_phase(amps: &[Complex64; 3], m: i32, t: f64, mol: &MoleculeSpec) -> Vec<f64> {
    let w = oqr_core::magnus::block_wavepacket(*amps, m, t).unwrap();
    populations_and_phases(&w, t, mol).phases
}

/// Norm conservation across the tested field and carrier ranges.
#[test]
fn unitarity_across_parameter_space() {
    let mol = hcn();
    for (e0, f_thz) in [
        (1e5, 0.05),
        (7e6, 0.0874),
        (8e6, 0.2),
        (3e7, 0.1),
        (1.5e7, 0.05),
    ] {
        let p = PulseParams::from_thz(e0, f_thz, DEFAULT_PHI_C).unwrap();
        let basis = auto_truncate(RotLabel::new(0, 0).unwrap(), &p, &mol).unwrap();
        let traj = propagate(RotLabel::new(0, 0).unwrap(), &p, &mol, basis, 1e-10).unwrap();
        for snap in &traj.snapshots {
            let norm: f64 = snap.iter().map(|c| c.norm_sqr()).sum();
            assert!(
                (norm - 1.0).abs() <= 1e-10,
                "E0={e0} f={f_thz}: drift {}",
                (norm - 1.0).abs()
            );
        }
    }
}

/// The revival amplitude grows linearly from zero field; assert positive
/// slope across E0 in [1e5, 5e5] V/m.
#[test]
fn weak_field_amplitude_slope_positive() {
    let mol = hcn();
    let mut last = 0.0;
    for e0 in [1e5, 3e5, 5e5] {
        let p = resonant(e0);
        let basis = BasisSpec::new(0, 6).unwrap();
        let traj = propagate(RotLabel::new(0, 0).unwrap(), &p, &mol, basis, 1e-10).unwrap();
        let a = oqr_amplitude(&ThermalEnsemble::single(traj), &mol).amplitude();
        assert!(a > last, "A_OQR not increasing at {e0}");
        last = a;
    }
    // Linearity: A(3e5)/A(1e5) close to 3.
    let a1 = {
        let traj = propagate(
            RotLabel::new(0, 0).unwrap(),
            &resonant(1e5),
            &hcn(),
            BasisSpec::new(0, 6).unwrap(),
            1e-10,
        )
        .unwrap();
        oqr_amplitude(&ThermalEnsemble::single(traj), &hcn()).amplitude()
    };
    let a3 = {
        let traj = propagate(
            RotLabel::new(0, 0).unwrap(),
            &resonant(3e5),
            &hcn(),
            BasisSpec::new(0, 6).unwrap(),
            1e-10,
        )
        .unwrap();
        oqr_amplitude(&ThermalEnsemble::single(traj), &hcn()).amplitude()
    };
    assert!((a3 / a1 - 3.0).abs() < 0.02, "ratio {}", a3 / a1);
}

/// Orientation stays within [-1, 1] for random normalized states.
#[test]
fn orientation_bounded_on_random_states() {
    let mol = hcn();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..500 {
        let m = [-2i32, -1, 0, 1, 2][rand::Rng::random_range(&mut rng, 0..5)];
        let j_max = m.unsigned_abs() + 2 + rand::Rng::random_range(&mut rng, 0..6);
        let basis = BasisSpec::new(m, j_max).unwrap();
        let w = WavepacketCoeffs::new(basis, 0.0, common::random_state(&mut rng, basis.dim()))
            .unwrap();
        for t in [0.0, 1.7, 23.0] {
            let v = orientation_at(&w, t, &mol);
            assert!(v.abs() <= 1.0 + 1e-12, "out of bounds: {v}");
        }
    }
}

/// Free evolution leaves interaction coefficients alone and every observable
/// returns after one revival period.
#[test]
fn free_evolution_revival_identity() {
    let mol = hcn();
    let p = resonant(5e6);
    let basis = BasisSpec::new(0, 8).unwrap();
    let traj = propagate(RotLabel::new(0, 0).unwrap(), &p, &mol, basis, 1e-11).unwrap();
    let fin = traj.final_state();
    let tau = revival_time(&mol);
    let moved = free_evolve(&fin, tau);
    assert_eq!(fin.coeffs, moved.coeffs);
    for k in 0..40 {
        let t = p.duration() + 0.37 * k as f64;
        let a = orientation_at(&fin, t, &mol);
        let b = orientation_at(&fin, t + tau, &mol);
        assert!((a - b).abs() <= 1e-12);
    }
}

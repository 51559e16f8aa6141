//! Shared helpers for the integration suites: an independent matrix
//! exponential and deterministic random draws.

#![allow(dead_code)]

use num_complex::Complex64;
use oqr_core::linalg::{Mat3, C64};
use rand::Rng;

/// Scaling-and-squaring Taylor exponential; deliberately independent of the
/// eigendecomposition route used inside the crate.
pub fn expm_taylor(a: &Mat3) -> Mat3 {
    let norm = a.max_abs();
    let k = if norm > 0.25 {
        (norm / 0.25).log2().ceil() as i32
    } else {
        0
    };
    let scaled = a.scale(C64::new(1.0 / 2f64.powi(k), 0.0));
    let mut term = Mat3::identity();
    let mut sum = Mat3::identity();
    for n in 1..30 {
        term = term.matmul(&scaled).scale(C64::new(1.0 / n as f64, 0.0));
        sum = sum.add(&term);
    }
    let mut out = sum;
    for _ in 0..k {
        out = out.matmul(&out);
    }
    out
}

/// Apply a 3x3 matrix to a basis vector e_slot and return the column.
pub fn apply_to_slot(u: &Mat3, slot: usize) -> [C64; 3] {
    u.column(slot)
}

/// A random normalized coefficient vector of the given length.
pub fn random_state<R: Rng>(rng: &mut R, n: usize) -> Vec<Complex64> {
    let mut v: Vec<Complex64> = (0..n)
        .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    let norm: f64 = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    v.iter_mut().for_each(|c| *c /= norm);
    v
}

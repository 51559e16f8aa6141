//! Three-state analysis of the pulse-driven rotor: beta integrals, the
//! closed-form first-order propagator, and numerically accumulated
//! second/third-order kernels with their single-order and truncated
//! propagators.
//!
//! The model space is (|0 0>, |1 M>, |2 M>). For M = 0 both couplings are
//! active; for M = +-1 the transition into J = 0 is forbidden (cos theta
//! conserves M), so the first slot is inert and the block reduces to the
//! two levels (|1 M>, |2 M>).

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{exp_anti_hermitian, Mat3, C64};
use crate::ode::{self, OdeOptions, SampleMode};
use crate::pulse::{field_at, spectrum, PulseParams};
use crate::quad;
use crate::rotor::{cos_theta_element, transition_freq, MoleculeSpec, RotLabel};
use crate::tdse::{BasisSpec, WavepacketCoeffs};

/// One Magnus order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum MagnusOrder {
    One,
    Two,
    Three,
}

impl MagnusOrder {
    pub const ALL: [MagnusOrder; 3] = [MagnusOrder::One, MagnusOrder::Two, MagnusOrder::Three];

    pub fn from_u8(n: u8) -> Result<Self> {
        match n {
            1 => Ok(MagnusOrder::One),
            2 => Ok(MagnusOrder::Two),
            3 => Ok(MagnusOrder::Three),
            _ => Err(Error::invalid(format!("Magnus order must be 1, 2 or 3, got {n}"))),
        }
    }

    pub fn as_u8(&self) -> u8 {
        match self {
            MagnusOrder::One => 1,
            MagnusOrder::Two => 2,
            MagnusOrder::Three => 3,
        }
    }

    /// Position within an `[S1, S2, S3]` array.
    pub fn index(&self) -> usize {
        self.as_u8() as usize - 1
    }
}

impl std::fmt::Display for MagnusOrder {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.as_u8())
    }
}

#[derive(Debug, Clone, Copy)]
pub struct MagnusOptions {
    /// Include the second commutator of the textbook third-order term.
    /// Off by default: the single-commutator form is the reference here.
    pub standard_third_order: bool,
    /// Relative tolerance of the kernel accumulation ODE.
    pub tol: f64,
}

impl Default for MagnusOptions {
    fn default() -> Self {
        MagnusOptions {
            standard_third_order: false,
            tol: 1e-12,
        }
    }
}

/// The pair of dimensionless pulse-area integrals driving the block.
#[derive(Debug, Clone, Copy)]
pub struct BetaPair {
    pub beta0: C64,
    pub beta1: C64,
    /// Upper limit of the time integrals (ps).
    pub t: f64,
}

impl BetaPair {
    /// beta = sqrt(|beta0|^2 + |beta1|^2) >= 0.
    pub fn beta(&self) -> f64 {
        (self.beta0.norm_sqr() + self.beta1.norm_sqr()).sqrt()
    }
}

/// Dipole couplings and transition frequencies of the block at fixed M.
#[derive(Debug, Clone, Copy)]
struct Block {
    m0: f64,
    m1: f64,
    w0: f64,
    w1: f64,
}

fn block(mol: &MoleculeSpec, m: i32) -> Result<Block> {
    if m.unsigned_abs() > 1 {
        return Err(Error::invalid(format!(
            "three-state analysis supports M in {{-1, 0, 1}}, got {m}"
        )));
    }
    let m0 = if m == 0 {
        cos_theta_element(0, 0).expect("valid")
    } else {
        0.0 // J = 0 -> 1 is forbidden outside M = 0
    };
    let m1 = cos_theta_element(1, m).expect("|M| <= 1");
    Ok(Block {
        m0,
        m1,
        w0: transition_freq(0, mol),
        w1: transition_freq(1, mol),
    })
}

/// Interaction-picture Hamiltonian of the block at time t.
fn h_interaction(t: f64, pulse: &PulseParams, mol: &MoleculeSpec, b: &Block) -> Mat3 {
    let g = mol.dipole_coupling(field_at(t, pulse));
    let mut h = Mat3::ZERO;
    if g == 0.0 {
        return h;
    }
    let off01 = Complex64::from_polar(-g * b.m0, -b.w0 * t);
    let off12 = Complex64::from_polar(-g * b.m1, -b.w1 * t);
    h.0[0][1] = off01;
    h.0[1][0] = off01.conj();
    h.0[1][2] = off12;
    h.0[2][1] = off12.conj();
    h
}

/// beta_0(t) = mu_10 int_0^t E e^{i w0 t'} dt' and
/// beta_1(t) = mu_21 int_0^t E e^{i w1 t'} dt', with mu_10 = 0 for M = +-1.
pub fn beta_integrals(pulse: &PulseParams, mol: &MoleculeSpec, m: i32, t: f64) -> Result<BetaPair> {
    let b = block(mol, m)?;
    let upper = t.min(pulse.duration()).max(0.0);
    let fourier = |omega: f64| -> C64 {
        quad::integrate_complex(
            |s| Complex64::from_polar(1.0, omega * s) * field_at(s, pulse),
            0.0,
            upper,
            omega + 4.0 * pulse.omega_c(),
        )
    };
    let beta0 = if b.m0 != 0.0 {
        fourier(b.w0) * mol.dipole_coupling(b.m0)
    } else {
        C64::ZERO
    };
    let beta1 = fourier(b.w1) * mol.dipole_coupling(b.m1);
    Ok(BetaPair { beta0, beta1, t })
}

/// Spectral cross-check: beta_0(T) equals mu_10 A(w0) with A the pulse
/// spectrum, and likewise for beta_1.
pub fn beta_from_spectrum(pulse: &PulseParams, mol: &MoleculeSpec, m: i32) -> Result<BetaPair> {
    let b = block(mol, m)?;
    let beta0 = if b.m0 != 0.0 {
        spectrum(pulse, b.w0) * mol.dipole_coupling(b.m0)
    } else {
        C64::ZERO
    };
    Ok(BetaPair {
        beta0,
        beta1: spectrum(pulse, b.w1) * mol.dipole_coupling(b.m1),
        t: pulse.duration(),
    })
}

/// Eigen-decomposition of the first-order kernel: eigenvalues (0, +beta,
/// -beta) with their orthonormal eigenvectors.
#[derive(Debug, Clone)]
pub struct FirstOrderDecomposition {
    /// lambda_0 = 0, lambda_+ = +beta, lambda_- = -beta.
    pub eigenvalues: [f64; 3],
    /// Rows: |lambda_0>, |lambda_+>, |lambda_->.
    pub eigenvectors: [[C64; 3]; 3],
}

impl FirstOrderDecomposition {
    pub fn new(b: &BetaPair) -> Result<Self> {
        let beta = b.beta();
        if beta == 0.0 {
            return Err(Error::DegenerateBeta);
        }
        let inv = 1.0 / beta;
        let root2 = std::f64::consts::SQRT_2;
        let v0 = [-b.beta1.conj() * inv, C64::ZERO, b.beta0 * inv];
        let vp = [
            b.beta0.conj() * (inv / root2),
            C64::new(1.0 / root2, 0.0),
            b.beta1 * (inv / root2),
        ];
        let vm = [
            -b.beta0.conj() * (inv / root2),
            C64::new(1.0 / root2, 0.0),
            -b.beta1 * (inv / root2),
        ];
        Ok(FirstOrderDecomposition {
            eigenvalues: [0.0, beta, -beta],
            eigenvectors: [v0, vp, vm],
        })
    }

    /// Sum_p e^{i lambda_p} |lambda_p><lambda_p|.
    pub fn unitary(&self) -> Mat3 {
        let mut u = Mat3::ZERO;
        for (lam, v) in self.eigenvalues.iter().zip(&self.eigenvectors) {
            u = u.add(&Mat3::outer(v, v).scale(C64::from_polar(1.0, *lam)));
        }
        u
    }

    /// Sum_p |lambda_p><lambda_p|, the completeness check target.
    pub fn projector_sum(&self) -> Mat3 {
        let mut p = Mat3::ZERO;
        for v in &self.eigenvectors {
            p = p.add(&Mat3::outer(v, v));
        }
        p
    }
}

/// First-order propagator assembled from the kernel eigenvectors; the
/// degenerate beta = 0 limit is the identity.
pub fn first_order_unitary(b: &BetaPair) -> Mat3 {
    match FirstOrderDecomposition::new(b) {
        Ok(d) => d.unitary(),
        Err(_) => Mat3::identity(),
    }
}

/// sin(x)/x, accurate near zero.
fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        1.0 - x * x / 6.0 + x.powi(4) / 120.0
    } else {
        x.sin() / x
    }
}

/// (cos x - 1)/x^2 = -sinc(x/2)^2 / 2, accurate for all x.
fn versinc(x: f64) -> f64 {
    let s = sinc(0.5 * x);
    -0.5 * s * s
}

/// Closed-form first-order state for the supported initial states
/// (0,0), (1,0) and (1,+-1); unit norm by construction.
pub fn first_order_state(j0: u32, m: i32, b: &BetaPair) -> Result<[C64; 3]> {
    let beta = b.beta();
    match (j0, m) {
        (0, 0) => Ok([
            C64::ONE + b.beta0.norm_sqr() * versinc(beta),
            C64::I * b.beta0 * sinc(beta),
            b.beta0 * b.beta1 * versinc(beta),
        ]),
        (1, 0) | (1, 1) | (1, -1) => Ok([
            C64::I * b.beta0.conj() * sinc(beta),
            C64::new(beta.cos(), 0.0),
            C64::I * b.beta1 * sinc(beta),
        ]),
        _ => Err(Error::invalid(format!(
            "no closed form for initial state |{j0},{m}>"
        ))),
    }
}

/// Slot of |J0 M> within the block vector.
pub fn block_slot(initial: RotLabel) -> Result<usize> {
    match (initial.j(), initial.m()) {
        (0, 0) => Ok(0),
        (1, 0) | (1, 1) | (1, -1) => Ok(1),
        _ => Err(Error::invalid(format!(
            "initial state {initial} is outside the supported three-state blocks"
        ))),
    }
}

/// Embed block amplitudes as a wave packet for the observables layer.
///
/// M = 0 maps onto J in [0, 2]; M = +-1 discards the inert slot and maps onto
/// J in [1, 3] with zero amplitude on J = 3.
pub fn block_wavepacket(amps: [C64; 3], m: i32, t_ref: f64) -> Result<WavepacketCoeffs> {
    if m == 0 {
        WavepacketCoeffs::new(BasisSpec::new(0, 2)?, t_ref, amps.to_vec())
    } else if m.unsigned_abs() == 1 {
        debug_assert!(amps[0].norm() < 1e-12, "inert slot must stay empty");
        WavepacketCoeffs::new(
            BasisSpec::new(m, 3)?,
            t_ref,
            vec![amps[1], amps[2], C64::ZERO],
        )
    } else {
        Err(Error::invalid(format!("unsupported block M = {m}")))
    }
}

/// Anti-Hermitian Magnus kernel of one order at time t.
#[derive(Debug, Clone, Copy)]
pub struct MagnusKernel {
    pub order: MagnusOrder,
    pub t: f64,
    pub matrix: Mat3,
}

fn write_mat(dst: &mut [Complex64], m: &Mat3) {
    for i in 0..3 {
        for j in 0..3 {
            dst[3 * i + j] = m.0[i][j];
        }
    }
}

fn read_mat(src: &[Complex64]) -> Mat3 {
    let mut m = Mat3::ZERO;
    for i in 0..3 {
        for j in 0..3 {
            m.0[i][j] = src[3 * i + j];
        }
    }
    m
}

// Offsets into the augmented state vector (units of one 3x3 block).
const P_OFF: usize = 0;
const R_OFF: usize = 9;
const W_OFF: usize = 18;
const BASE_LEN: usize = 27;
const G_OFF: usize = 27;
const D_OFF: usize = 36;
const SB_OFF: usize = 45;
const SC_OFF: usize = 126;
const T2_OFF: usize = 207;
const STD_LEN: usize = 216;

/// Build all three kernels at the given times (ascending, within [0, T]) in a
/// single pass of the augmented ODE
///   dP/dt = H, dR/dt = [H, P], dW/dt = [H, R],
/// giving S1 = -iP, S2 = -R/2, S3 = (i/6) W. The textbook third-order variant
/// accumulates the second nested commutator alongside.
pub fn magnus_kernels_sampled(
    pulse: &PulseParams,
    mol: &MoleculeSpec,
    m: i32,
    times: &[f64],
    opts: &MagnusOptions,
) -> Result<Vec<(f64, [MagnusKernel; 3])>> {
    let blk = block(mol, m)?;
    let t_end = times.last().copied().unwrap_or(0.0);
    if times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::invalid("kernel sample times must be ascending"));
    }
    if t_end > pulse.duration() * (1.0 + 1e-12) {
        return Err(Error::invalid(format!(
            "kernel time {t_end} beyond pulse duration {}",
            pulse.duration()
        )));
    }
    let n = if opts.standard_third_order { STD_LEN } else { BASE_LEN };
    let standard = opts.standard_third_order;

    let rhs = move |t: f64, y: &[Complex64], dy: &mut [Complex64]| {
        let h = h_interaction(t, pulse, mol, &blk);
        let p = read_mat(&y[P_OFF..P_OFF + 9]);
        let r = read_mat(&y[R_OFF..R_OFF + 9]);
        write_mat(&mut dy[P_OFF..P_OFF + 9], &h);
        write_mat(&mut dy[R_OFF..R_OFF + 9], &h.commutator(&p));
        write_mat(&mut dy[W_OFF..W_OFF + 9], &h.commutator(&r));
        if standard {
            let g = read_mat(&y[G_OFF..G_OFF + 9]);
            let d = read_mat(&y[D_OFF..D_OFF + 9]);
            write_mat(&mut dy[G_OFF..G_OFF + 9], &p.matmul(&h));
            write_mat(&mut dy[D_OFF..D_OFF + 9], &h.matmul(&p));
            // Sandwich accumulators: SB captures int P X H, SC captures
            // int H X P, for a later 3x3 insertion X.
            for i in 0..3 {
                for j in 0..3 {
                    for k in 0..3 {
                        for l in 0..3 {
                            let idx = 27 * i + 9 * j + 3 * k + l;
                            dy[SB_OFF + idx] = p.0[i][k] * h.0[l][j];
                            dy[SC_OFF + idx] = h.0[i][k] * p.0[l][j];
                        }
                    }
                }
            }
            // d(T2)/dt = G H - int(P . H(t) . H) - int(H . H(t) . P) + H D
            let mut t2 = g.matmul(&h).add(&h.matmul(&d));
            for i in 0..3 {
                for j in 0..3 {
                    let mut acc = Complex64::ZERO;
                    for k in 0..3 {
                        for l in 0..3 {
                            let idx = 27 * i + 9 * j + 3 * k + l;
                            acc += (y[SB_OFF + idx] + y[SC_OFF + idx]) * h.0[k][l];
                        }
                    }
                    t2.0[i][j] -= acc;
                }
            }
            write_mat(&mut dy[T2_OFF..T2_OFF + 9], &t2);
        }
    };

    let mut out = Vec::with_capacity(times.len());
    let y0 = vec![Complex64::ZERO; n];
    let opts_ode = OdeOptions {
        rtol: opts.tol,
        // Kernel entries are dimensionless and O(1) or smaller; an absolute
        // floor keeps step control sane while everything is still zero.
        atol: 1e-14,
        ..Default::default()
    };
    ode::integrate(
        rhs,
        0.0,
        t_end,
        y0,
        &opts_ode,
        SampleMode::At(times),
        |t, y| {
            let p = read_mat(&y[P_OFF..P_OFF + 9]);
            let r = read_mat(&y[R_OFF..R_OFF + 9]);
            let mut w = read_mat(&y[W_OFF..W_OFF + 9]);
            if standard {
                w = w.add(&read_mat(&y[T2_OFF..T2_OFF + 9]));
            }
            let s1 = p.scale(C64::new(0.0, -1.0));
            let s2 = r.scale(C64::new(-0.5, 0.0));
            let s3 = w.scale(C64::new(0.0, 1.0 / 6.0));
            out.push((
                t,
                [
                    MagnusKernel { order: MagnusOrder::One, t, matrix: s1 },
                    MagnusKernel { order: MagnusOrder::Two, t, matrix: s2 },
                    MagnusKernel { order: MagnusOrder::Three, t, matrix: s3 },
                ],
            ));
        },
    )?;
    Ok(out)
}

/// All three kernels at a single time.
pub fn magnus_kernels(
    pulse: &PulseParams,
    mol: &MoleculeSpec,
    m: i32,
    t: f64,
    opts: &MagnusOptions,
) -> Result<[MagnusKernel; 3]> {
    let sampled = magnus_kernels_sampled(pulse, mol, m, &[t], opts)?;
    Ok(sampled.into_iter().next().expect("one sample requested").1)
}

/// Single kernel S^(n)(t).
pub fn magnus_kernel(
    order: MagnusOrder,
    pulse: &PulseParams,
    mol: &MoleculeSpec,
    m: i32,
    t: f64,
    opts: &MagnusOptions,
) -> Result<MagnusKernel> {
    Ok(magnus_kernels(pulse, mol, m, t, opts)?[order.index()])
}

/// exp(S^(n)) through the Hermitian eigendecomposition of -i S^(n).
pub fn single_order_propagator(kernel: &MagnusKernel) -> Mat3 {
    exp_anti_hermitian(&kernel.matrix)
}

/// exp(sum of the given kernels); they must share the evaluation time.
pub fn truncated_propagator(kernels: &[MagnusKernel]) -> Result<Mat3> {
    let Some(first) = kernels.first() else {
        return Ok(Mat3::identity());
    };
    let mut sum = Mat3::ZERO;
    let mut seen = [false; 3];
    for k in kernels {
        if (k.t - first.t).abs() > 1e-9 * first.t.abs().max(1.0) {
            return Err(Error::invalid("kernels evaluated at different times"));
        }
        if seen[k.order.index()] {
            return Err(Error::invalid(format!("duplicate Magnus order {}", k.order)));
        }
        seen[k.order.index()] = true;
        sum = sum.add(&k.matrix);
    }
    Ok(exp_anti_hermitian(&sum))
}

/// Evolve |initial> with exp(sum of the selected orders) over the full pulse.
pub fn evolve_block(
    orders: &[MagnusOrder],
    pulse: &PulseParams,
    mol: &MoleculeSpec,
    initial: RotLabel,
    opts: &MagnusOptions,
) -> Result<[C64; 3]> {
    let slot = block_slot(initial)?;
    let all = magnus_kernels(pulse, mol, initial.m(), pulse.duration(), opts)?;
    let selected: Vec<MagnusKernel> = orders.iter().map(|o| all[o.index()]).collect();
    let u = truncated_propagator(&selected)?;
    Ok(u.column(slot))
}

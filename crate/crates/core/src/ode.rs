//! Adaptive embedded Runge-Kutta integration of complex-valued ODE systems.
//!
//! Dormand-Prince 5(4) with the FSAL property and standard step-size control.
//! The interaction picture removes the fast diagonal phases from our systems,
//! so a general-purpose explicit stepper is efficient here.

use num_complex::Complex64;

use crate::error::{Error, Result};

// Dormand-Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
// Fifth-order solution weights (row 7 of A; FSAL).
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
// Difference between fifth- and embedded fourth-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions {
            rtol: 1e-10,
            atol: 1e-12,
            max_steps: 20_000_000,
        }
    }
}

impl OdeOptions {
    pub fn with_tol(rtol: f64) -> Self {
        OdeOptions {
            rtol,
            atol: rtol * 1e-2,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct OdeStats {
    pub accepted: usize,
    pub rejected: usize,
}

/// Where the integrator reports the solution.
#[derive(Clone, Copy)]
pub enum SampleMode<'a> {
    /// Call the sink at t0 and after every accepted step.
    AcceptedSteps,
    /// Call the sink exactly at the given ascending times within [t0, t1].
    At(&'a [f64]),
}

/// Integrate dy/dt = rhs(t, y) from t0 to t1 (t1 > t0).
///
/// `rhs` writes the derivative into its third argument. The sink receives
/// (t, y) according to `mode`. Returns the final state.
pub fn integrate<F, S>(
    mut rhs: F,
    t0: f64,
    t1: f64,
    y0: Vec<Complex64>,
    opts: &OdeOptions,
    mode: SampleMode,
    mut sink: S,
) -> Result<(Vec<Complex64>, OdeStats)>
where
    F: FnMut(f64, &[Complex64], &mut [Complex64]),
    S: FnMut(f64, &[Complex64]),
{
    assert!(t1 >= t0, "integration runs forward in time");
    let n = y0.len();
    let span = t1 - t0;
    let mut y = y0;
    let mut stats = OdeStats::default();

    let sample_times: &[f64] = match mode {
        SampleMode::At(times) => times,
        SampleMode::AcceptedSteps => &[],
    };
    let mut next_sample = 0usize;
    // Emit any samples that coincide with t0.
    while next_sample < sample_times.len() && sample_times[next_sample] <= t0 {
        sink(sample_times[next_sample], &y);
        next_sample += 1;
    }
    if matches!(mode, SampleMode::AcceptedSteps) {
        sink(t0, &y);
    }
    if span == 0.0 {
        return Ok((y, stats));
    }

    let mut k: Vec<Vec<Complex64>> = vec![vec![Complex64::ZERO; n]; 7];
    let mut ytmp = vec![Complex64::ZERO; n];
    let mut ynew = vec![Complex64::ZERO; n];

    let mut t = t0;
    let mut h = (span * 1e-4).min(span);
    let h_floor = span * 1e-14;
    rhs(t, &y, &mut k[0]);

    loop {
        // Land exactly on the next sample time or the interval end.
        let target = if next_sample < sample_times.len() {
            sample_times[next_sample].min(t1)
        } else {
            t1
        };
        let h_free = h;
        let mut clamped = false;
        if t + h >= target - 1e-14 * span {
            h = target - t;
            clamped = true;
        }

        for stage in 1..7 {
            for i in 0..n {
                let mut acc = Complex64::ZERO;
                for (j, kj) in k.iter().enumerate().take(stage) {
                    let a = A[stage - 1][j];
                    if a != 0.0 {
                        acc += a * kj[i];
                    }
                }
                ytmp[i] = y[i] + h * acc;
            }
            let ts = t + C[stage] * h;
            let (head, tail) = k.split_at_mut(stage);
            let _ = head;
            rhs(ts, &ytmp, &mut tail[0]);
        }

        let mut err_sq = 0.0;
        for i in 0..n {
            let mut acc = Complex64::ZERO;
            let mut err = Complex64::ZERO;
            for j in 0..7 {
                if B5[j] != 0.0 {
                    acc += B5[j] * k[j][i];
                }
                if E[j] != 0.0 {
                    err += E[j] * k[j][i];
                }
            }
            ynew[i] = y[i] + h * acc;
            let scale = opts.atol + opts.rtol * y[i].norm().max(ynew[i].norm());
            let r = (h * err).norm() / scale;
            err_sq += r * r;
        }
        let err_norm = (err_sq / n as f64).sqrt();

        if err_norm <= 1.0 {
            t = if clamped { target } else { t + h };
            std::mem::swap(&mut y, &mut ynew);
            k.swap(0, 6); // FSAL: last stage is the derivative at the new point
            stats.accepted += 1;

            if matches!(mode, SampleMode::AcceptedSteps) {
                sink(t, &y);
            }
            while next_sample < sample_times.len()
                && sample_times[next_sample] <= t + 1e-14 * span
            {
                sink(sample_times[next_sample], &y);
                next_sample += 1;
            }
            if t >= t1 - 1e-14 * span {
                return Ok((y, stats));
            }
        } else {
            stats.rejected += 1;
            // The rejected stage evaluations invalidated nothing: k[0] still
            // holds the derivative at (t, y).
        }

        let factor = if err_norm > 0.0 {
            (0.9 * err_norm.powf(-0.2)).clamp(0.2, 5.0)
        } else {
            5.0
        };
        if err_norm <= 1.0 && clamped {
            // The clamp, not the controller, shortened this step; resume from
            // the step size the controller wanted.
            h = h_free;
        } else {
            h *= factor;
        }
        if h < h_floor {
            return Err(Error::NonConvergence { t });
        }
        if stats.accepted + stats.rejected > opts.max_steps {
            return Err(Error::NonConvergence { t });
        }
    }
}

//! Dense 3x3 complex matrices and a Hermitian eigensolver, sized for the
//! three-state analysis. Everything is stack-allocated.

use num_complex::Complex64;

pub type C64 = Complex64;

/// Row-major 3x3 complex matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat3(pub [[C64; 3]; 3]);

impl Mat3 {
    pub const ZERO: Mat3 = Mat3([[C64::ZERO; 3]; 3]);

    pub fn identity() -> Mat3 {
        let mut m = Mat3::ZERO;
        for i in 0..3 {
            m.0[i][i] = C64::ONE;
        }
        m
    }

    /// Outer product v w^dagger.
    pub fn outer(v: &[C64; 3], w: &[C64; 3]) -> Mat3 {
        let mut m = Mat3::ZERO;
        for i in 0..3 {
            for j in 0..3 {
                m.0[i][j] = v[i] * w[j].conj();
            }
        }
        m
    }

    pub fn matmul(&self, other: &Mat3) -> Mat3 {
        let mut out = Mat3::ZERO;
        for i in 0..3 {
            for j in 0..3 {
                let mut acc = C64::ZERO;
                for (k, row) in other.0.iter().enumerate() {
                    acc += self.0[i][k] * row[j];
                }
                out.0[i][j] = acc;
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[C64; 3]) -> [C64; 3] {
        let mut out = [C64::ZERO; 3];
        for i in 0..3 {
            for k in 0..3 {
                out[i] += self.0[i][k] * v[k];
            }
        }
        out
    }

    pub fn adjoint(&self) -> Mat3 {
        let mut out = Mat3::ZERO;
        for i in 0..3 {
            for j in 0..3 {
                out.0[i][j] = self.0[j][i].conj();
            }
        }
        out
    }

    pub fn add(&self, other: &Mat3) -> Mat3 {
        let mut out = *self;
        for i in 0..3 {
            for j in 0..3 {
                out.0[i][j] += other.0[i][j];
            }
        }
        out
    }

    pub fn sub(&self, other: &Mat3) -> Mat3 {
        let mut out = *self;
        for i in 0..3 {
            for j in 0..3 {
                out.0[i][j] -= other.0[i][j];
            }
        }
        out
    }

    pub fn scale(&self, s: C64) -> Mat3 {
        let mut out = *self;
        for i in 0..3 {
            for j in 0..3 {
                out.0[i][j] *= s;
            }
        }
        out
    }

    /// [A, B] = AB - BA.
    pub fn commutator(&self, other: &Mat3) -> Mat3 {
        self.matmul(other).sub(&other.matmul(self))
    }

    pub fn max_abs(&self) -> f64 {
        self.0
            .iter()
            .flatten()
            .map(|c| c.norm())
            .fold(0.0, f64::max)
    }

    /// Largest |(A + A^dagger)_ij|; zero for an anti-Hermitian matrix.
    pub fn anti_hermiticity_defect(&self) -> f64 {
        self.add(&self.adjoint()).max_abs()
    }

    /// Largest |(U U^dagger - I)_ij|; zero for a unitary matrix.
    pub fn unitarity_defect(&self) -> f64 {
        self.matmul(&self.adjoint()).sub(&Mat3::identity()).max_abs()
    }

    pub fn column(&self, j: usize) -> [C64; 3] {
        [self.0[0][j], self.0[1][j], self.0[2][j]]
    }
}

/// Eigendecomposition of a Hermitian 3x3 matrix by cyclic complex Jacobi
/// rotations. Returns ascending eigenvalues and the unitary of column
/// eigenvectors V with A = V diag(lambda) V^dagger.
pub fn hermitian_eig3(a: &Mat3) -> ([f64; 3], Mat3) {
    let mut m = *a;
    let mut v = Mat3::identity();
    let scale = a.max_abs().max(1e-300);

    for _sweep in 0..60 {
        let off = m.0[0][1].norm() + m.0[0][2].norm() + m.0[1][2].norm();
        if off <= 1e-16 * scale {
            break;
        }
        for p in 0..2usize {
            for q in (p + 1)..3usize {
                let apq = m.0[p][q];
                if apq.norm() <= 1e-18 * scale {
                    continue;
                }
                let app = m.0[p][p].re;
                let aqq = m.0[q][q].re;
                let phase = apq / apq.norm(); // e^{i arg(apq)}
                let tau = (aqq - app) / (2.0 * apq.norm());
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;

                // G is the identity with [[c, s*phase], [-s*conj(phase), c]]
                // in the (p, q) plane; apply m <- G^dagger m G, v <- v G.
                let mut g = Mat3::identity();
                g.0[p][p] = C64::new(c, 0.0);
                g.0[p][q] = phase * s;
                g.0[q][p] = -phase.conj() * s;
                g.0[q][q] = C64::new(c, 0.0);
                m = g.adjoint().matmul(&m).matmul(&g);
                v = v.matmul(&g);
            }
        }
    }

    let mut pairs: [(f64, usize); 3] = [(m.0[0][0].re, 0), (m.0[1][1].re, 1), (m.0[2][2].re, 2)];
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let evals = [pairs[0].0, pairs[1].0, pairs[2].0];
    let mut vecs = Mat3::ZERO;
    for (col, (_, src)) in pairs.iter().enumerate() {
        for row in 0..3 {
            vecs.0[row][col] = v.0[row][*src];
        }
    }
    (evals, vecs)
}

/// exp(S) for an anti-Hermitian S, via the Hermitian eigendecomposition of
/// -iS: exp(S) = V diag(e^{i lambda}) V^dagger.
pub fn exp_anti_hermitian(s: &Mat3) -> Mat3 {
    let h = s.scale(C64::new(0.0, -1.0)); // Hermitian
    let (evals, v) = hermitian_eig3(&h);
    let mut out = Mat3::ZERO;
    for (k, lam) in evals.iter().enumerate() {
        let col = v.column(k);
        out = out.add(&Mat3::outer(&col, &col).scale(C64::from_polar(1.0, *lam)));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn eig_diagonal() {
        let mut a = Mat3::ZERO;
        a.0[0][0] = c(3.0, 0.0);
        a.0[1][1] = c(-1.0, 0.0);
        a.0[2][2] = c(2.0, 0.0);
        let (evals, v) = hermitian_eig3(&a);
        assert!((evals[0] + 1.0).abs() < 1e-14);
        assert!((evals[1] - 2.0).abs() < 1e-14);
        assert!((evals[2] - 3.0).abs() < 1e-14);
        assert!(v.unitarity_defect() < 1e-14);
    }

    #[test]
    fn eig_known_hermitian() {
        // Eigenvalues of [[0, b*],[b, 0]] embedded in 3x3 are {0, +-|b|}.
        let b = c(0.3, -0.4);
        let mut a = Mat3::ZERO;
        a.0[0][1] = b.conj();
        a.0[1][0] = b;
        let (evals, v) = hermitian_eig3(&a);
        assert!((evals[0] + 0.5).abs() < 1e-14);
        assert!(evals[1].abs() < 1e-14);
        assert!((evals[2] - 0.5).abs() < 1e-14);
        // Residual A v = lambda v.
        for k in 0..3 {
            let col = v.column(k);
            let av = a.mul_vec(&col);
            for i in 0..3 {
                assert!((av[i] - evals[k] * col[i]).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn eig_random_hermitian_residuals() {
        // A deterministic batch of dense Hermitian matrices.
        let mut seed = 1.0_f64;
        let mut next = move || {
            seed = (seed * 997.0 + 13.7) % 51.3;
            seed / 51.3 - 0.5
        };
        for _ in 0..50 {
            let d0 = next();
            let d1 = next();
            let d2 = next();
            let x01 = c(next(), next());
            let x02 = c(next(), next());
            let x12 = c(next(), next());
            let a = Mat3([
                [c(d0, 0.0), x01, x02],
                [x01.conj(), c(d1, 0.0), x12],
                [x02.conj(), x12.conj(), c(d2, 0.0)],
            ]);
            let (evals, v) = hermitian_eig3(&a);
            assert!(v.unitarity_defect() < 1e-13);
            for k in 0..3 {
                let col = v.column(k);
                let av = a.mul_vec(&col);
                for i in 0..3 {
                    assert!(
                        (av[i] - evals[k] * col[i]).norm() < 1e-12,
                        "residual too large"
                    );
                }
            }
            // Trace is preserved.
            let tr: f64 = evals.iter().sum();
            assert!((tr - (d0 + d1 + d2)).abs() < 1e-12);
        }
    }

    #[test]
    fn exp_of_zero_is_identity() {
        let u = exp_anti_hermitian(&Mat3::ZERO);
        assert!(u.sub(&Mat3::identity()).max_abs() < 1e-15);
    }

    #[test]
    fn exp_is_unitary() {
        let s = Mat3([
            [c(0.0, 0.1), c(0.2, 0.3), c(-0.05, 0.07)],
            [c(-0.2, 0.3), c(0.0, -0.4), c(0.6, -0.1)],
            [c(0.05, 0.07), c(-0.6, -0.1), c(0.0, 0.3)],
        ]);
        assert!(s.anti_hermiticity_defect() < 1e-15);
        let u = exp_anti_hermitian(&s);
        assert!(u.unitarity_defect() < 1e-13);
    }

    #[test]
    fn exp_matches_rotation_block() {
        // exp of [[0, a],[-a, 0]] (real a) is a rotation by a.
        let a = 0.7;
        let mut s = Mat3::ZERO;
        s.0[0][1] = c(a, 0.0);
        s.0[1][0] = c(-a, 0.0);
        let u = exp_anti_hermitian(&s);
        assert!((u.0[0][0].re - a.cos()).abs() < 1e-13);
        assert!((u.0[0][1].re - a.sin()).abs() < 1e-13);
        assert!((u.0[1][0].re + a.sin()).abs() < 1e-13);
        assert!((u.0[2][2] - C64::ONE).norm() < 1e-14);
    }
}

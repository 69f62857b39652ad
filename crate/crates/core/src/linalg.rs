//! Small dense complex linear algebra used throughout the crate.
//!
//! Matrices are stack-allocated `nalgebra` matrices. The Hermitian eigensolver is a
//! cyclic complex Jacobi iteration, which is accurate to a few ulps of the matrix
//! norm for the 3x3 and 9x9 problems that occur here.

use nalgebra::{SMatrix, SVector};
use num_complex::Complex64;

use crate::{Error, Result};

pub type C64 = Complex64;
pub type Mat3 = SMatrix<C64, 3, 3>;
pub type Mat9 = SMatrix<C64, 9, 9>;
pub type Vec9 = SVector<C64, 9>;
pub type Vector3 = nalgebra::Vector3<f64>;

/// `a ⊗ b` with the index convention `3 * i_a + i_b`.
pub fn kron(a: &Mat3, b: &Mat3) -> Mat9 {
    let mut out = Mat9::zeros();
    for ia in 0..3 {
        for ja in 0..3 {
            let x = a[(ia, ja)];
            if x == C64::new(0.0, 0.0) {
                continue;
            }
            for ib in 0..3 {
                for jb in 0..3 {
                    out[(3 * ia + ib, 3 * ja + jb)] = x * b[(ib, jb)];
                }
            }
        }
    }
    out
}

pub fn max_abs<const N: usize>(m: &SMatrix<C64, N, N>) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// Largest element of `m - m†`.
pub fn hermitian_deviation<const N: usize>(m: &SMatrix<C64, N, N>) -> f64 {
    let mut dev: f64 = 0.0;
    for i in 0..N {
        for j in i..N {
            dev = dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    dev
}

/// Relative Hermiticity check: `max|m - m†| <= tol * max|m|`.
pub fn check_hermitian<const N: usize>(m: &SMatrix<C64, N, N>, tol: f64) -> Result<()> {
    let dev = hermitian_deviation(m);
    if dev <= tol * max_abs(m) {
        Ok(())
    } else {
        Err(Error::NotHermitian { deviation: dev })
    }
}

/// Eigenvalues in ascending order with the matching orthonormal eigenvectors as columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Eigensystem<const N: usize> {
    pub values: [f64; N],
    pub vectors: SMatrix<C64, N, N>,
}

impl<const N: usize> Eigensystem<N> {
    /// `V diag(f(λ)) V†`.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> C64) -> SMatrix<C64, N, N> {
        let mut out = SMatrix::<C64, N, N>::zeros();
        for k in 0..N {
            let fk = f(self.values[k]);
            for i in 0..N {
                let vik = self.vectors[(i, k)] * fk;
                for j in 0..N {
                    out[(i, j)] += vik * self.vectors[(j, k)].conj();
                }
            }
        }
        out
    }
}

const MAX_SWEEPS: usize = 64;

/// Diagonalizes a Hermitian matrix. Rejects input whose anti-Hermitian part exceeds
/// `1e-9` of the largest element.
pub fn hermitian_eigen<const N: usize>(m: &SMatrix<C64, N, N>) -> Result<Eigensystem<N>> {
    check_hermitian(m, 1e-9)?;
    // symmetrize so the iteration sees an exactly Hermitian matrix
    let mut a = SMatrix::<C64, N, N>::zeros();
    for i in 0..N {
        for j in 0..N {
            a[(i, j)] = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
        }
        a[(i, i)] = C64::new(a[(i, i)].re, 0.0);
    }
    let mut v = SMatrix::<C64, N, N>::identity();
    let scale = a.iter().fold(0.0f64, |acc, z| acc + z.norm_sqr()).sqrt();
    if scale == 0.0 {
        return Ok(Eigensystem {
            values: [0.0; N],
            vectors: v,
        });
    }

    for _ in 0..MAX_SWEEPS {
        let mut off = 0.0;
        for p in 0..N {
            for q in p + 1..N {
                off += a[(p, q)].norm_sqr();
            }
        }
        if off.sqrt() <= 1e-17 * scale {
            break;
        }
        for p in 0..N {
            for q in p + 1..N {
                rotate(&mut a, &mut v, p, q);
            }
        }
    }

    let mut order: [usize; N] = core::array::from_fn(|i| i);
    order.sort_by(|&x, &y| a[(x, x)].re.total_cmp(&a[(y, y)].re));
    let values = core::array::from_fn(|k| a[(order[k], order[k])].re);
    let mut vectors = SMatrix::<C64, N, N>::zeros();
    for (k, &src) in order.iter().enumerate() {
        vectors.set_column(k, &v.column(src));
    }
    Ok(Eigensystem { values, vectors })
}

/// One complex Jacobi rotation annihilating `a[p][q]`.
fn rotate<const N: usize>(
    a: &mut SMatrix<C64, N, N>,
    v: &mut SMatrix<C64, N, N>,
    p: usize,
    q: usize,
) {
    let apq = a[(p, q)];
    let r = apq.norm();
    if r == 0.0 {
        return;
    }
    // phase that makes the pivot real: A <- D† A D with D_qq = e^{-i arg(apq)}
    let phase = apq.conj() / r;
    for k in 0..N {
        a[(k, q)] *= phase;
    }
    for k in 0..N {
        a[(q, k)] *= phase.conj();
    }
    for k in 0..N {
        v[(k, q)] *= phase;
    }

    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    let theta = (aqq - app) / (2.0 * r);
    let t = theta.signum() / (theta.abs() + libm::sqrt(theta * theta + 1.0));
    let t = if theta == 0.0 { 1.0 } else { t };
    let c = 1.0 / libm::sqrt(t * t + 1.0);
    let s = t * c;

    for k in 0..N {
        if k == p || k == q {
            continue;
        }
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        let new_kp = akp * c - akq * s;
        let new_kq = akp * s + akq * c;
        a[(k, p)] = new_kp;
        a[(p, k)] = new_kp.conj();
        a[(k, q)] = new_kq;
        a[(q, k)] = new_kq.conj();
    }
    a[(p, p)] = C64::new(app - t * r, 0.0);
    a[(q, q)] = C64::new(aqq + t * r, 0.0);
    a[(p, q)] = C64::new(0.0, 0.0);
    a[(q, p)] = C64::new(0.0, 0.0);

    for k in 0..N {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * c - vkq * s;
        v[(k, q)] = vkp * s + vkq * c;
    }
}

/// `exp(-i 2π H t)` for Hermitian `H` in Hz and `t` in seconds.
pub fn propagator<const N: usize>(h: &SMatrix<C64, N, N>, t: f64) -> Result<SMatrix<C64, N, N>> {
    if is_diagonal(h) {
        let mut u = SMatrix::<C64, N, N>::zeros();
        for i in 0..N {
            u[(i, i)] = phase_factor(h[(i, i)].re, t);
        }
        return Ok(u);
    }
    let eig = hermitian_eigen(h)?;
    Ok(eig.map_spectrum(|lambda| phase_factor(lambda, t)))
}

pub(crate) fn phase_factor(freq: f64, t: f64) -> C64 {
    let phi = -2.0 * core::f64::consts::PI * freq * t;
    C64::new(libm::cos(phi), libm::sin(phi))
}

pub fn is_diagonal<const N: usize>(m: &SMatrix<C64, N, N>) -> bool {
    (0..N).all(|i| (0..N).all(|j| i == j || m[(i, j)] == C64::new(0.0, 0.0)))
}

const FRAC_1_SQRT_3: f64 = 0.577_350_269_189_625_8;

use crate::linalg::{check_hermitian, kron, Mat3, Mat9, Vector3, C64};
use crate::spincore::operators::spin1_operators;
use crate::spincore::Spin;
use crate::{Error, PhysicalConstants, Result};

/// The four `<111>` bond directions, lab frame with z along `[001]`.
pub const NV_AXES: [[f64; 3]; 4] = [
    [FRAC_1_SQRT_3, FRAC_1_SQRT_3, FRAC_1_SQRT_3],
    [FRAC_1_SQRT_3, -FRAC_1_SQRT_3, -FRAC_1_SQRT_3],
    [-FRAC_1_SQRT_3, FRAC_1_SQRT_3, -FRAC_1_SQRT_3],
    [-FRAC_1_SQRT_3, -FRAC_1_SQRT_3, FRAC_1_SQRT_3],
];

/// One of the `<111>` axes as a vector. Panics if `k > 3`.
pub fn nv_axis(k: usize) -> Vector3 {
    Vector3::from(NV_AXES[k])
}

fn finite(v: &Vector3) -> bool {
    v.iter().all(|x| x.is_finite())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NVCenter {
    axis: Vector3,
    d: f64,
    e: f64,
}

impl NVCenter {
    pub const DEFAULT_D: f64 = 2.87e9;

    /// `axis` is normalized; `d` and `e` are in Hz.
    pub fn new(axis: Vector3, d: f64, e: f64) -> Result<Self> {
        let norm = axis.norm();
        if !finite(&axis) || norm == 0.0 {
            return Err(Error::invalid("NV axis must be a finite non-zero vector"));
        }
        if !(d > 0.0 && d.is_finite()) {
            return Err(Error::invalid("zero-field splitting D must be positive"));
        }
        if !(e >= 0.0 && e.is_finite()) {
            return Err(Error::invalid("strain splitting E must be non-negative"));
        }
        Ok(Self {
            axis: axis / norm,
            d,
            e,
        })
    }

    pub fn along(axis: Vector3) -> Result<Self> {
        Self::new(axis, Self::DEFAULT_D, 0.0)
    }

    pub fn axis(&self) -> Vector3 {
        self.axis
    }
    pub fn d(&self) -> f64 {
        self.d
    }
    pub fn e(&self) -> f64 {
        self.e
    }

    pub fn frame(&self) -> LocalFrame {
        LocalFrame::from_axis(&self.axis)
    }
}

/// Static magnetic field in Tesla, lab frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldSetting {
    b: Vector3,
}

impl FieldSetting {
    pub fn new(b: Vector3) -> Result<Self> {
        if !finite(&b) {
            return Err(Error::invalid("field components must be finite"));
        }
        Ok(Self { b })
    }

    pub fn zero() -> Self {
        Self {
            b: Vector3::zeros(),
        }
    }

    /// `magnitude` Tesla along `direction` (normalized here).
    pub fn along(direction: &Vector3, magnitude: f64) -> Result<Self> {
        let n = direction.norm();
        if n == 0.0 {
            return Err(Error::invalid("field direction must be non-zero"));
        }
        Self::new(direction * (magnitude / n))
    }

    pub fn b(&self) -> Vector3 {
        self.b
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinPairSystem {
    center_a: NVCenter,
    center_b: NVCenter,
    displacement: Vector3,
}

impl SpinPairSystem {
    /// `displacement` points from A to B, in meters.
    pub fn new(center_a: NVCenter, center_b: NVCenter, displacement: Vector3) -> Result<Self> {
        if !finite(&displacement) {
            return Err(Error::invalid("displacement must be finite"));
        }
        if displacement.norm() == 0.0 {
            return Err(Error::ZeroDisplacement);
        }
        Ok(Self {
            center_a,
            center_b,
            displacement,
        })
    }

    pub fn center(&self, spin: Spin) -> &NVCenter {
        match spin {
            Spin::A => &self.center_a,
            Spin::B => &self.center_b,
        }
    }
    pub fn center_a(&self) -> &NVCenter {
        &self.center_a
    }
    pub fn center_b(&self) -> &NVCenter {
        &self.center_b
    }
    pub fn displacement(&self) -> Vector3 {
        self.displacement
    }
    pub fn distance(&self) -> f64 {
        self.displacement.norm()
    }

    pub fn with_displacement(&self, displacement: Vector3) -> Result<Self> {
        Self::new(self.center_a, self.center_b, displacement)
    }

    /// Same pair seen with the labels A and B exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            center_a: self.center_b,
            center_b: self.center_a,
            displacement: -self.displacement,
        }
    }
}

/// Orthonormal frame `(u, w, n)` of one center; `n` is the NV axis and becomes the
/// quantization axis of that center's spin operators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalFrame {
    pub u: Vector3,
    pub w: Vector3,
    pub n: Vector3,
}

impl LocalFrame {
    pub fn from_axis(axis: &Vector3) -> Self {
        let n = axis.normalize();
        let reference = if n.z.abs() < 0.9 {
            Vector3::z()
        } else {
            Vector3::x()
        };
        let u = reference.cross(&n).normalize();
        let w = n.cross(&u);
        Self { u, w, n }
    }

    /// Lab vector expressed in this frame.
    pub fn to_local(&self, v: &Vector3) -> Vector3 {
        Vector3::new(v.dot(&self.u), v.dot(&self.w), v.dot(&self.n))
    }

    pub fn to_lab(&self, v: &Vector3) -> Vector3 {
        self.u * v.x + self.w * v.y + self.n * v.z
    }
}

/// The 9x9 register Hamiltonian in Hz together with the pieces needed to label it.
#[derive(Debug, Clone, PartialEq)]
pub struct PairHamiltonian {
    matrix: Mat9,
    single: [Mat3; 2],
    frames: [LocalFrame; 2],
}

impl PairHamiltonian {
    pub fn matrix(&self) -> &Mat9 {
        &self.matrix
    }

    /// The uncoupled Hamiltonian of one center, in its own frame.
    pub fn single(&self, spin: Spin) -> &Mat3 {
        &self.single[spin.index()]
    }

    pub fn frame(&self, spin: Spin) -> &LocalFrame {
        &self.frames[spin.index()]
    }

    /// Wraps an arbitrary Hermitian matrix, e.g. a rotating-frame Hamiltonian.
    /// The single-center parts are taken as zero and the frames as the lab frame.
    pub fn from_matrix(matrix: Mat9) -> Result<Self> {
        check_hermitian(&matrix, 1e-9)?;
        let lab = LocalFrame {
            u: Vector3::x(),
            w: Vector3::y(),
            n: Vector3::z(),
        };
        Ok(Self {
            matrix,
            single: [Mat3::zeros(); 2],
            frames: [lab; 2],
        })
    }

    pub fn is_diagonal(&self) -> bool {
        crate::linalg::is_diagonal(&self.matrix)
    }
}

/// `D Sz^2 + E (Sx^2 - Sy^2) + gamma B.S` in the center's frame.
pub fn single_center_hamiltonian(
    center: &NVCenter,
    field: &FieldSetting,
    constants: &PhysicalConstants,
) -> Mat3 {
    let s = spin1_operators();
    let frame = center.frame();
    let b_local = frame.to_local(&field.b()) * constants.gamma_e();
    let re = |x: f64| C64::new(x, 0.0);
    s.z * s.z * re(center.d()) + (s.x * s.x - s.y * s.y) * re(center.e()) + s.project(&b_local)
}

/// `J [S_A.S_B - 3 (S_A.r)(S_B.r)]` with `J = mu0 g^2 muB^2 / (4 pi r^3 h)`.
pub fn dipolar_hamiltonian(system: &SpinPairSystem, constants: &PhysicalConstants) -> Result<Mat9> {
    let r = system.distance();
    if r == 0.0 {
        return Err(Error::ZeroDisplacement);
    }
    let j = constants.dipolar_prefactor(r);
    let rhat = system.displacement() / r;
    let fa = system.center_a().frame();
    let fb = system.center_b().frame();
    let s = spin1_operators();
    let proj = |frame: &LocalFrame, v: &Vector3| s.project(&frame.to_local(v));

    let mut h = Mat9::zeros();
    for e in [Vector3::x(), Vector3::y(), Vector3::z()] {
        h += kron(&proj(&fa, &e), &proj(&fb, &e));
    }
    h -= kron(&proj(&fa, &rhat), &proj(&fb, &rhat)) * C64::new(3.0, 0.0);
    Ok(h * C64::new(j, 0.0))
}

pub fn pair_hamiltonian(
    system: &SpinPairSystem,
    field: &FieldSetting,
    constants: &PhysicalConstants,
) -> Result<PairHamiltonian> {
    let ha = single_center_hamiltonian(system.center_a(), field, constants);
    let hb = single_center_hamiltonian(system.center_b(), field, constants);
    let matrix = kron(&ha, &Mat3::identity())
        + kron(&Mat3::identity(), &hb)
        + dipolar_hamiltonian(system, constants)?;
    check_hermitian(&matrix, 1e-9)?;
    Ok(PairHamiltonian {
        matrix,
        single: [ha, hb],
        frames: [system.center_a().frame(), system.center_b().frame()],
    })
}

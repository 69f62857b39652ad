use core::f64::consts::FRAC_1_SQRT_2;

use crate::linalg::{Mat3, Vector3, C64};

/// The S=1 operators in the `(-1, 0, +1)` basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinOperators {
    pub x: Mat3,
    pub y: Mat3,
    pub z: Mat3,
}

pub fn spin1_operators() -> SpinOperators {
    let r = C64::new(FRAC_1_SQRT_2, 0.0);
    let i = C64::new(0.0, FRAC_1_SQRT_2);
    let o = C64::new(0.0, 0.0);
    let one = C64::new(1.0, 0.0);
    // S+ |m> = sqrt(2) |m+1>; Sx = (S+ + S-)/2, Sy = (S+ - S-)/2i
    #[rustfmt::skip]
    let x = Mat3::new(
        o, r, o,
        r, o, r,
        o, r, o,
    );
    #[rustfmt::skip]
    let y = Mat3::new(
        o, i, o,
        -i, o, i,
        o, -i, o,
    );
    let z = Mat3::from_diagonal(&nalgebra::Vector3::new(-one, o, one));
    SpinOperators { x, y, z }
}

impl SpinOperators {
    /// `S · v` where `v` is given by its components in the operator frame.
    pub fn project(&self, v: &Vector3) -> Mat3 {
        self.x * C64::new(v.x, 0.0) + self.y * C64::new(v.y, 0.0) + self.z * C64::new(v.z, 0.0)
    }
}

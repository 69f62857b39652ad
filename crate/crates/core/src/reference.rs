//! A fixed register used by the named templates, the examples and the tests.
//!
//! A points along `[111]` and B along `[1-1-1]`. B sits 9.8 nm from A with an 8.8 nm
//! offset in the surface plane. The azimuth of that offset is tuned so that, at 3 mT
//! along A's axis, A's `|0> <-> |-1>` line shifts by 42 kHz when B is flipped to `|-1>`.

use crate::linalg::Vector3;
use crate::spincore::{nv_axis, FieldSetting, NVCenter, SpinPairSystem};

pub const DISTANCE_M: f64 = 9.8e-9;
pub const LATERAL_M: f64 = 8.8e-9;
pub const AZIMUTH_DEG: f64 = 50.056_510_144_101_14;
pub const FIELD_T: f64 = 3e-3;
/// Δν1 of [`system`] at [`field`], rounded.
pub const COUPLING_HZ: f64 = 42e3;

pub fn displacement() -> Vector3 {
    let phi = AZIMUTH_DEG.to_radians();
    let depth = libm::sqrt(DISTANCE_M * DISTANCE_M - LATERAL_M * LATERAL_M);
    Vector3::new(
        LATERAL_M * libm::cos(phi),
        LATERAL_M * libm::sin(phi),
        depth,
    )
}

pub fn system() -> SpinPairSystem {
    SpinPairSystem::new(
        NVCenter::along(nv_axis(0)).expect("unit axis"),
        NVCenter::along(nv_axis(1)).expect("unit axis"),
        displacement(),
    )
    .expect("non-zero displacement")
}

/// `magnitude` Tesla along A's axis.
pub fn aligned_field(magnitude: f64) -> FieldSetting {
    FieldSetting::along(&nv_axis(0), magnitude).expect("finite field")
}

pub fn field() -> FieldSetting {
    aligned_field(FIELD_T)
}

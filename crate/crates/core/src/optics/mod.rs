//! Optical side of the register: FLIM image synthesis, lifetime-based separation of
//! two emitters and their registration, plus two closed-form estimates.

mod flim;
mod register;

pub use flim::{
    fit_amplitudes, synthesize_flim, AmplitudeImages, EmitterModel, FlimConfig, FlimImage,
    PixelNoise,
};
pub use register::{correlate_displacement, ImageGrid, Registration};

use crate::{Error, Result};

/// `g2(0) = 1 - 1/n` for `n` equal independent single-photon emitters.
pub fn g2_zero(n_emitters: u32) -> Result<f64> {
    if n_emitters == 0 {
        return Err(Error::invalid("need at least one emitter"));
    }
    Ok(1.0 - 1.0 / f64::from(n_emitters))
}

/// Ground-state-depletion spot size `r0 / sqrt(P0 / Γ)`.
pub fn gsd_resolution(r0: f64, pump_ratio: f64) -> Result<f64> {
    if !(pump_ratio > 0.0 && pump_ratio.is_finite()) {
        return Err(Error::invalid("pump ratio must be positive"));
    }
    Ok(r0 / libm::sqrt(pump_ratio))
}

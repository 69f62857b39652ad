use rand_core::RngCore;
use rand_distr::{Distribution, Poisson};

use crate::dynamics::{population, QuantumState};
use crate::spincore::{Spin, SpinLevel};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Normalization {
    /// Relative fluorescence: 1 for `|0>`, `1 - contrast` for `|±1>`.
    Raw,
    /// Rescaled so that `|0>` reads 1 and a full spin flip reads 0.
    SpinFlip,
}

/// Spin-dependent fluorescence. With a photon budget each readout is a Poisson draw
/// with mean `photon_budget * raw_level`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReadoutModel {
    contrast: f64,
    photon_budget: Option<f64>,
    normalization: Normalization,
}

impl Default for ReadoutModel {
    fn default() -> Self {
        Self {
            contrast: 0.3,
            photon_budget: None,
            normalization: Normalization::SpinFlip,
        }
    }
}

impl ReadoutModel {
    pub fn new(
        contrast: f64,
        photon_budget: Option<f64>,
        normalization: Normalization,
    ) -> Result<Self> {
        if !(contrast > 0.0 && contrast <= 1.0) {
            return Err(Error::invalid("readout contrast must lie in (0, 1]"));
        }
        if let Some(n) = photon_budget {
            if !(n > 0.0 && n.is_finite()) {
                return Err(Error::invalid("photon budget must be positive"));
            }
        }
        Ok(Self {
            contrast,
            photon_budget,
            normalization,
        })
    }

    pub fn contrast(&self) -> f64 {
        self.contrast
    }
    pub fn photon_budget(&self) -> Option<f64> {
        self.photon_budget
    }
    pub fn normalization(&self) -> Normalization {
        self.normalization
    }
    pub fn is_noisy(&self) -> bool {
        self.photon_budget.is_some()
    }
}

/// Readout of a spin whose `|0>` population is `p0`.
pub fn readout_value(p0: f64, model: &ReadoutModel, rng: Option<&mut dyn RngCore>) -> Result<f64> {
    let c = model.contrast;
    let mut raw = 1.0 - c * (1.0 - p0);
    let Some(n) = model.photon_budget else {
        // exact endpoints without the affine round trip
        return Ok(match model.normalization {
            Normalization::Raw => raw,
            Normalization::SpinFlip => p0,
        });
    };
    let rng = rng.ok_or(Error::MissingRandomSource)?;
    let mean = (n * raw).max(f64::MIN_POSITIVE);
    let counts = Poisson::new(mean)
        .map_err(|_| Error::invalid("invalid photon mean"))?
        .sample(rng);
    raw = counts / n;
    Ok(match model.normalization {
        Normalization::Raw => raw,
        Normalization::SpinFlip => (raw - (1.0 - c)) / c,
    })
}

pub fn readout(
    state: &QuantumState,
    spin: Spin,
    model: &ReadoutModel,
    rng: Option<&mut dyn RngCore>,
) -> Result<f64> {
    readout_value(population(state, spin, SpinLevel::Zero), model, rng)
}

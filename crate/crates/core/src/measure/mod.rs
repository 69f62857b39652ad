//! Fluorescence readout and analysis of signal traces.

mod fit;
mod readout;
mod spectrum;

pub use fit::{estimate_polarization, fit_modulation, ModulationFit};
pub use readout::{readout, readout_value, Normalization, ReadoutModel};
pub use spectrum::{dft, extract_peaks, fft_spectrum, spectrum, Peak, PeakList, Spectrum, Window};

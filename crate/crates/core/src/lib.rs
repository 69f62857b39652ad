//! Simulation and inverse-problem toolkit for a register of two dipolar-coupled
//! S=1 electron spins (nitrogen-vacancy centers in diamond).
//!
//! The crate is `no_std` and only needs `alloc`. File formats, configuration,
//! parallel sweeps and the command-line front end live in the `nvreg` crate.
//!
//! Module map:
//!
//! * [`spincore`]: spin-1 operators, the two-center Hamiltonian, labeled eigenlevels
//!   and DEER coupling frequencies.
//! * [`dynamics`]: density matrices, pulses, free evolution with pure dephasing.
//! * [`sequences`]: pulse programs, the text DSL, named experiment templates and
//!   the execution engine.
//! * [`measure`]: fluorescence readout, spectra, peak extraction, modulation fits.
//! * [`locate`]: geometry inversion from DEER datasets and diamond-lattice sites.
//! * [`optics`]: FLIM synthesis and two-emitter registration, g2 and GSD formulas.

#![no_std]
#![warn(missing_debug_implementations)]
// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// `is_multiple_of` is newer than the supported toolchain.
#![allow(clippy::manual_is_multiple_of)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod constants;
pub mod dynamics;
mod error;
pub mod linalg;
pub mod locate;
pub mod measure;
pub mod optics;
pub mod reference;
pub mod sequences;
pub mod spincore;

pub use constants::PhysicalConstants;
pub use error::{Error, Result};

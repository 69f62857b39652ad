//! Register density matrices, transition-selective pulses and free evolution.
//!
//! The register basis is the labeled eigenbasis of the pair Hamiltonian: index
//! `3 i_A + i_B` is the eigenstate labeled `|m_A, m_B>`. Pulses act on those labels,
//! and free evolution runs in a frame that rotates with every uncoupled transition,
//! so only the dipolar shifts and explicit detunings remain.

mod evolve;
mod pulse;
mod state;

pub use evolve::{
    dephasing_factor, evolve_free, frame_hamiltonian, t2star_detunings, DecoherenceParams,
};
pub use pulse::{
    apply_pulse, composite_dq_actions, composite_dq_pulse, pulse_unitary, PulseAction, PulseMode,
};
pub use state::{fidelity, initialize_register, population, pure_state, QuantumState};

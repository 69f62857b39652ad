use core::f64::consts::PI;

use nalgebra::Matrix2;

use crate::dynamics::QuantumState;
use crate::linalg::{hermitian_eigen, Mat9, C64};
use crate::spincore::{pair_index, Spin, SpinLevel};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PulseMode {
    /// Instantaneous rotation.
    Ideal,
    /// Rotating-wave drive of finite length; the angle fixes the duration
    /// `angle / (2 pi rabi_frequency)`.
    Rabi { rabi_frequency: f64, detuning: f64 },
}

/// Rotation of one center on one of its transitions. The Pauli matrices act in the
/// ordered basis `(|from>, |to>)`, so the order of the transition only matters for
/// non-zero phase or detuning.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseAction {
    pub target: Spin,
    pub transition: (SpinLevel, SpinLevel),
    pub angle: f64,
    pub phase: f64,
    pub mode: PulseMode,
}

impl PulseAction {
    pub fn new(target: Spin, from: SpinLevel, to: SpinLevel, angle: f64) -> Result<Self> {
        if from == to {
            return Err(Error::invalid("pulse transition levels must differ"));
        }
        if !angle.is_finite() {
            return Err(Error::invalid("pulse angle must be finite"));
        }
        Ok(Self {
            target,
            transition: (from, to),
            angle,
            phase: 0.0,
            mode: PulseMode::Ideal,
        })
    }

    pub fn with_phase(mut self, phase: f64) -> Self {
        self.phase = phase;
        self
    }

    pub fn with_mode(mut self, mode: PulseMode) -> Result<Self> {
        if let PulseMode::Rabi {
            rabi_frequency,
            detuning,
        } = mode
        {
            if !(rabi_frequency > 0.0 && rabi_frequency.is_finite() && detuning.is_finite()) {
                return Err(Error::invalid(
                    "Rabi frequency must be positive and detuning finite",
                ));
            }
        }
        self.mode = mode;
        Ok(self)
    }

    /// Time the pulse occupies on the sequence clock.
    pub fn duration(&self) -> f64 {
        match self.mode {
            PulseMode::Ideal => 0.0,
            PulseMode::Rabi { rabi_frequency, .. } => {
                self.angle.abs() / (2.0 * PI * rabi_frequency)
            }
        }
    }

    /// The 2x2 propagator in the `(|from>, |to>)` basis.
    pub fn two_level_unitary(&self) -> Matrix2<C64> {
        let (c, s) = (libm::cos(self.phase), libm::sin(self.phase));
        // n.sigma with n = (cos phi, sin phi, 0)
        let n_sigma = Matrix2::new(
            C64::new(0.0, 0.0),
            C64::new(c, -s),
            C64::new(c, s),
            C64::new(0.0, 0.0),
        );
        match self.mode {
            PulseMode::Ideal => {
                let half = self.angle / 2.0;
                Matrix2::identity() * C64::new(libm::cos(half), 0.0)
                    - n_sigma * C64::new(0.0, libm::sin(half))
            }
            PulseMode::Rabi {
                rabi_frequency,
                detuning,
            } => {
                let sz = Matrix2::new(
                    C64::new(1.0, 0.0),
                    C64::new(0.0, 0.0),
                    C64::new(0.0, 0.0),
                    C64::new(-1.0, 0.0),
                );
                let h = n_sigma * C64::new(rabi_frequency / 2.0, 0.0)
                    + sz * C64::new(detuning / 2.0, 0.0);
                let t = self.duration();
                let eig =
                    hermitian_eigen(&h).expect("drive Hamiltonian is Hermitian by construction");
                eig.map_spectrum(|f| crate::linalg::phase_factor(f, t))
            }
        }
    }
}

/// The pulse embedded in the register: the two-level rotation on the target's
/// labels for every partner level, identity elsewhere.
pub fn pulse_unitary(action: &PulseAction) -> Mat9 {
    let u2 = action.two_level_unitary();
    let (from, to) = action.transition;
    let mut u = Mat9::identity();
    for partner in SpinLevel::ALL {
        let idx = |m| match action.target {
            Spin::A => pair_index(m, partner),
            Spin::B => pair_index(partner, m),
        };
        let (i, j) = (idx(from), idx(to));
        u[(i, i)] = u2[(0, 0)];
        u[(i, j)] = u2[(0, 1)];
        u[(j, i)] = u2[(1, 0)];
        u[(j, j)] = u2[(1, 1)];
    }
    u
}

pub fn apply_pulse(state: &QuantumState, action: &PulseAction) -> QuantumState {
    state.transformed(&pulse_unitary(action))
}

/// Three ideal π pulses, `-1:0`, `0:+1`, `-1:0`, which exchange `|-1>` and `|+1>` of
/// the target and return `|0>` to itself.
pub fn composite_dq_actions(target: Spin) -> [PulseAction; 3] {
    use SpinLevel::*;
    let pi = |a, b| PulseAction::new(target, a, b, PI).expect("distinct levels");
    [pi(Minus, Zero), pi(Zero, Plus), pi(Minus, Zero)]
}

pub fn composite_dq_pulse(state: &QuantumState, target: Spin) -> QuantumState {
    composite_dq_actions(target)
        .iter()
        .fold(state.clone(), |s, a| apply_pulse(&s, a))
}

//! Spin-1 operators, the two-center Hamiltonian and its labeled eigenlevels.
//!
//! All Hamiltonians are in frequency units (Hz). Each center's spin operators are
//! expressed in its own frame, with `Sz` along the NV axis, so the product basis
//! `|m_A, m_B>` is ordered `|-1,-1>, |-1,0>, ..., |+1,+1>` with index `3 i_A + i_B`.

mod hamiltonian;
mod levels;
mod operators;

pub use hamiltonian::{
    dipolar_hamiltonian, nv_axis, pair_hamiltonian, single_center_hamiltonian, FieldSetting,
    LocalFrame, NVCenter, PairHamiltonian, SpinPairSystem, NV_AXES,
};
pub use levels::{
    deer_frequencies, deer_shift, eigensystem, label_levels, spin_expectation,
    transition_frequency, DeerFrequencies, LabeledLevels,
};
pub use operators::{spin1_operators, SpinOperators};

/// One of the two centers of the register.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Spin {
    A,
    B,
}

impl Spin {
    pub const fn index(self) -> usize {
        match self {
            Spin::A => 0,
            Spin::B => 1,
        }
    }

    pub const fn partner(self) -> Spin {
        match self {
            Spin::A => Spin::B,
            Spin::B => Spin::A,
        }
    }

    pub const fn letter(self) -> char {
        match self {
            Spin::A => 'A',
            Spin::B => 'B',
        }
    }
}

/// Spin projection `m_S` of an S=1 level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SpinLevel {
    Minus,
    Zero,
    Plus,
}

impl SpinLevel {
    pub const ALL: [SpinLevel; 3] = [SpinLevel::Minus, SpinLevel::Zero, SpinLevel::Plus];

    pub const fn m(self) -> i8 {
        match self {
            SpinLevel::Minus => -1,
            SpinLevel::Zero => 0,
            SpinLevel::Plus => 1,
        }
    }

    /// Position in the `(-1, 0, +1)` basis order.
    pub const fn index(self) -> usize {
        match self {
            SpinLevel::Minus => 0,
            SpinLevel::Zero => 1,
            SpinLevel::Plus => 2,
        }
    }

    pub const fn from_index(i: usize) -> SpinLevel {
        match i {
            0 => SpinLevel::Minus,
            1 => SpinLevel::Zero,
            _ => SpinLevel::Plus,
        }
    }

    pub const fn from_m(m: i8) -> Option<SpinLevel> {
        match m {
            -1 => Some(SpinLevel::Minus),
            0 => Some(SpinLevel::Zero),
            1 => Some(SpinLevel::Plus),
            _ => None,
        }
    }
}

/// Index of `|m_A, m_B>` in the 9-dimensional register basis.
pub const fn pair_index(a: SpinLevel, b: SpinLevel) -> usize {
    3 * a.index() + b.index()
}

/// Inverse of [`pair_index`].
pub const fn pair_labels(index: usize) -> (SpinLevel, SpinLevel) {
    (
        SpinLevel::from_index(index / 3),
        SpinLevel::from_index(index % 3),
    )
}

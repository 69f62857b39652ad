use alloc::vec::Vec;

use rand_core::RngCore;
use rand_distr::{Distribution, Normal};

use crate::dynamics::QuantumState;
use crate::linalg::{propagator, Mat9, C64};
use crate::spincore::{pair_labels, LabeledLevels, PairHamiltonian, Spin, SpinLevel};
use crate::{Error, Result};

/// Dephasing channels. `None` disables a channel.
///
/// `t2` is applied by [`evolve_free`]. `t2star` is quasi-static: the sequence engine
/// averages over Gaussian detunings drawn with [`t2star_detunings`].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DecoherenceParams {
    t2: [Option<f64>; 2],
    t2star: [Option<f64>; 2],
}

fn check_time(t: Option<f64>) -> Result<Option<f64>> {
    match t {
        Some(x) if !(x > 0.0) => Err(Error::invalid("dephasing times must be positive")),
        _ => Ok(t),
    }
}

impl DecoherenceParams {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn new(
        t2_a: Option<f64>,
        t2_b: Option<f64>,
        t2star_a: Option<f64>,
        t2star_b: Option<f64>,
    ) -> Result<Self> {
        Ok(Self {
            t2: [check_time(t2_a)?, check_time(t2_b)?],
            t2star: [check_time(t2star_a)?, check_time(t2star_b)?],
        })
    }

    /// Homogeneous dephasing only.
    pub fn t2_only(t2_a: f64, t2_b: f64) -> Result<Self> {
        Self::new(Some(t2_a), Some(t2_b), None, None)
    }

    pub fn t2(&self, spin: Spin) -> Option<f64> {
        self.t2[spin.index()]
    }

    pub fn t2star(&self, spin: Spin) -> Option<f64> {
        self.t2star[spin.index()]
    }

    pub fn has_t2star(&self) -> bool {
        self.t2star.iter().any(Option::is_some)
    }

    pub fn is_disabled(&self) -> bool {
        self.t2
            .iter()
            .chain(self.t2star.iter())
            .all(Option::is_none)
    }
}

/// Damping of the coherence `|i><j|` after time `t`: each spin contributes
/// `exp(-|Δm| t / T2)`, so a double-quantum coherence dephases twice as fast.
pub fn dephasing_factor(i: usize, j: usize, t: f64, dec: &DecoherenceParams) -> f64 {
    let (ai, bi) = pair_labels(i);
    let (aj, bj) = pair_labels(j);
    let rate = |t2: Option<f64>, mi: SpinLevel, mj: SpinLevel| match t2 {
        Some(t2) => f64::from((mi.m() - mj.m()).abs()) / t2,
        None => 0.0,
    };
    let r = rate(dec.t2(Spin::A), ai, aj) + rate(dec.t2(Spin::B), bi, bj);
    if r == 0.0 {
        1.0
    } else {
        libm::exp(-r * t)
    }
}

/// Unitary evolution under `h` for `t` seconds, followed by pure dephasing.
pub fn evolve_free(
    state: &QuantumState,
    h: &PairHamiltonian,
    t: f64,
    dec: &DecoherenceParams,
) -> Result<QuantumState> {
    if !(t >= 0.0) {
        return Err(Error::invalid("evolution time must be non-negative"));
    }
    if t == 0.0 {
        return Ok(state.clone());
    }
    let u = propagator(h.matrix(), t)?;
    let mut rho = u * state.rho() * u.adjoint();
    if dec.t2.iter().any(Option::is_some) {
        for i in 0..9 {
            for j in 0..9 {
                if i != j {
                    rho[(i, j)] *= dephasing_factor(i, j, t, dec);
                }
            }
        }
    }
    Ok(QuantumState::from_raw(rho))
}

/// Free Hamiltonian in the frame co-rotating with every uncoupled transition:
/// `diag(Δ(m_A, m_B) + δ_A m_A + δ_B m_B)` with
/// `Δ(a, b) = E(a, b) - E(a, 0) - E(0, b) + E(0, 0)`.
pub fn frame_hamiltonian(
    levels: &LabeledLevels,
    detuning_a: f64,
    detuning_b: f64,
) -> PairHamiltonian {
    let zero = SpinLevel::Zero;
    let mut m = Mat9::zeros();
    for k in 0..9 {
        let (a, b) = pair_labels(k);
        let shift = levels.energy(a, b) - levels.energy(a, zero) - levels.energy(zero, b)
            + levels.energy(zero, zero);
        let det = detuning_a * f64::from(a.m()) + detuning_b * f64::from(b.m());
        m[(k, k)] = C64::new(shift + det, 0.0);
    }
    PairHamiltonian::from_matrix(m).expect("diagonal real matrix is Hermitian")
}

/// Quasi-static detunings (Hz) whose ensemble average gives a Ramsey envelope
/// `exp(-(t/T2*)^2)`.
pub fn t2star_detunings<R: RngCore + ?Sized>(
    t2star: f64,
    samples: usize,
    rng: &mut R,
) -> Result<Vec<f64>> {
    if !(t2star > 0.0) {
        return Err(Error::invalid("T2* must be positive"));
    }
    let sigma = 1.0 / (core::f64::consts::SQRT_2 * core::f64::consts::PI * t2star);
    let normal = Normal::new(0.0, sigma).map_err(|_| Error::invalid("invalid T2* width"))?;
    Ok((0..samples).map(|_| normal.sample(rng)).collect())
}

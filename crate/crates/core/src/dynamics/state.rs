use crate::linalg::{hermitian_eigen, Mat9, Vec9, C64};
use crate::spincore::{pair_index, Spin, SpinLevel};
use crate::{Error, Result};

/// 9x9 density matrix of the register.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState {
    rho: Mat9,
}

impl QuantumState {
    /// Accepts any matrix that is Hermitian with unit trace. Positivity is the
    /// caller's responsibility; see [`QuantumState::min_eigenvalue`].
    pub fn from_density_matrix(rho: Mat9) -> Result<Self> {
        crate::linalg::check_hermitian(&rho, 1e-9)?;
        let tr = rho.trace();
        if (tr - C64::new(1.0, 0.0)).norm() > 1e-9 {
            return Err(Error::invalid("density matrix must have unit trace"));
        }
        Ok(Self { rho })
    }

    pub(crate) fn from_raw(rho: Mat9) -> Self {
        Self { rho }
    }

    pub fn rho(&self) -> &Mat9 {
        &self.rho
    }

    pub fn trace(&self) -> C64 {
        self.rho.trace()
    }

    pub fn purity(&self) -> f64 {
        (self.rho * self.rho).trace().re
    }

    pub fn min_eigenvalue(&self) -> f64 {
        hermitian_eigen(&self.rho)
            .map(|e| e.values[0])
            .unwrap_or(f64::NAN)
    }

    /// `U rho U†`.
    pub fn transformed(&self, u: &Mat9) -> Self {
        Self {
            rho: u * self.rho * u.adjoint(),
        }
    }
}

pub fn pure_state(amplitudes: &Vec9) -> Result<QuantumState> {
    let n = amplitudes.norm();
    if !(n > 0.0 && n.is_finite()) {
        return Err(Error::invalid(
            "state vector must have finite non-zero norm",
        ));
    }
    let psi = amplitudes / C64::new(n, 0.0);
    Ok(QuantumState {
        rho: psi * psi.adjoint(),
    })
}

/// Product of per-spin states `diag((1-p0)/2, p0, (1-p0)/2)`.
pub fn initialize_register(p0_a: f64, p0_b: f64) -> Result<QuantumState> {
    for p in [p0_a, p0_b] {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::invalid(
                "initialization probability must lie in [0, 1]",
            ));
        }
    }
    let single = |p: f64| [(1.0 - p) / 2.0, p, (1.0 - p) / 2.0];
    let (a, b) = (single(p0_a), single(p0_b));
    let mut rho = Mat9::zeros();
    for ia in 0..3 {
        for ib in 0..3 {
            rho[(3 * ia + ib, 3 * ia + ib)] = C64::new(a[ia] * b[ib], 0.0);
        }
    }
    Ok(QuantumState { rho })
}

/// `<psi| rho |psi>` for a pure target, normalized here.
pub fn fidelity(state: &QuantumState, target: &Vec9) -> f64 {
    let n2 = target.norm_squared();
    let v = state.rho * target;
    (target.dotc(&v).re / n2).clamp(0.0, 1.0)
}

/// Probability of finding `spin` in `m`.
pub fn population(state: &QuantumState, spin: Spin, m: SpinLevel) -> f64 {
    SpinLevel::ALL
        .iter()
        .map(|&p| {
            let i = match spin {
                Spin::A => pair_index(m, p),
                Spin::B => pair_index(p, m),
            };
            state.rho[(i, i)].re
        })
        .sum()
}

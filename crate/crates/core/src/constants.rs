//! Physical constants (CODATA 2018 exact/recommended values).

use core::f64::consts::PI;

/// Immutable set of constants used by the Hamiltonian and the Coulomb estimate.
///
/// The gyromagnetic ratio is derived from the other fields at construction, so it is
/// always `g_e * mu_b / h`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    mu0: f64,
    mu_b: f64,
    g_e: f64,
    h: f64,
    gamma_e: f64,
    eps0: f64,
    elementary_charge: f64,
    eps_r_diamond: f64,
}

impl PhysicalConstants {
    /// NV ground-state electron g-factor.
    pub const NV_G_FACTOR: f64 = 2.0028;

    pub const CODATA: Self = Self::new(
        1.256_637_062_12e-6,
        9.274_010_078_3e-24,
        Self::NV_G_FACTOR,
        6.626_070_15e-34,
        8.854_187_812_8e-12,
        1.602_176_634e-19,
        5.7,
    );

    pub const fn new(
        mu0: f64,
        mu_b: f64,
        g_e: f64,
        h: f64,
        eps0: f64,
        elementary_charge: f64,
        eps_r_diamond: f64,
    ) -> Self {
        Self {
            mu0,
            mu_b,
            g_e,
            h,
            gamma_e: g_e * mu_b / h,
            eps0,
            elementary_charge,
            eps_r_diamond,
        }
    }

    pub const fn with_g_factor(self, g_e: f64) -> Self {
        Self::new(
            self.mu0,
            self.mu_b,
            g_e,
            self.h,
            self.eps0,
            self.elementary_charge,
            self.eps_r_diamond,
        )
    }

    pub const fn with_eps_r(self, eps_r: f64) -> Self {
        Self::new(
            self.mu0,
            self.mu_b,
            self.g_e,
            self.h,
            self.eps0,
            self.elementary_charge,
            eps_r,
        )
    }

    pub const fn mu0(&self) -> f64 {
        self.mu0
    }
    pub const fn mu_b(&self) -> f64 {
        self.mu_b
    }
    pub const fn g_e(&self) -> f64 {
        self.g_e
    }
    pub const fn h(&self) -> f64 {
        self.h
    }
    /// Gyromagnetic ratio in Hz/T.
    pub const fn gamma_e(&self) -> f64 {
        self.gamma_e
    }
    pub const fn eps0(&self) -> f64 {
        self.eps0
    }
    pub const fn elementary_charge(&self) -> f64 {
        self.elementary_charge
    }
    pub const fn eps_r_diamond(&self) -> f64 {
        self.eps_r_diamond
    }

    /// Point-dipole coupling constant `mu0 g^2 muB^2 / (4 pi r^3 h)` in Hz.
    pub fn dipolar_prefactor(&self, r: f64) -> f64 {
        self.mu0 * self.g_e * self.g_e * self.mu_b * self.mu_b / (4.0 * PI * r * r * r * self.h)
    }
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self::CODATA
    }
}

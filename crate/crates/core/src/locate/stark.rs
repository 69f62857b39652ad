//! Electric field of a single elementary charge at the partner and the resulting
//! bound on the transverse zero-field splitting.

use core::f64::consts::PI;
use core::fmt;

use crate::linalg::Vector3;
use crate::{Error, PhysicalConstants, Result};

/// Transverse splitting per perpendicular field, Hz per V/m (0.17 MHz per MV/m).
pub const STARK_COEFFICIENT: f64 = 0.17;

/// `e / (4 pi eps0 eps_r r^2)` in V/m.
pub fn coulomb_field(r: f64, constants: &PhysicalConstants) -> Result<f64> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::invalid("distance must be positive"));
    }
    Ok(constants.elementary_charge()
        / (4.0 * PI * constants.eps0() * constants.eps_r_diamond() * r * r))
}

/// Field vector at `displacement` from a positive charge at the origin.
pub fn coulomb_field_vector(
    displacement: &Vector3,
    constants: &PhysicalConstants,
) -> Result<Vector3> {
    let r = displacement.norm();
    Ok(displacement / r * coulomb_field(r, constants)?)
}

/// Magnitude of the part of `field` perpendicular to `axis`.
pub fn perpendicular_component(field: &Vector3, axis: &Vector3) -> f64 {
    let n = axis.normalize();
    (field - n * field.dot(&n)).norm()
}

/// Splitting (Hz) induced by a perpendicular field (V/m).
pub fn stark_splitting(e_perp: f64) -> Result<f64> {
    if !(e_perp >= 0.0) {
        return Err(Error::invalid("perpendicular field must be non-negative"));
    }
    Ok(STARK_COEFFICIENT * e_perp)
}

/// Comparison of measured strain splittings with the largest splitting a single
/// charge on the partner could cause.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StarkAssessment {
    pub distance: f64,
    pub field: f64,
    /// Splitting for the full field perpendicular to the axis.
    pub bound: f64,
    /// Splittings attributed to the charge for each center, from projected fields.
    pub projected: [f64; 2],
    pub measured: [f64; 2],
}

impl StarkAssessment {
    pub fn new(
        distance: f64,
        projected: [f64; 2],
        measured: [f64; 2],
        constants: &PhysicalConstants,
    ) -> Result<Self> {
        let field = coulomb_field(distance, constants)?;
        Ok(Self {
            distance,
            field,
            bound: stark_splitting(field)?,
            projected,
            measured,
        })
    }

    /// `measured / bound` per center.
    pub fn excess(&self) -> [f64; 2] {
        self.measured.map(|m| m / self.bound)
    }

    /// Projected splittings stay within the bound and the measured ones exceed it.
    pub fn charge_insufficient(&self) -> bool {
        self.projected.iter().all(|&p| p <= self.bound)
            && self.measured.iter().all(|&m| m > self.bound)
    }
}

impl fmt::Display for StarkAssessment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [ea, eb] = self.excess();
        writeln!(
            f,
            "charge at {:.2} nm: field {:.3} MV/m, splitting bound {:.3} MHz",
            self.distance * 1e9,
            self.field * 1e-6,
            self.bound * 1e-6
        )?;
        writeln!(
            f,
            "projected: A {:.3} MHz, B {:.3} MHz (<= bound: {})",
            self.projected[0] * 1e-6,
            self.projected[1] * 1e-6,
            self.projected.iter().all(|&p| p <= self.bound)
        )?;
        write!(
            f,
            "measured: A {:.2} MHz, B {:.2} MHz, {:.1}x and {:.1}x the bound; {}",
            self.measured[0] * 1e-6,
            self.measured[1] * 1e-6,
            ea,
            eb,
            if self.charge_insufficient() {
                "a single charge cannot explain the measured splittings"
            } else {
                "a single charge could explain the measured splittings"
            }
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn field_scaling() {
        let k = PhysicalConstants::CODATA;
        let e1 = coulomb_field(9.8e-9, &k).unwrap();
        let e2 = coulomb_field(19.6e-9, &k).unwrap();
        assert!((e1 / e2 - 4.0).abs() < 1e-12);
        // 1.44 V nm / (5.7 (9.8 nm)^2)
        assert!((e1 / (1.44 / (5.7 * 9.8 * 9.8) * 1e9) - 1.0).abs() < 2e-3);
        assert!(coulomb_field(0.0, &k).is_err());
    }

    #[test]
    fn perpendicular_projection() {
        let f = Vector3::new(1.0, 1.0, 0.0);
        assert!((perpendicular_component(&f, &Vector3::z()) - 2f64.sqrt()).abs() < 1e-15);
        assert!(perpendicular_component(&f, &f).abs() < 1e-15);
    }
}

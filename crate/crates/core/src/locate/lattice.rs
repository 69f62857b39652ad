//! Diamond lattice: fcc with a two-atom basis `(0,0,0)` and `(1/4,1/4,1/4) a`,
//! cube axes along the lab axes, spin A on the origin site.

use alloc::vec::Vec;

use nalgebra::Matrix3;

use crate::linalg::Vector3;
use crate::{Error, Result};

/// Meters.
pub const DIAMOND_LATTICE_CONSTANT: f64 = 0.3567e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticeSite {
    /// Coefficients of the primitive vectors `a/2 (0,1,1)`, `a/2 (1,0,1)`, `a/2 (1,1,0)`.
    pub index: [i32; 3],
    /// 0 or 1.
    pub basis: u8,
    /// Meters.
    pub position: Vector3,
    /// Distance from the ellipsoid center in units of the ellipsoid scale.
    pub mahalanobis: f64,
}

impl LatticeSite {
    pub fn position_of(index: [i32; 3], basis: u8) -> Vector3 {
        let h = DIAMOND_LATTICE_CONSTANT / 2.0;
        let [n1, n2, n3] = index.map(f64::from);
        let q = f64::from(basis) * DIAMOND_LATTICE_CONSTANT / 4.0;
        Vector3::new(h * (n2 + n3) + q, h * (n1 + n3) + q, h * (n1 + n2) + q)
    }
}

/// Real-valued primitive coefficients of a point.
fn fractional(p: &Vector3) -> [f64; 3] {
    let s = 2.0 / DIAMOND_LATTICE_CONSTANT;
    let (x, y, z) = (p.x * s, p.y * s, p.z * s);
    [(-x + y + z) / 2.0, (x - y + z) / 2.0, (x + y - z) / 2.0]
}

/// Lattice sites inside `(p - c)^T Σ^-1 (p - c) <= scale^2`, nearest first.
pub fn enumerate_sites(
    center: &Vector3,
    covariance: &Matrix3<f64>,
    scale: f64,
) -> Result<Vec<LatticeSite>> {
    if !(scale > 0.0) || covariance.iter().any(|v| !v.is_finite()) {
        return Err(Error::DegenerateEllipsoid);
    }
    let sym = (covariance + covariance.transpose()) * 0.5;
    let chol = sym.cholesky().ok_or(Error::DegenerateEllipsoid)?;
    let inv = chol.inverse();
    // bounding box of the ellipsoid, then its image in primitive coordinates
    let half = Vector3::new(sym[(0, 0)].sqrt(), sym[(1, 1)].sqrt(), sym[(2, 2)].sqrt()) * scale;
    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for corner in 0..8 {
        let sign = |bit: usize| if corner & (1 << bit) == 0 { -1.0 } else { 1.0 };
        let p = center + Vector3::new(sign(0) * half.x, sign(1) * half.y, sign(2) * half.z);
        for (k, f) in fractional(&p).iter().enumerate() {
            lo[k] = lo[k].min(*f);
            hi[k] = hi[k].max(*f);
        }
    }
    let mut out = Vec::new();
    let range = |k: usize| (libm::floor(lo[k]) as i32 - 1)..=(libm::ceil(hi[k]) as i32 + 1);
    for n1 in range(0) {
        for n2 in range(1) {
            for n3 in range(2) {
                for basis in 0..2u8 {
                    let position = LatticeSite::position_of([n1, n2, n3], basis);
                    let d = position - center;
                    let m2 = (d.transpose() * inv * d)[(0, 0)];
                    if m2 <= scale * scale {
                        out.push(LatticeSite {
                            index: [n1, n2, n3],
                            basis,
                            position,
                            mahalanobis: m2.sqrt(),
                        });
                    }
                }
            }
        }
    }
    out.sort_by(|a, b| a.mahalanobis.total_cmp(&b.mahalanobis));
    Ok(out)
}

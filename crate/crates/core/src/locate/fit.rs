//! Damped Gauss-Newton fit of the displacement of B.
//!
//! The parameters are the three Cartesian components of the displacement in nm.
//! Since the dipolar Hamiltonian is unchanged under `r -> -r`, every minimum has a
//! mirror image with identical chi-square; only one start of each antipodal pair of
//! the 26 cube directions is run and the mirror is added afterwards.

use alloc::vec::Vec;

use nalgebra::{Matrix3, Vector3 as V3};

use crate::linalg::Vector3;
use crate::locate::dataset::DeerDataset;
use crate::spincore::{deer_frequencies, nv_axis, FieldSetting, NVCenter, SpinPairSystem};
use crate::{Error, PhysicalConstants, Result};

const NM: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct FitOptions {
    pub constants: PhysicalConstants,
    /// A's orientation is fixed by the alignment-field convention.
    pub center_a: NVCenter,
    /// Orientations tried for B.
    pub b_candidates: Vec<NVCenter>,
    pub max_iterations: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            constants: PhysicalConstants::CODATA,
            center_a: NVCenter::along(nv_axis(0)).expect("unit axis"),
            b_candidates: (0..4)
                .map(|k| NVCenter::along(nv_axis(k)).expect("unit axis"))
                .collect(),
            max_iterations: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeometryEstimate {
    /// From A to B, meters.
    pub displacement: Vector3,
    /// Meters squared.
    pub covariance: Matrix3<f64>,
    pub center_b: NVCenter,
    /// Index into [`FitOptions::b_candidates`].
    pub assignment: usize,
    pub chi_square: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl GeometryEstimate {
    pub fn distance(&self) -> f64 {
        self.displacement.norm()
    }

    /// Separation projected on the surface plane.
    pub fn lateral(&self) -> f64 {
        libm::hypot(self.displacement.x, self.displacement.y)
    }

    /// 1σ uncertainties of x, y, z in meters.
    pub fn sigma(&self) -> Vector3 {
        Vector3::new(
            libm::sqrt(self.covariance[(0, 0)].max(0.0)),
            libm::sqrt(self.covariance[(1, 1)].max(0.0)),
            libm::sqrt(self.covariance[(2, 2)].max(0.0)),
        )
    }

    pub fn mirrored(&self) -> Self {
        Self {
            displacement: -self.displacement,
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeometryFit {
    pub best: GeometryEstimate,
    /// Distinct minima of the best assignment, ascending chi-square; always contains
    /// the mirror image of `best`.
    pub minima: Vec<GeometryEstimate>,
    /// Best chi-square reached with each B candidate (infinite if none converged).
    pub assignment_chi_square: Vec<f64>,
}

impl GeometryFit {
    /// Chi-square gap between the best and the runner-up assignment.
    pub fn assignment_margin(&self) -> f64 {
        let mut v = self.assignment_chi_square.clone();
        v.sort_by(f64::total_cmp);
        match v.as_slice() {
            [a, b, ..] => b - a,
            _ => f64::INFINITY,
        }
    }
}

/// `(x, chi2, jtj, iterations, converged)` from one minimization.
type Minimum = (V3<f64>, f64, Matrix3<f64>, usize, bool);

struct Problem<'a> {
    dataset: &'a DeerDataset,
    fields: Vec<FieldSetting>,
    field_of: Vec<usize>,
    center_a: NVCenter,
    center_b: NVCenter,
    constants: &'a PhysicalConstants,
}

impl Problem<'_> {
    /// Weighted residuals at displacement `x` (nm), or `None` where the forward model
    /// is undefined.
    fn residuals(&self, x: &V3<f64>) -> Option<Vec<f64>> {
        if x.norm() < 0.3 {
            return None;
        }
        let system = SpinPairSystem::new(self.center_a, self.center_b, x * NM).ok()?;
        let freqs: Vec<_> = self
            .fields
            .iter()
            .map(|f| deer_frequencies(&system, f, self.constants).ok())
            .collect::<Option<_>>()?;
        Some(
            self.dataset
                .entries()
                .iter()
                .zip(&self.field_of)
                .map(|(e, &i)| (e.observable.of(&freqs[i]) - e.value) / e.sigma)
                .collect(),
        )
    }

    fn jacobian(&self, x: &V3<f64>) -> Option<Vec<[f64; 3]>> {
        let h = 1e-3 * x.norm();
        let mut jac = alloc::vec![[0.0; 3]; self.dataset.len()];
        for k in 0..3 {
            let mut plus = *x;
            let mut minus = *x;
            plus[k] += h;
            minus[k] -= h;
            let rp = self.residuals(&plus)?;
            let rm = self.residuals(&minus)?;
            for (row, (a, b)) in jac.iter_mut().zip(rp.iter().zip(&rm)) {
                row[k] = (a - b) / (2.0 * h);
            }
        }
        Some(jac)
    }

    fn normal_equations(jac: &[[f64; 3]], r: &[f64]) -> (Matrix3<f64>, V3<f64>) {
        let mut jtj = Matrix3::zeros();
        let mut jtr = V3::zeros();
        for (row, &ri) in jac.iter().zip(r) {
            let g = V3::new(row[0], row[1], row[2]);
            jtj += g * g.transpose();
            jtr += g * ri;
        }
        (jtj, jtr)
    }

    /// Levenberg-Marquardt from `x0`.
    fn minimize(&self, x0: V3<f64>, max_iterations: usize) -> Option<Minimum> {
        let chi2 = |r: &[f64]| r.iter().map(|v| v * v).sum::<f64>();
        let mut x = x0;
        let mut r = self.residuals(&x)?;
        let mut cost = chi2(&r);
        let mut lambda = 1e-3;
        let mut converged = false;
        let mut iterations = 0;
        while iterations < max_iterations {
            iterations += 1;
            let jac = self.jacobian(&x)?;
            let (jtj, jtr) = Self::normal_equations(&jac, &r);
            let mut improved = false;
            while lambda < 1e12 {
                let mut a = jtj;
                for i in 0..3 {
                    a[(i, i)] += lambda * jtj[(i, i)].max(1e-12);
                }
                let Some(step) = a.cholesky().map(|c| c.solve(&(-jtr))) else {
                    lambda *= 4.0;
                    continue;
                };
                let trial = x + step;
                match self.residuals(&trial) {
                    Some(rt) if chi2(&rt) < cost => {
                        let new_cost = chi2(&rt);
                        let small_step = step.norm() < 1e-9 * (1.0 + x.norm());
                        let small_gain = cost - new_cost <= 1e-12 * cost;
                        x = trial;
                        r = rt;
                        cost = new_cost;
                        lambda = (lambda / 3.0).max(1e-9);
                        improved = true;
                        if small_step || small_gain || cost < 1e-24 {
                            converged = true;
                        }
                        break;
                    }
                    _ => lambda *= 4.0,
                }
            }
            if !improved {
                // no descent direction left at machine precision: a minimum
                converged = true;
            }
            if converged {
                break;
            }
        }
        let jac = self.jacobian(&x)?;
        let (jtj, _) = Self::normal_equations(&jac, &r);
        Some((x, cost, jtj, iterations, converged))
    }
}

/// Half of the 26 directions of the unit cube, one of each antipodal pair.
fn start_directions() -> Vec<V3<f64>> {
    let mut out = Vec::new();
    for i in -1i32..=1 {
        for j in -1i32..=1 {
            for k in -1i32..=1 {
                let v = (i, j, k);
                if v == (0, 0, 0) {
                    continue;
                }
                // keep the member whose first non-zero component is positive
                let first = if i != 0 {
                    i
                } else if j != 0 {
                    j
                } else {
                    k
                };
                if first > 0 {
                    out.push(V3::new(f64::from(i), f64::from(j), f64::from(k)).normalize());
                }
            }
        }
    }
    out
}

/// Radius (nm) at which a point dipole pair has the mean coupling of the dataset.
fn start_radius(dataset: &DeerDataset, constants: &PhysicalConstants) -> f64 {
    use crate::locate::Observable;
    let mean = dataset
        .entries()
        .iter()
        .map(|e| match e.observable {
            Observable::Sum => e.value.abs() / 2.0,
            _ => e.value.abs(),
        })
        .sum::<f64>()
        / dataset.len() as f64;
    let c = constants.dipolar_prefactor(1.0);
    if mean > 0.0 {
        libm::cbrt(c / mean) / NM
    } else {
        10.0
    }
}

/// Fits the displacement of B for every candidate orientation of B and keeps the
/// lowest chi-square.
pub fn fit_geometry(dataset: &DeerDataset, options: &FitOptions) -> Result<GeometryFit> {
    const PARAMETERS: usize = 3;
    if dataset.len() < PARAMETERS + 1 {
        return Err(Error::InsufficientData {
            found: dataset.len(),
            required: PARAMETERS + 1,
        });
    }
    let (fields, field_of) = dataset.field_groups();
    let r0 = start_radius(dataset, &options.constants);

    let mut all: Vec<GeometryEstimate> = Vec::new();
    let mut assignment_chi_square = alloc::vec![f64::INFINITY; options.b_candidates.len()];
    let mut best_seen = f64::INFINITY;
    for (assignment, center_b) in options.b_candidates.iter().enumerate() {
        let problem = Problem {
            dataset,
            fields: fields.clone(),
            field_of: field_of.clone(),
            center_a: options.center_a,
            center_b: *center_b,
            constants: &options.constants,
        };
        for dir in start_directions() {
            let Some((x, chi2, jtj, iterations, converged)) =
                problem.minimize(dir * r0, options.max_iterations)
            else {
                continue;
            };
            best_seen = best_seen.min(chi2);
            if !converged {
                continue;
            }
            let covariance = jtj
                .try_inverse()
                .unwrap_or_else(|| Matrix3::from_element(f64::INFINITY))
                * (NM * NM);
            assignment_chi_square[assignment] = assignment_chi_square[assignment].min(chi2);
            all.push(GeometryEstimate {
                displacement: Vector3::new(x.x, x.y, x.z) * NM,
                covariance,
                center_b: *center_b,
                assignment,
                chi_square: chi2,
                iterations,
                converged,
            });
        }
    }

    let best = all
        .iter()
        .min_by(|a, b| a.chi_square.total_cmp(&b.chi_square))
        .cloned()
        .ok_or(Error::NoConvergence {
            best_chi_square: best_seen,
        })?;

    let mut minima: Vec<GeometryEstimate> = Vec::new();
    let mut candidates: Vec<GeometryEstimate> = all
        .iter()
        .filter(|e| e.assignment == best.assignment)
        .cloned()
        .collect();
    let mirrors: Vec<GeometryEstimate> =
        candidates.iter().map(GeometryEstimate::mirrored).collect();
    candidates.extend(mirrors);
    candidates.sort_by(|a, b| a.chi_square.total_cmp(&b.chi_square));
    for c in candidates {
        if minima
            .iter()
            .all(|m| (m.displacement - c.displacement).norm() > 0.05 * NM)
        {
            minima.push(c);
        }
    }
    Ok(GeometryFit {
        best,
        minima,
        assignment_chi_square,
    })
}

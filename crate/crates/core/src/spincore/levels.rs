//! Eigenstate labeling.
//!
//! Every eigenvector of the pair Hamiltonian is matched to the product of the two
//! uncoupled single-center eigenstates with which it has the largest overlap. The
//! single-center states are themselves labeled by their dominant `m` component, or
//! by energy order inside the `|±1>` manifold when strain mixes it completely.

use crate::linalg::{hermitian_eigen, Eigensystem, Mat3, Mat9, Vec9, Vector3, C64};
use crate::spincore::hamiltonian::{
    pair_hamiltonian, FieldSetting, PairHamiltonian, SpinPairSystem,
};
use crate::spincore::operators::spin1_operators;
use crate::spincore::{pair_index, Spin, SpinLevel};
use crate::{Error, PhysicalConstants, Result};

/// Minimum squared overlap for a label to be accepted.
const LABEL_THRESHOLD: f64 = 0.5;

/// Eigenvalues and eigenvectors of a Hermitian register Hamiltonian, ascending.
pub fn eigensystem(h: &PairHamiltonian) -> Result<Eigensystem<9>> {
    hermitian_eigen(h.matrix())
}

/// Eigenlevels indexed by their `|m_A, m_B>` label.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledLevels {
    energies: [f64; 9],
    vectors: Mat9,
    overlaps: [f64; 9],
    single_splitting: [f64; 2],
}

impl LabeledLevels {
    pub fn energy(&self, a: SpinLevel, b: SpinLevel) -> f64 {
        self.energies[pair_index(a, b)]
    }

    /// Energies in product-basis order.
    pub fn energies(&self) -> &[f64; 9] {
        &self.energies
    }

    /// Column `pair_index(a, b)` is the eigenvector labeled `|a, b>`, phased so that
    /// its component on the reference product state is real and positive.
    pub fn vectors(&self) -> &Mat9 {
        &self.vectors
    }

    pub fn vector(&self, a: SpinLevel, b: SpinLevel) -> Vec9 {
        self.vectors.column(pair_index(a, b)).into_owned()
    }

    /// Squared overlap of each labeled eigenvector with its reference product state.
    pub fn overlaps(&self) -> &[f64; 9] {
        &self.overlaps
    }

    /// Gap between the uncoupled `|+1>`-like and `|-1>`-like levels of one center.
    pub fn single_splitting(&self, spin: Spin) -> f64 {
        self.single_splitting[spin.index()]
    }

    /// Energy of `spin` in `m` with the partner in `partner`.
    pub fn energy_of(&self, spin: Spin, m: SpinLevel, partner: SpinLevel) -> f64 {
        match spin {
            Spin::A => self.energy(m, partner),
            Spin::B => self.energy(partner, m),
        }
    }
}

struct SingleLabels {
    energies: [f64; 3],
    vectors: Mat3,
}

fn label_single(h: &Mat3) -> Result<SingleLabels> {
    let eig = hermitian_eigen(h)?;
    let mut slot: [Option<usize>; 3] = [None; 3];
    let mut unassigned = alloc::vec::Vec::new();
    for k in 0..3 {
        let (best, weight) = (0..3)
            .map(|m| (m, eig.vectors[(m, k)].norm_sqr()))
            .fold((0, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if weight > LABEL_THRESHOLD && slot[best].is_none() {
            slot[best] = Some(k);
        } else {
            unassigned.push(k);
        }
    }
    // strain-mixed |±1> manifold: the lower level takes the -1 label
    let mut free: alloc::vec::Vec<usize> = (0..3).filter(|&m| slot[m].is_none()).collect();
    if free.contains(&1) {
        let k = unassigned.first().copied().unwrap_or(0);
        return Err(Error::Labeling {
            index: k,
            overlap: eig.vectors[(1, k)].norm_sqr(),
        });
    }
    unassigned.sort_by(|&x, &y| eig.values[x].total_cmp(&eig.values[y]));
    free.sort();
    for (m, k) in free.into_iter().zip(unassigned) {
        slot[m] = Some(k);
    }

    let mut energies = [0.0; 3];
    let mut vectors = Mat3::zeros();
    for m in 0..3 {
        let k = slot[m].expect("all three levels assigned");
        energies[m] = eig.values[k];
        let col = eig.vectors.column(k);
        let pivot = (0..3)
            .max_by(|&x, &y| col[x].norm_sqr().total_cmp(&col[y].norm_sqr()))
            .unwrap();
        let phase = col[pivot].conj() / col[pivot].norm();
        vectors.set_column(m, &(col * phase));
    }
    Ok(SingleLabels { energies, vectors })
}

/// Diagonalizes `h` and attaches `|m_A, m_B>` labels to its eigenvectors.
pub fn label_levels(h: &PairHamiltonian) -> Result<LabeledLevels> {
    let sa = label_single(h.single(Spin::A))?;
    let sb = label_single(h.single(Spin::B))?;
    let eig = eigensystem(h)?;

    let mut reference = Mat9::zeros();
    for ia in 0..3 {
        for ib in 0..3 {
            for ja in 0..3 {
                for jb in 0..3 {
                    reference[(3 * ja + jb, 3 * ia + ib)] =
                        sa.vectors[(ja, ia)] * sb.vectors[(jb, ib)];
                }
            }
        }
    }
    // projections[(label, k)] = <ref_label | psi_k>
    let projections = reference.adjoint() * eig.vectors;

    let mut energies = [0.0; 9];
    let mut vectors = Mat9::zeros();
    let mut overlaps = [0.0; 9];
    let mut taken = [false; 9];
    for k in 0..9 {
        let (label, weight) = (0..9)
            .map(|l| (l, projections[(l, k)].norm_sqr()))
            .fold((0, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if weight <= LABEL_THRESHOLD || taken[label] {
            return Err(Error::Labeling {
                index: k,
                overlap: weight,
            });
        }
        taken[label] = true;
        let p = projections[(label, k)];
        let phase = p.conj() / p.norm();
        energies[label] = eig.values[k];
        vectors.set_column(label, &(eig.vectors.column(k) * phase));
        overlaps[label] = weight;
    }
    Ok(LabeledLevels {
        energies,
        vectors,
        overlaps,
        single_splitting: [
            (sa.energies[2] - sa.energies[0]).abs(),
            (sb.energies[2] - sb.energies[0]).abs(),
        ],
    })
}

/// Frequency of `spin`'s `m_from <-> m_to` line with the partner in `partner`.
pub fn transition_frequency(
    levels: &LabeledLevels,
    spin: Spin,
    m_from: SpinLevel,
    m_to: SpinLevel,
    partner: SpinLevel,
) -> f64 {
    (levels.energy_of(spin, m_to, partner) - levels.energy_of(spin, m_from, partner)).abs()
}

/// Signed change of `spin`'s `from -> to` transition frequency when the partner is
/// flipped `partner_from -> partner_to`.
pub fn deer_shift(
    levels: &LabeledLevels,
    spin: Spin,
    (from, to): (SpinLevel, SpinLevel),
    (partner_from, partner_to): (SpinLevel, SpinLevel),
) -> f64 {
    let line = |p| levels.energy_of(spin, to, p) - levels.energy_of(spin, from, p);
    line(partner_to) - line(partner_from)
}

/// Dipolar shifts of A's `|0> <-> |-1>` line when B leaves `|0>`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeerFrequencies {
    /// Signed shift for B flipped to `|-1>`.
    pub shift_minus: f64,
    /// Signed shift for B flipped to `|+1>`.
    pub shift_plus: f64,
}

impl DeerFrequencies {
    pub fn dnu1(&self) -> f64 {
        self.shift_minus.abs()
    }

    pub fn dnu2(&self) -> f64 {
        self.shift_plus.abs()
    }

    pub fn sum(&self) -> f64 {
        self.dnu1() + self.dnu2()
    }

    /// Shift for a direct `|-1> -> |+1>` flip of B. Equals [`Self::sum`] whenever the
    /// two single-quantum shifts have opposite sign, which holds in the weak-coupling
    /// regime.
    pub fn double_quantum(&self) -> f64 {
        (self.shift_plus - self.shift_minus).abs()
    }

    pub fn from_levels(levels: &LabeledLevels) -> Self {
        use SpinLevel::*;
        Self {
            shift_minus: deer_shift(levels, Spin::A, (Zero, Minus), (Zero, Minus)),
            shift_plus: deer_shift(levels, Spin::A, (Zero, Minus), (Zero, Plus)),
        }
    }
}

/// `(Δν1, Δν2)` of the pair at the given field. Rejected when either center has
/// degenerate `|±1>` levels, since B's `|-1>` and `|+1>` are then not distinguishable.
pub fn deer_frequencies(
    system: &SpinPairSystem,
    field: &FieldSetting,
    constants: &PhysicalConstants,
) -> Result<DeerFrequencies> {
    let h = pair_hamiltonian(system, field, constants)?;
    let levels = label_levels(&h)?;
    for spin in [Spin::A, Spin::B] {
        if levels.single_splitting(spin) <= 1e-12 * system.center(spin).d() {
            return Err(Error::DegenerateLevels {
                center: spin.letter(),
            });
        }
    }
    Ok(DeerFrequencies::from_levels(&levels))
}

/// Lab-frame `<S>` of one center for a register state given in the product `m` basis.
pub fn spin_expectation(h: &PairHamiltonian, state: &Vec9, spin: Spin) -> Vector3 {
    let s = spin1_operators();
    let norm = state.norm_squared();
    let mut local = [0.0; 3];
    for (slot, op) in local.iter_mut().zip([s.x, s.y, s.z]) {
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..9 {
            for j in 0..9 {
                let (ia, ib, ja, jb) = (i / 3, i % 3, j / 3, j % 3);
                let elem = match spin {
                    Spin::A if ib == jb => op[(ia, ja)],
                    Spin::B if ia == ja => op[(ib, jb)],
                    _ => continue,
                };
                acc += state[i].conj() * elem * state[j];
            }
        }
        *slot = acc.re / norm;
    }
    h.frame(spin).to_lab(&Vector3::from(local))
}

//! Helpers shared by several test targets. Each target uses a different subset.
#![allow(dead_code)]

pub mod strategies;

use nvreg_core::linalg::{Vec9, Vector3, C64};
use nvreg_core::locate::{predict_dataset, DeerDataset, DeerEntry, Observable};
use nvreg_core::reference;
use nvreg_core::sequences::Experiment;
use nvreg_core::spincore::{pair_index, FieldSetting, SpinLevel};
use nvreg_core::PhysicalConstants;
use rand_chacha::rand_core::SeedableRng;
use rand_distr::{Distribution, Normal};

pub fn experiment() -> Experiment {
    Experiment::new(reference::system(), reference::field())
}

pub fn ket(amps: &[(SpinLevel, SpinLevel, C64)]) -> Vec9 {
    let mut v = Vec9::zeros();
    for &(a, b, z) in amps {
        v[pair_index(a, b)] = z;
    }
    v
}

/// Five field magnitudes along A spanning ±50% around 6 mT plus one direction off
/// every mirror plane of the A axis.
pub fn fields() -> Vec<FieldSetting> {
    let mut f: Vec<FieldSetting> = [3e-3, 4.5e-3, 6e-3, 7.5e-3, 9e-3]
        .iter()
        .map(|&b| reference::aligned_field(b))
        .collect();
    f.push(FieldSetting::along(&Vector3::new(0.3, -0.8, 0.5), 6e-3).unwrap());
    f
}

/// Δν1 and Δν2 of the reference register at every design field, with relative
/// Gaussian noise.
pub fn synthetic(noise: f64, seed: u64) -> DeerDataset {
    let k = PhysicalConstants::CODATA;
    let mut entries = Vec::new();
    for field in fields() {
        for observable in [Observable::Dnu1, Observable::Dnu2] {
            entries.push(DeerEntry {
                field,
                observable,
                value: 0.0,
                sigma: 1.0,
            });
        }
    }
    let clean = DeerDataset::new(entries.clone()).unwrap();
    let values = predict_dataset(&reference::system(), &clean, &k);
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let unit = Normal::new(0.0, 1.0).unwrap();
    for (e, v) in entries.iter_mut().zip(values) {
        let v = v.unwrap();
        let sigma = (noise * v).max(1.0);
        e.value = v + if noise > 0.0 {
            noise * v * unit.sample(&mut rng)
        } else {
            0.0
        };
        e.sigma = sigma;
    }
    DeerDataset::new(entries).unwrap()
}

/// Distance to the truth up to the parity of the dipolar coupling.
pub fn parity_error(estimate: &Vector3) -> f64 {
    let truth = reference::displacement();
    (estimate - truth).norm().min((estimate + truth).norm())
}

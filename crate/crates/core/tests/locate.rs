mod common;

use std::time::Instant;

use common::{parity_error, synthetic};
use nalgebra::Matrix3;
use nvreg_core::linalg::Vector3;
use nvreg_core::locate::{enumerate_sites, fit_geometry, DeerDataset, FitOptions, LatticeSite};
use nvreg_core::reference;

#[test]
fn noiseless_recovery() {
    let t = Instant::now();
    let fit = fit_geometry(&synthetic(0.0, 0), &FitOptions::default()).unwrap();
    eprintln!(
        "fit took {:?}; {:?}",
        t.elapsed(),
        fit.assignment_chi_square
    );
    let err = (fit.best.displacement - reference::displacement()).norm();
    assert!(err < 0.05e-9, "{err}");
    assert!(fit.best.chi_square < 1e-6);
    assert_eq!(fit.best.assignment, 1);
    assert!(fit.assignment_margin() > 0.0);
    // mirror image reported
    assert!(fit
        .minima
        .iter()
        .any(|m| (m.displacement + reference::displacement()).norm() < 0.05e-9));
    assert!((fit.best.distance() - 9.8e-9).abs() < 0.01e-9);
    assert!((fit.best.lateral() - 8.8e-9).abs() < 0.01e-9);
}

#[test]
fn noisy_monte_carlo() {
    let t = Instant::now();
    let n = 50;
    let mut ok = 0;
    for seed in 0..n {
        let fit = fit_geometry(&synthetic(0.02, seed), &FitOptions::default()).unwrap();
        if parity_error(&fit.best.displacement) < 0.3e-9 {
            ok += 1;
        }
    }
    eprintln!("{ok}/{n} within 0.3 nm in {:?}", t.elapsed());
    assert!(ok * 10 >= n * 9, "{ok}/{n}");
}

#[test]
fn covariance_shrinks_with_more_entries() {
    // the misaligned field first so every subset pins down the geometry
    let mut entries = synthetic(0.0, 0).entries().to_vec();
    entries.rotate_right(2);
    let options = FitOptions {
        b_candidates: vec![*reference::system().center_b()],
        ..Default::default()
    };
    let mut last = f64::INFINITY;
    for n in [6, 8, 10, 12] {
        let subset = DeerDataset::new(entries[..n].to_vec()).unwrap();
        let fit = fit_geometry(&subset, &options).unwrap();
        assert!(parity_error(&fit.best.displacement) < 0.05e-9);
        let det = fit.best.covariance.determinant();
        assert!(det > 0.0 && det <= last, "{n}: {det} after {last}");
        last = det;
    }
}

#[test]
fn few_entries_rejected() {
    let full = synthetic(0.0, 0);
    let subset = DeerDataset::new(full.entries()[..3].to_vec());
    let err = subset.and_then(|d| fit_geometry(&d, &FitOptions::default()));
    assert!(err.is_err());
}

/// Every fcc index in a generous box, tested one by one.
fn brute_force(center: &Vector3, cov: &Matrix3<f64>, scale: f64) -> Vec<([i32; 3], u8)> {
    let inv = cov.try_inverse().unwrap();
    let mut out = Vec::new();
    for n1 in -12..=12 {
        for n2 in -12..=12 {
            for n3 in -12..=12 {
                for basis in 0..2u8 {
                    let d = LatticeSite::position_of([n1, n2, n3], basis) - center;
                    if (d.transpose() * inv * d)[(0, 0)] <= scale * scale {
                        out.push(([n1, n2, n3], basis));
                    }
                }
            }
        }
    }
    out.sort();
    out
}

fn keys(sites: &[LatticeSite]) -> Vec<([i32; 3], u8)> {
    let mut k: Vec<_> = sites.iter().map(|s| (s.index, s.basis)).collect();
    k.sort();
    k
}

#[test]
fn sites_in_uncertainty_sphere() {
    let c = LatticeSite::position_of([3, -2, 5], 0);
    let cov = Matrix3::identity() * (0.3e-9f64).powi(2);
    let sites = enumerate_sites(&c, &cov, 1.0).unwrap();
    assert_eq!(sites[0].position, c);
    assert!(sites
        .windows(2)
        .all(|w| w[0].mahalanobis <= w[1].mahalanobis));
    assert_eq!(keys(&sites), brute_force(&c, &cov, 1.0));
    eprintln!("{} sites within 0.3 nm", sites.len());
}

#[test]
fn sites_match_brute_force_for_anisotropic_ellipsoids() {
    let fit = fit_geometry(&synthetic(0.02, 7), &FitOptions::default()).unwrap();
    let center = fit.best.displacement;
    for scale in [0.5, 1.0, 2.0] {
        let sites = enumerate_sites(&center, &fit.best.covariance, scale).unwrap();
        assert_eq!(
            keys(&sites),
            brute_force(&center, &fit.best.covariance, scale),
            "scale {scale}"
        );
    }
    // skewed by hand as well
    let m = Matrix3::new(1.0, 0.4, 0.1, 0.0, 0.6, -0.3, 0.0, 0.0, 0.8) * 0.3e-9;
    let cov = m * m.transpose();
    let c = Vector3::new(0.11e-9, -0.47e-9, 0.93e-9);
    assert_eq!(
        keys(&enumerate_sites(&c, &cov, 1.5).unwrap()),
        brute_force(&c, &cov, 1.5)
    );
}

#[test]
fn recentering_by_lattice_vectors() {
    let m = Matrix3::new(1.0, 0.2, 0.0, 0.0, 0.7, 0.1, 0.0, 0.0, 0.9) * 0.35e-9;
    let cov = m * m.transpose();
    let c = Vector3::new(0.2e-9, 0.05e-9, -0.3e-9);
    let base = keys(&enumerate_sites(&c, &cov, 1.0).unwrap());
    for shift in [[1, 0, 0], [0, -3, 2], [5, 5, -7]] {
        let t = LatticeSite::position_of(shift, 0);
        let moved = keys(&enumerate_sites(&(c + t), &cov, 1.0).unwrap());
        let expect: Vec<_> = base
            .iter()
            .map(|(i, b)| ([i[0] + shift[0], i[1] + shift[1], i[2] + shift[2]], *b))
            .collect();
        assert_eq!(moved, expect);
    }
}

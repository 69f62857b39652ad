use nalgebra::{DMatrix, SMatrix};
use nvreg_core::linalg::{hermitian_eigen, max_abs, Mat3, Mat9, Vector3, C64};
use nvreg_core::locate::{predict_dataset, DeerDataset, DeerEntry, Observable};
use nvreg_core::reference;
use nvreg_core::spincore::{
    deer_frequencies, deer_shift, dipolar_hamiltonian, label_levels, nv_axis, pair_hamiltonian,
    single_center_hamiltonian, spin_expectation, FieldSetting, NVCenter, Spin, SpinLevel,
    SpinPairSystem,
};
use nvreg_core::PhysicalConstants;
use proptest::prelude::*;
use SpinLevel::*;

const K: PhysicalConstants = PhysicalConstants::CODATA;

/// Eigenpairs of a 3x3 Hermitian matrix from nalgebra's dense solver, ordered by m label.
fn single_states(h: &Mat3) -> ([f64; 3], [nalgebra::Vector3<C64>; 3]) {
    let eig = h.symmetric_eigen();
    let mut energies = [0.0; 3];
    let mut vectors = [nalgebra::Vector3::zeros(); 3];
    for k in 0..3 {
        let v = eig.eigenvectors.column(k).into_owned();
        let m = (0..3)
            .max_by(|&a, &b| v[a].norm().total_cmp(&v[b].norm()))
            .unwrap();
        energies[m] = eig.eigenvalues[k];
        vectors[m] = v;
    }
    (energies, vectors)
}

/// Second-order perturbation theory of the dipolar term on top of the exact
/// single-center eigenstates. Returns energies indexed `[m_a][m_b]`.
fn perturbative_levels(system: &SpinPairSystem, field: &FieldSetting) -> [[f64; 3]; 3] {
    let (ea, va) = single_states(&single_center_hamiltonian(system.center_a(), field, &K));
    let (eb, vb) = single_states(&single_center_hamiltonian(system.center_b(), field, &K));
    let hd = dipolar_hamiltonian(system, &K).unwrap();
    let product = |a: usize, b: usize| -> SMatrix<C64, 9, 1> {
        SMatrix::from_fn(|i, _| va[a][i / 3] * vb[b][i % 3])
    };
    let states: Vec<_> = (0..9)
        .map(|i| (i / 3, i % 3, product(i / 3, i % 3)))
        .collect();
    let mut out = [[0.0; 3]; 3];
    for &(a, b, ref psi) in &states {
        let e0 = ea[a] + eb[b];
        let mut e = e0 + (psi.adjoint() * hd * psi)[(0, 0)].re;
        for &(c, d, ref phi) in &states {
            if (c, d) != (a, b) {
                let m = (phi.adjoint() * hd * psi)[(0, 0)];
                e += m.norm_sqr() / (e0 - ea[c] - eb[d]);
            }
        }
        out[a][b] = e;
    }
    out
}

#[test]
fn shifts_match_perturbation_theory() {
    for (mag, r) in [(3e-3, 1.0), (6e-3, 1.0), (3e-3, 0.7)] {
        let system = reference::system()
            .with_displacement(reference::displacement() * r)
            .unwrap();
        let field = reference::aligned_field(mag);
        let d = deer_frequencies(&system, &field, &K).unwrap();
        let e = perturbative_levels(&system, &field);
        // index 0 is m = -1
        let line = |p: usize| e[0][p] - e[1][p];
        let s1 = line(0) - line(1);
        let s2 = line(2) - line(1);
        assert!(
            (d.shift_minus / s1 - 1.0).abs() < 0.01,
            "{} vs {s1}",
            d.shift_minus
        );
        assert!(
            (d.shift_plus / s2 - 1.0).abs() < 0.01,
            "{} vs {s2}",
            d.shift_plus
        );
    }
}

#[test]
fn reference_coupling_is_42_khz() {
    let d = deer_frequencies(&reference::system(), &reference::field(), &K).unwrap();
    assert!((d.shift_minus.abs() - 42e3).abs() < 1.0);
    let levels =
        label_levels(&pair_hamiltonian(&reference::system(), &reference::field(), &K).unwrap())
            .unwrap();
    let dq = deer_shift(&levels, Spin::A, (Zero, Minus), (Minus, Plus));
    assert!((dq.abs() - d.double_quantum()).abs() < 1e-6);
    assert!(
        (d.double_quantum() - d.sum()).abs() < 1e-6,
        "opposite signs in the weak-coupling regime"
    );
}

#[test]
fn prefactor_at_ten_nm() {
    let j = K.dipolar_prefactor(10e-9);
    assert!((j - 52_066.0).abs() < 5.0, "{j}");
}

#[test]
fn sum_rule_over_field_sweep() {
    let system = reference::system();
    let sweep: Vec<_> = (0..=10)
        .map(|i| {
            // Δν1 responds to the field only once B's levels tilt noticeably
            let b = 10e-3 * (0.75 + 0.05 * i as f64);
            deer_frequencies(&system, &reference::aligned_field(b), &K).unwrap()
        })
        .collect();
    let spread = |f: &dyn Fn(&nvreg_core::spincore::DeerFrequencies) -> f64| {
        let v: Vec<f64> = sweep.iter().map(f).collect();
        let (lo, hi) = v
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), x| {
                (l.min(*x), h.max(*x))
            });
        (hi - lo) / (v.iter().sum::<f64>() / v.len() as f64)
    };
    let sum = spread(&|d| d.sum());
    let dnu1 = spread(&|d| d.dnu1());
    eprintln!("sum varies {sum:.4}, dnu1 varies {dnu1:.4}");
    assert!(sum < 0.05 && dnu1 > 0.20);
    // dnu1 grows, dnu2 shrinks with field
    assert!(sweep
        .windows(2)
        .all(|w| w[1].dnu1() > w[0].dnu1() && w[1].dnu2() < w[0].dnu2()));
}

#[test]
fn axial_configuration_is_symmetric() {
    let axis = nv_axis(0);
    let a = NVCenter::along(axis).unwrap();
    // a slightly different D keeps the |-1,0> and |0,-1> labels apart
    let b = NVCenter::new(axis, 2.88e9, 0.0).unwrap();
    let system = SpinPairSystem::new(a, b, axis * 10e-9).unwrap();
    let d = deer_frequencies(&system, &FieldSetting::along(&axis, 3e-3).unwrap(), &K).unwrap();
    assert!((d.dnu1() - d.dnu2()).abs() < 1e-3 * d.dnu1(), "{d:?}");
    // first-order value: -2 J for like axes along r
    assert!((d.dnu1() - 2.0 * K.dipolar_prefactor(10e-9)).abs() < 1e-3 * d.dnu1());
}

#[test]
fn induced_moment_grows_linearly() {
    let axis = nv_axis(0);
    let frame = NVCenter::along(axis).unwrap().frame();
    let perp = frame.u;
    // a distant partner leaves A effectively isolated
    let system = reference::system()
        .with_displacement(Vector3::new(3e-6, 2e-6, 4e-6))
        .unwrap();
    let b_par = 3e-3;
    let gamma = K.gamma_e();
    let d = system.center_a().d();
    let oracle = -gamma * (1.0 / (d + gamma * b_par) + 1.0 / (d - gamma * b_par));
    let xs: Vec<f64> = (1..=10).map(|i| i as f64 * 0.1e-3).collect();
    let ys: Vec<f64> = xs
        .iter()
        .map(|&bp| {
            let field = FieldSetting::new(axis * b_par + perp * bp).unwrap();
            let h = pair_hamiltonian(&system, &field, &K).unwrap();
            let l = label_levels(&h).unwrap();
            spin_expectation(&h, &l.vector(Zero, Zero), Spin::A).dot(&perp)
        })
        .collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let r2 = sxy * sxy / (sxx * syy);
    assert!((slope / oracle - 1.0).abs() < 0.01, "{slope} vs {oracle}");
    assert!(r2 > 0.999, "{r2}");
    // aligned field: nothing induced
    let h = pair_hamiltonian(&system, &FieldSetting::new(axis * b_par).unwrap(), &K).unwrap();
    let l = label_levels(&h).unwrap();
    assert!(spin_expectation(&h, &l.vector(Zero, Zero), Spin::A).norm() < 1e-10);
}

#[test]
fn spectrum_matches_dense_oracle() {
    let h = pair_hamiltonian(&reference::system(), &reference::aligned_field(3e-3), &K).unwrap();
    let ours = hermitian_eigen(h.matrix()).unwrap();
    let dense = DMatrix::from_fn(9, 9, |i, j| h.matrix()[(i, j)]);
    let mut oracle: Vec<f64> = dense
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .cloned()
        .collect();
    oracle.sort_by(f64::total_cmp);
    let scale = max_abs(h.matrix());
    for (a, b) in ours.values.iter().zip(&oracle) {
        assert!((a - b).abs() < 1e-9 * scale, "{a} vs {b}");
    }
}

#[test]
fn swapping_labels_keeps_the_spectrum() {
    let sys = reference::system();
    let field = reference::field();
    let a = hermitian_eigen(pair_hamiltonian(&sys, &field, &K).unwrap().matrix()).unwrap();
    let b = hermitian_eigen(
        pair_hamiltonian(&sys.swapped(), &field, &K)
            .unwrap()
            .matrix(),
    )
    .unwrap();
    for (x, y) in a.values.iter().zip(&b.values) {
        assert!((x - y).abs() < 1e-14 * x.abs().max(1.0), "{x} vs {y}");
    }
}

#[test]
fn forward_model_scales_as_inverse_cube() {
    // fields with a sizable projection on both axes keep the levels in the m basis
    let fields = [
        reference::aligned_field(3e-3),
        reference::aligned_field(6e-3),
        FieldSetting::along(&nv_axis(2), 3e-3).unwrap(),
    ];
    let mut entries = Vec::new();
    for field in fields {
        for observable in [Observable::Dnu1, Observable::Dnu2, Observable::Sum] {
            entries.push(DeerEntry {
                field,
                observable,
                value: 0.0,
                sigma: 1.0,
            });
        }
    }
    let data = DeerDataset::new(entries).unwrap();
    let near = reference::system();
    let far = near.with_displacement(near.displacement() * 2.0).unwrap();
    let very_far = near.with_displacement(near.displacement() * 1e4).unwrap();
    let v1 = predict_dataset(&near, &data, &K);
    let v2 = predict_dataset(&far, &data, &K);
    let v3 = predict_dataset(&very_far, &data, &K);
    for ((a, b), c) in v1.iter().zip(&v2).zip(&v3) {
        let (a, b, c) = (a.clone().unwrap(), b.clone().unwrap(), c.clone().unwrap());
        assert!((b * 8.0 / a - 1.0).abs() < 0.01, "{a} {b}");
        assert!(c.abs() < 1e-6 * a.abs().max(1.0));
    }
}

fn unit(theta: f64, phi: f64) -> Vector3 {
    Vector3::new(
        theta.sin() * phi.cos(),
        theta.sin() * phi.sin(),
        theta.cos(),
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn hamiltonian_invariants(
        theta in 0.0..std::f64::consts::PI, phi in 0.0..std::f64::consts::TAU, r in 2e-9..50e-9,
        bt in 0.0..std::f64::consts::PI, bp in 0.0..std::f64::consts::TAU, bmag in 0.0..0.1f64,
        ka in 0usize..4, kb in 0usize..4,
    ) {
        let sys = SpinPairSystem::new(
            NVCenter::along(nv_axis(ka)).unwrap(),
            NVCenter::along(nv_axis(kb)).unwrap(),
            unit(theta, phi) * r,
        ).unwrap();
        let hd = dipolar_hamiltonian(&sys, &K).unwrap();
        let trace: C64 = (0..9).map(|i| hd[(i, i)]).sum();
        prop_assert!(trace.norm() < 1e-9 * max_abs(&hd));
        let half = dipolar_hamiltonian(&sys.with_displacement(sys.displacement() * 2.0).unwrap(), &K).unwrap();
        prop_assert!(max_abs(&(half * C64::new(8.0, 0.0) - hd)) < 1e-12 * max_abs(&hd));
        let flipped = dipolar_hamiltonian(&sys.with_displacement(-sys.displacement()).unwrap(), &K).unwrap();
        prop_assert!(max_abs(&(flipped - hd)) < 1e-12 * max_abs(&hd));
        let h = pair_hamiltonian(&sys, &FieldSetting::new(unit(bt, bp) * bmag).unwrap(), &K).unwrap();
        let m: &Mat9 = h.matrix();
        prop_assert!(max_abs(&(m - m.adjoint())) < 1e-9 * max_abs(m));
        let e = hermitian_eigen(m).unwrap();
        let rebuilt = e.vectors * Mat9::from_diagonal(&nalgebra::SVector::<C64, 9>::from(e.values.map(|v| C64::new(v, 0.0)))) * e.vectors.adjoint();
        prop_assert!(max_abs(&(rebuilt - m)) < 1e-9 * max_abs(m));
        prop_assert!(max_abs(&(e.vectors.adjoint() * e.vectors - Mat9::identity())) < 1e-9);
        prop_assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
    }
}

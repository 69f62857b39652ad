//! Strategies and scenario runners shared by the property suites and the acceptance
//! target.

use std::f64::consts::PI;

use nvreg_core::dynamics::{
    apply_pulse, composite_dq_pulse, evolve_free, frame_hamiltonian, initialize_register,
    population, DecoherenceParams, PulseAction, PulseMode, QuantumState,
};
use nvreg_core::linalg::{hermitian_deviation, max_abs};
use nvreg_core::reference;
use nvreg_core::sequences::{Duration, Event, PulseProgram, Sweep, TimeUnit, WaitSpec};
use nvreg_core::spincore::{
    label_levels, pair_hamiltonian, LabeledLevels, PairHamiltonian, Spin, SpinLevel,
};
use nvreg_core::PhysicalConstants;
use proptest::prelude::*;
use SpinLevel::*;

pub fn spin() -> impl Strategy<Value = Spin> {
    prop_oneof![Just(Spin::A), Just(Spin::B)]
}

pub fn transition() -> impl Strategy<Value = (SpinLevel, SpinLevel)> {
    prop_oneof![
        Just((Zero, Minus)),
        Just((Zero, Plus)),
        Just((Minus, Plus)),
        Just((Minus, Zero)),
        Just((Plus, Zero)),
        Just((Plus, Minus)),
    ]
}

pub fn action() -> impl Strategy<Value = PulseAction> {
    (
        spin(),
        transition(),
        -7.0..7.0f64,
        -4.0..4.0f64,
        prop::option::of((1e5..5e7f64, -2e6..2e6f64)),
    )
        .prop_map(|(s, (f, t), angle, phase, rabi)| {
            let a = PulseAction::new(s, f, t, angle).unwrap().with_phase(phase);
            match rabi {
                Some((r, d)) => a
                    .with_mode(PulseMode::Rabi {
                        rabi_frequency: r,
                        detuning: d,
                    })
                    .unwrap(),
                None => a,
            }
        })
}

#[derive(Debug, Clone)]
pub enum Op {
    Pulse(PulseAction),
    Composite(Spin),
    /// Lab-frame evolution under the full Hamiltonian.
    Lab(f64),
    /// Rotating-frame evolution with frame detunings and dephasing.
    Frame(f64, f64, f64),
}

pub fn op() -> impl Strategy<Value = Op> {
    prop_oneof![
        3 => action().prop_map(Op::Pulse),
        1 => spin().prop_map(Op::Composite),
        2 => (0.0..2e-9f64).prop_map(Op::Lab),
        3 => (0.0..50e-6f64, -1e6..1e6f64, -1e6..1e6f64).prop_map(|(t, a, b)| Op::Frame(t, a, b)),
    ]
}

pub fn check_physical(state: &QuantumState) -> Result<(), TestCaseError> {
    let tr = state.trace();
    prop_assert!(
        (tr.re - 1.0).abs() < 1e-9 && tr.im.abs() < 1e-9,
        "trace {tr}"
    );
    prop_assert!(hermitian_deviation(state.rho()) < 1e-9 * max_abs(state.rho()).max(1e-300));
    prop_assert!(
        state.min_eigenvalue() > -1e-9,
        "eigenvalue {}",
        state.min_eigenvalue()
    );
    Ok(())
}

pub fn level() -> impl Strategy<Value = SpinLevel> {
    prop_oneof![Just(Minus), Just(Zero), Just(Plus)]
}

pub fn duration() -> impl Strategy<Value = Duration> {
    (
        prop_oneof![Just(0.0), 0.0..1e3f64, (0u32..500).prop_map(f64::from)],
        prop_oneof![Just(TimeUnit::Ns), Just(TimeUnit::Us), Just(TimeUnit::Ms)],
    )
        .prop_map(|(v, u)| Duration::new(v, u))
}

pub fn angle() -> impl Strategy<Value = f64> {
    prop_oneof![
        Just(PI),
        Just(-PI),
        Just(PI / 2.0),
        Just(PI / 4.0),
        -10.0..10.0f64
    ]
}

pub fn event(with_sweep: bool) -> impl Strategy<Value = Event> {
    let pulse = (
        spin(),
        level(),
        level(),
        angle(),
        prop::option::of(-PI..PI),
        prop::option::of((1e3..1e8f64, prop::option::of(-1e7..1e7f64))),
    )
        .prop_filter("distinct levels", |(_, f, t, ..)| f != t)
        .prop_map(|(s, f, t, a, phase, rabi)| {
            let mut p = PulseAction::new(s, f, t, a).unwrap();
            if let Some(ph) = phase {
                p = p.with_phase(ph);
            }
            if let Some((r, d)) = rabi {
                p = p
                    .with_mode(PulseMode::Rabi {
                        rabi_frequency: r,
                        detuning: d.unwrap_or(0.0),
                    })
                    .unwrap();
            }
            Event::Pulse(p)
        });
    let wait = if with_sweep {
        prop_oneof![
            duration().prop_map(WaitSpec::Fixed),
            Just(WaitSpec::Sweep("t".into())),
            duration().prop_map(|total| WaitSpec::Complement {
                total,
                var: "t".into()
            }),
        ]
        .boxed()
    } else {
        duration().prop_map(WaitSpec::Fixed).boxed()
    };
    prop_oneof![1 => Just(Event::Init), 4 => pulse, 3 => wait.prop_map(Event::Wait)]
}

pub fn program() -> impl Strategy<Value = PulseProgram> {
    any::<bool>()
        .prop_flat_map(|with_sweep| {
            (
                prop::collection::vec(event(with_sweep), 0..10),
                spin(),
                Just(with_sweep),
                (duration(), 1e-3..1e3f64, 1usize..1000),
                (
                    prop_oneof![Just(0.0), -1e6..1e6f64],
                    prop_oneof![Just(0.0), -1e6..1e6f64],
                ),
            )
        })
        .prop_map(
            |(mut events, read, with_sweep, (start, span, points), (da, db))| {
                events.push(Event::Read(read));
                let stop = Duration::new(start.value + span, start.unit);
                let sweep = with_sweep.then(|| Sweep {
                    variable: "t".into(),
                    start,
                    stop,
                    points,
                });
                PulseProgram::new(events, sweep, [da, db]).unwrap()
            },
        )
}

pub fn reference_levels() -> (PairHamiltonian, LabeledLevels) {
    let h = pair_hamiltonian(
        &reference::system(),
        &reference::field(),
        &PhysicalConstants::CODATA,
    )
    .unwrap();
    let levels = label_levels(&h).unwrap();
    (h, levels)
}

/// Applies `ops` from the initialized register, checking the state after every step.
pub fn run_chain(p0: (f64, f64), t2: (f64, f64), ops: &[Op]) -> Result<(), TestCaseError> {
    let (h, levels) = reference_levels();
    let dec = DecoherenceParams::t2_only(t2.0, t2.1).unwrap();
    let mut state = initialize_register(p0.0, p0.1).unwrap();
    check_physical(&state)?;
    for op in ops {
        state = match op {
            Op::Pulse(a) => apply_pulse(&state, a),
            Op::Composite(s) => composite_dq_pulse(&state, *s),
            Op::Lab(t) => evolve_free(&state, &h, *t, &DecoherenceParams::none()).unwrap(),
            Op::Frame(t, da, db) => {
                evolve_free(&state, &frame_hamiltonian(&levels, *da, *db), *t, &dec).unwrap()
            }
        };
        check_physical(&state)?;
    }
    Ok(())
}

/// `|0>` population of A after a Hahn echo with B parked in `partner`.
pub fn echo_population(
    levels: &LabeledLevels,
    da: f64,
    db: f64,
    tau: f64,
    partner: SpinLevel,
) -> f64 {
    let h = frame_hamiltonian(levels, da, db);
    let none = DecoherenceParams::none();
    let mut s = initialize_register(1.0, 1.0).unwrap();
    if partner != Zero {
        s = apply_pulse(&s, &PulseAction::new(Spin::B, Zero, partner, PI).unwrap());
    }
    s = apply_pulse(
        &s,
        &PulseAction::new(Spin::A, Zero, Minus, PI / 2.0).unwrap(),
    );
    s = evolve_free(&s, &h, tau, &none).unwrap();
    s = apply_pulse(&s, &PulseAction::new(Spin::A, Zero, Minus, PI).unwrap());
    s = evolve_free(&s, &h, tau, &none).unwrap();
    s = apply_pulse(
        &s,
        &PulseAction::new(Spin::A, Zero, Minus, PI / 2.0).unwrap(),
    );
    population(&s, Spin::A, Zero)
}

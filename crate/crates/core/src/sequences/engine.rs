//! Executes pulse programs on the register.

use alloc::string::String;
use alloc::vec::Vec;

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dynamics::{
    apply_pulse, evolve_free, frame_hamiltonian, initialize_register, population, t2star_detunings,
    DecoherenceParams, QuantumState,
};
use crate::linalg::Mat9;
use crate::measure::{readout_value, ReadoutModel};
use crate::sequences::program::{Event, PulseProgram};
use crate::spincore::{
    label_levels, pair_hamiltonian, FieldSetting, LabeledLevels, Spin, SpinLevel, SpinPairSystem,
};
use crate::{Error, PhysicalConstants, Result};

/// Sampled signal: sweep values (s) and readout values.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SignalTrace {
    pub abscissa: Vec<f64>,
    pub values: Vec<f64>,
    pub metadata: Vec<(String, String)>,
}

impl SignalTrace {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Everything a program runs against besides the program itself.
#[derive(Debug, Clone, PartialEq)]
pub struct Experiment {
    pub system: SpinPairSystem,
    pub field: FieldSetting,
    pub decoherence: DecoherenceParams,
    pub constants: PhysicalConstants,
    pub readout: ReadoutModel,
    /// `|0>` probability after initialization, per spin.
    pub init: [f64; 2],
    /// Number of quasi-static detuning draws when a T2* channel is enabled.
    pub t2star_samples: usize,
}

impl Experiment {
    pub const DEFAULT_T2STAR_SAMPLES: usize = 201;

    pub fn new(system: SpinPairSystem, field: FieldSetting) -> Self {
        Self {
            system,
            field,
            decoherence: DecoherenceParams::none(),
            constants: PhysicalConstants::CODATA,
            readout: ReadoutModel::default(),
            init: [1.0, 1.0],
            t2star_samples: Self::DEFAULT_T2STAR_SAMPLES,
        }
    }
}

/// A program bound to an experiment with the Hamiltonian already diagonalized.
/// Sweep points are independent and may be evaluated in any order or in parallel;
/// each point draws its shot noise from its own stream of the seed.
#[derive(Debug, Clone)]
pub struct PreparedRun<'a> {
    program: &'a PulseProgram,
    experiment: &'a Experiment,
    levels: LabeledLevels,
    detunings: Vec<[f64; 2]>,
    abscissa: Vec<f64>,
    seed: u64,
}

impl<'a> PreparedRun<'a> {
    pub fn new(program: &'a PulseProgram, experiment: &'a Experiment, seed: u64) -> Result<Self> {
        let h = pair_hamiltonian(&experiment.system, &experiment.field, &experiment.constants)?;
        let levels = label_levels(&h)?;
        let dec = &experiment.decoherence;
        let detunings = if dec.has_t2star() {
            let n = experiment.t2star_samples.max(1);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut draw = |spin| match dec.t2star(spin) {
                Some(t) => t2star_detunings(t, n, &mut rng),
                None => Ok(alloc::vec![0.0; n]),
            };
            let a = draw(Spin::A)?;
            let b = draw(Spin::B)?;
            a.into_iter().zip(b).map(|(x, y)| [x, y]).collect()
        } else {
            alloc::vec![[0.0, 0.0]]
        };
        Ok(Self {
            program,
            experiment,
            levels,
            detunings,
            abscissa: program.abscissa(),
            seed,
        })
    }

    pub fn len(&self) -> usize {
        self.abscissa.len()
    }

    pub fn is_empty(&self) -> bool {
        self.abscissa.is_empty()
    }

    pub fn abscissa(&self) -> &[f64] {
        &self.abscissa
    }

    pub fn levels(&self) -> &LabeledLevels {
        &self.levels
    }

    /// Register state after the first `prefix` events at sweep point `index`,
    /// averaged over the quasi-static detunings.
    pub fn state_at(&self, index: usize, prefix: usize) -> Result<QuantumState> {
        let events = self.program.events();
        if prefix > events.len() || index >= self.len() {
            return Err(Error::invalid("probe position out of range"));
        }
        let sweep_value = self.abscissa[index];
        let exp = self.experiment;
        let init = initialize_register(exp.init[0], exp.init[1])?;
        let base = [
            self.program.detuning(Spin::A),
            self.program.detuning(Spin::B),
        ];
        let mut sum = Mat9::zeros();
        for d in &self.detunings {
            let frame = frame_hamiltonian(&self.levels, base[0] + d[0], base[1] + d[1]);
            let mut state = init.clone();
            for event in &events[..prefix] {
                state = match event {
                    Event::Init => init.clone(),
                    Event::Pulse(p) => apply_pulse(&state, p),
                    Event::Wait(w) => {
                        evolve_free(&state, &frame, w.resolve(sweep_value), &exp.decoherence)
                            .map_err(|e| Error::at_point(index, e))?
                    }
                    Event::Read(_) => state,
                };
            }
            sum += state.rho();
        }
        Ok(QuantumState::from_raw(
            sum / crate::linalg::C64::new(self.detunings.len() as f64, 0.0),
        ))
    }

    /// Readout value at sweep point `index`.
    pub fn evaluate(&self, index: usize) -> Result<f64> {
        let state = self.state_at(index, self.program.events().len())?;
        let p0 = population(&state, self.program.readout_spin(), SpinLevel::Zero);
        let model = &self.experiment.readout;
        if model.is_noisy() {
            let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
            rng.set_stream(index as u64 + 1);
            readout_value(p0, model, Some(&mut rng))
        } else {
            readout_value(p0, model, None)
        }
        .map_err(|e| Error::at_point(index, e))
    }

    pub fn into_trace(self, values: Vec<f64>) -> SignalTrace {
        let mut metadata = alloc::vec![("seed".into(), alloc::format!("{}", self.seed))];
        if let Some(s) = self.program.sweep() {
            metadata.push(("sweep".into(), s.variable.clone()));
        }
        SignalTrace {
            abscissa: self.abscissa,
            values,
            metadata,
        }
    }
}

/// Runs every sweep point in order. Deterministic for a given seed.
pub fn run_program(
    program: &PulseProgram,
    experiment: &Experiment,
    seed: u64,
) -> Result<SignalTrace> {
    let run = PreparedRun::new(program, experiment, seed)?;
    let values = (0..run.len())
        .map(|i| run.evaluate(i))
        .collect::<Result<Vec<_>>>()?;
    Ok(run.into_trace(values))
}

/// State after `prefix` events at sweep point `index`, without readout.
pub fn state_probe(
    program: &PulseProgram,
    experiment: &Experiment,
    prefix: usize,
    index: usize,
    seed: u64,
) -> Result<QuantumState> {
    PreparedRun::new(program, experiment, seed)?.state_at(index, prefix)
}

use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, PI};
use core::str::FromStr;

use crate::dynamics::{composite_dq_actions, PulseAction, PulseMode};
use crate::sequences::program::{Duration, Event, PulseProgram, Sweep, WaitSpec};
use crate::spincore::{Spin, SpinLevel};
use crate::{Error, Result};

use SpinLevel::{Minus, Plus, Zero};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Template {
    Ramsey,
    Hahn,
    Deer,
    DeerDq,
    DeerDdq,
    EntanglePhi,
    EntanglePsi,
}

impl Template {
    pub const ALL: [Template; 7] = [
        Template::Ramsey,
        Template::Hahn,
        Template::Deer,
        Template::DeerDq,
        Template::DeerDdq,
        Template::EntanglePhi,
        Template::EntanglePsi,
    ];

    pub const fn name(self) -> &'static str {
        match self {
            Template::Ramsey => "ramsey",
            Template::Hahn => "hahn",
            Template::Deer => "deer",
            Template::DeerDq => "deer_dq",
            Template::DeerDdq => "deer_ddq",
            Template::EntanglePhi => "entangle_phi",
            Template::EntanglePsi => "entangle_psi",
        }
    }
}

impl FromStr for Template {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Template::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| Error::invalid(alloc::format!("unknown sequence template `{s}`")))
    }
}

/// Inputs of the named templates. Times in seconds, frequencies in Hz.
///
/// * `ramsey`, `hahn`: sweep the free-evolution time from 0 to `sweep_stop`.
///   `detuning` is A's frame detuning; `partner` prepares B before the sequence.
/// * `deer`, `deer_dq`, `deer_ddq`: echo of total length `2 tau`, B flipped at `T`
///   swept over `0..tau`. `control` sets the drive mode of B's flip pulses.
/// * `entangle_phi`, `entangle_psi`: frame detunings `coupling / 2` on both spins and
///   `tau = 1 / (2 coupling)` unless given; with `sweep_stop` the wait is swept instead.
#[derive(Debug, Clone, PartialEq)]
pub struct TemplateParams {
    pub tau: Option<f64>,
    pub sweep_stop: Option<f64>,
    pub points: usize,
    pub detuning: f64,
    pub partner: SpinLevel,
    pub coupling: Option<f64>,
    pub control: Option<PulseMode>,
}

impl Default for TemplateParams {
    fn default() -> Self {
        Self {
            tau: None,
            sweep_stop: None,
            points: Sweep::DEFAULT_POINTS,
            detuning: 0.0,
            partner: Zero,
            coupling: None,
            control: None,
        }
    }
}

fn pulse(target: Spin, from: SpinLevel, to: SpinLevel, angle: f64) -> Event {
    Event::Pulse(PulseAction::new(target, from, to, angle).expect("distinct levels"))
}

fn wait(s: f64) -> Event {
    Event::Wait(WaitSpec::Fixed(Duration::from_seconds(s)))
}

fn sweep_wait(var: &str) -> Event {
    Event::Wait(WaitSpec::Sweep(var.into()))
}

fn sweep(var: &str, stop: f64, points: usize) -> Sweep {
    Sweep {
        variable: var.into(),
        start: Duration::from_seconds(0.0),
        stop: Duration::from_seconds(stop),
        points,
    }
}

fn positive(x: Option<f64>, name: &'static str) -> Result<f64> {
    match x {
        None => Err(Error::MissingParameter(name)),
        Some(v) if v > 0.0 && v.is_finite() => Ok(v),
        Some(_) => Err(Error::invalid(alloc::format!(
            "template parameter `{name}` must be positive"
        ))),
    }
}

fn with_mode(
    events: impl IntoIterator<Item = PulseAction>,
    mode: Option<PulseMode>,
) -> Result<Vec<Event>> {
    events
        .into_iter()
        .map(|a| match mode {
            Some(m) => a.with_mode(m).map(Event::Pulse),
            None => Ok(Event::Pulse(a)),
        })
        .collect()
}

/// Builds one of the named experiments.
pub fn build_named(template: Template, params: &TemplateParams) -> Result<PulseProgram> {
    let a = Spin::A;
    let b = Spin::B;
    let mut detuning = [0.0; 2];
    let mut events = alloc::vec![Event::Init];
    let sweep_spec;
    match template {
        Template::Ramsey | Template::Hahn => {
            let stop = positive(params.sweep_stop, "sweep_stop")?;
            detuning[0] = params.detuning;
            if params.partner != Zero {
                events.push(pulse(b, Zero, params.partner, PI));
            }
            events.push(pulse(a, Zero, Minus, FRAC_PI_2));
            events.push(sweep_wait("t"));
            if template == Template::Hahn {
                events.push(pulse(a, Zero, Minus, PI));
                events.push(sweep_wait("t"));
            }
            events.push(pulse(a, Zero, Minus, FRAC_PI_2));
            sweep_spec = Some(sweep("t", stop, params.points));
        }
        Template::Deer | Template::DeerDq | Template::DeerDdq => {
            let tau = positive(params.tau, "tau")?;
            let b_flip: Vec<PulseAction> = if template == Template::Deer {
                alloc::vec![PulseAction::new(b, Zero, Minus, PI)?]
            } else {
                events.push(pulse(b, Zero, Minus, PI));
                composite_dq_actions(b).to_vec()
            };
            let (open, echo, close): (Vec<Event>, Vec<Event>, Vec<Event>) =
                if template == Template::DeerDdq {
                    // coherence between A's |-1> and |+1>
                    (
                        alloc::vec![pulse(a, Zero, Minus, FRAC_PI_2), pulse(a, Zero, Plus, PI)],
                        composite_dq_actions(a)
                            .into_iter()
                            .map(Event::Pulse)
                            .collect(),
                        alloc::vec![pulse(a, Zero, Plus, PI), pulse(a, Zero, Minus, FRAC_PI_2)],
                    )
                } else {
                    (
                        alloc::vec![pulse(a, Zero, Minus, FRAC_PI_2)],
                        alloc::vec![pulse(a, Zero, Minus, PI)],
                        alloc::vec![pulse(a, Zero, Minus, FRAC_PI_2)],
                    )
                };
            events.extend(open);
            events.push(wait(tau));
            events.extend(echo);
            events.push(sweep_wait("T"));
            events.extend(with_mode(b_flip, params.control)?);
            events.push(Event::Wait(WaitSpec::Complement {
                total: Duration::from_seconds(tau),
                var: "T".into(),
            }));
            events.extend(close);
            sweep_spec = Some(sweep("T", tau, params.points));
        }
        Template::EntanglePhi | Template::EntanglePsi => {
            let j = params.coupling.ok_or(Error::MissingParameter("coupling"))?;
            if !(j.is_finite() && j != 0.0) {
                return Err(Error::invalid(
                    "template parameter `coupling` must be non-zero",
                ));
            }
            detuning = [j / 2.0, j / 2.0];
            if template == Template::EntanglePsi {
                events.push(pulse(a, Zero, Minus, PI));
            }
            let (first, second, sw) = match params.sweep_stop {
                Some(stop) => {
                    let stop = positive(Some(stop), "sweep_stop")?;
                    (
                        sweep_wait("tau"),
                        sweep_wait("tau"),
                        Some(sweep("tau", stop, params.points)),
                    )
                }
                None => {
                    let tau = match params.tau {
                        Some(t) => positive(Some(t), "tau")?,
                        None => 1.0 / (2.0 * j.abs()),
                    };
                    (wait(tau), wait(tau), None)
                }
            };
            events.push(pulse(a, Zero, Minus, FRAC_PI_2));
            events.push(first);
            events.push(pulse(a, Zero, Minus, PI));
            events.push(pulse(b, Zero, Minus, FRAC_PI_2));
            events.push(second);
            events.push(pulse(a, Zero, Minus, FRAC_PI_2));
            sweep_spec = sw;
        }
    }
    events.push(Event::Read(a));
    PulseProgram::new(events, sweep_spec, detuning).map_err(Error::from)
}

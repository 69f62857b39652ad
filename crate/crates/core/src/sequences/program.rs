use alloc::string::String;
use alloc::vec::Vec;

use crate::dynamics::PulseAction;
use crate::sequences::dsl::{ParseError, ParseErrorKind};
use crate::spincore::Spin;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TimeUnit {
    Ns,
    Us,
    Ms,
}

impl TimeUnit {
    pub const fn seconds(self) -> f64 {
        match self {
            TimeUnit::Ns => 1e-9,
            TimeUnit::Us => 1e-6,
            TimeUnit::Ms => 1e-3,
        }
    }

    /// Units per second; dividing by it keeps round values such as `100us` exact.
    pub const fn per_second(self) -> f64 {
        match self {
            TimeUnit::Ns => 1e9,
            TimeUnit::Us => 1e6,
            TimeUnit::Ms => 1e3,
        }
    }

    pub const fn suffix(self) -> &'static str {
        match self {
            TimeUnit::Ns => "ns",
            TimeUnit::Us => "us",
            TimeUnit::Ms => "ms",
        }
    }
}

/// A time as written in a program: value and unit are kept so that rendering is exact.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Duration {
    pub value: f64,
    pub unit: TimeUnit,
}

impl Duration {
    pub const fn new(value: f64, unit: TimeUnit) -> Self {
        Self { value, unit }
    }

    /// Expressed in microseconds. The shift goes through the decimal exponent, so
    /// `1e-4` becomes exactly `100us` rather than `99.99999999999999us`.
    pub fn from_seconds(s: f64) -> Self {
        let text = alloc::format!("{s:e}");
        let value = match text.split_once('e') {
            Some((m, e)) => match e.parse::<i32>() {
                Ok(e) => alloc::format!("{m}e{}", e + 6).parse().unwrap_or(s * 1e6),
                Err(_) => s * 1e6,
            },
            None => s * 1e6,
        };
        Self {
            value,
            unit: TimeUnit::Us,
        }
    }

    pub fn seconds(&self) -> f64 {
        self.value / self.unit.per_second()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum WaitSpec {
    Fixed(Duration),
    /// The current value of the sweep variable.
    Sweep(String),
    /// `total` minus the sweep variable, written `50us-T`.
    Complement {
        total: Duration,
        var: String,
    },
}

impl WaitSpec {
    pub fn variable(&self) -> Option<&str> {
        match self {
            WaitSpec::Fixed(_) => None,
            WaitSpec::Sweep(v) | WaitSpec::Complement { var: v, .. } => Some(v),
        }
    }

    /// Wait length in seconds for a given sweep value.
    pub fn resolve(&self, sweep_value: f64) -> f64 {
        match self {
            WaitSpec::Fixed(d) => d.seconds(),
            WaitSpec::Sweep(_) => sweep_value,
            WaitSpec::Complement { total, .. } => total.seconds() - sweep_value,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Event {
    /// Reset to the initialization state.
    Init,
    Pulse(PulseAction),
    Wait(WaitSpec),
    Read(Spin),
}

/// Linear sweep of one time variable.
#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub variable: String,
    pub start: Duration,
    pub stop: Duration,
    pub points: usize,
}

impl Sweep {
    pub const DEFAULT_POINTS: usize = 256;

    pub fn value(&self, index: usize) -> f64 {
        let (a, b) = (self.start.seconds(), self.stop.seconds());
        if self.points <= 1 {
            a
        } else if index + 1 == self.points {
            b
        } else {
            a + (b - a) * index as f64 / (self.points - 1) as f64
        }
    }
}

/// A validated pulse sequence: exactly one readout, placed last, and every symbolic
/// wait refers to the single sweep variable. Frame detunings apply to all free
/// evolution of the respective spin.
#[derive(Debug, Clone, PartialEq)]
pub struct PulseProgram {
    events: Vec<Event>,
    sweep: Option<Sweep>,
    detuning: [f64; 2],
}

impl PulseProgram {
    pub fn new(
        events: Vec<Event>,
        sweep: Option<Sweep>,
        detuning: [f64; 2],
    ) -> Result<Self, ParseError> {
        let fail = |kind| Err(ParseError::unlocated(kind));
        let reads = events
            .iter()
            .filter(|e| matches!(e, Event::Read(_)))
            .count();
        match (reads, events.last()) {
            (0, _) => return fail(ParseErrorKind::MissingReadout),
            (1, Some(Event::Read(_))) => {}
            (1, _) => return fail(ParseErrorKind::ReadoutNotLast),
            _ => return fail(ParseErrorKind::MultipleReadouts),
        }
        for e in &events {
            if let Event::Wait(w) = e {
                if let Some(var) = w.variable() {
                    if sweep.as_ref().map(|s| s.variable.as_str()) != Some(var) {
                        return fail(ParseErrorKind::UndefinedVariable(var.into()));
                    }
                }
            }
        }
        if let Some(s) = &sweep {
            if s.points == 0 || (s.points > 1 && !(s.stop.seconds() > s.start.seconds())) {
                return fail(ParseErrorKind::InvalidSweep);
            }
        }
        if detuning.iter().any(|d| !d.is_finite()) {
            return fail(ParseErrorKind::InvalidNumber("detuning".into()));
        }
        Ok(Self {
            events,
            sweep,
            detuning,
        })
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn sweep(&self) -> Option<&Sweep> {
        self.sweep.as_ref()
    }

    pub fn detuning(&self, spin: Spin) -> f64 {
        self.detuning[spin.index()]
    }

    pub fn readout_spin(&self) -> Spin {
        match self.events.last() {
            Some(Event::Read(s)) => *s,
            _ => unreachable!("validated program ends with a readout"),
        }
    }

    /// Number of sweep points; 1 without a sweep.
    pub fn points(&self) -> usize {
        self.sweep.as_ref().map_or(1, |s| s.points)
    }

    /// Sweep values in seconds; `[0]` without a sweep.
    pub fn abscissa(&self) -> Vec<f64> {
        match &self.sweep {
            Some(s) => (0..s.points).map(|i| s.value(i)).collect(),
            None => alloc::vec![0.0],
        }
    }
}

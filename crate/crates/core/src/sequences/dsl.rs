//! Text syntax for pulse programs.
//!
//! ```text
//! # Ramsey on A
//! detune A 150kHz
//! init; pulse A 0:-1 pi/2; wait t; pulse A 0:-1 pi/2; read A
//! sweep t 0 10us 256
//! ```
//!
//! Statements are separated by `;` or newlines and `#` starts a comment. Besides
//! `init`, `pulse`, `wait`, `read` and `sweep` there is `detune SPIN FREQ`, which
//! sets a frame detuning for all free evolution of that spin. A wait may be written
//! `50us-T` to mean the fixed time minus the sweep variable. Pulse options are
//! `phase=ANGLE`, `rabi=FREQ` and, with `rabi`, `detune=FREQ`.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt::{self, Write};

use crate::dynamics::{PulseAction, PulseMode};
use crate::sequences::program::{Duration, Event, PulseProgram, Sweep, TimeUnit, WaitSpec};
use crate::spincore::{Spin, SpinLevel};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ParseErrorKind {
    #[error("unknown statement `{0}`")]
    UnknownStatement(String),
    #[error("unknown spin `{0}` (expected A or B)")]
    UnknownSpin(String),
    #[error("unknown transition `{0}` (expected m:m with m in -1, 0, +1 and distinct levels)")]
    UnknownTransition(String),
    #[error("invalid angle `{0}`")]
    InvalidAngle(String),
    #[error("invalid duration `{0}` (expected a non-negative number with ns, us or ms)")]
    InvalidDuration(String),
    #[error("invalid frequency `{0}` (expected a number with Hz, kHz, MHz or GHz)")]
    InvalidFrequency(String),
    #[error("invalid number `{0}`")]
    InvalidNumber(String),
    #[error("invalid identifier `{0}`")]
    InvalidIdentifier(String),
    #[error("unknown or repeated pulse option `{0}`")]
    InvalidOption(String),
    #[error("`detune=` needs `rabi=` on the same pulse")]
    DetuneWithoutRabi,
    #[error("expected {0}")]
    UnexpectedEnd(&'static str),
    #[error("unexpected trailing input `{0}`")]
    TrailingInput(String),
    #[error("more than one sweep")]
    MultipleSweeps,
    #[error("sweep needs at least one point and stop > start")]
    InvalidSweep,
    #[error("program has no readout")]
    MissingReadout,
    #[error("more than one readout")]
    MultipleReadouts,
    #[error("readout must be the last event")]
    ReadoutNotLast,
    #[error("`{0}` is not the sweep variable")]
    UndefinedVariable(String),
}

/// Parse or validation failure. `line` and `column` are 1-based; both are 0 for
/// programs built in code.
#[derive(Debug, Clone, PartialEq)]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub kind: ParseErrorKind,
}

impl ParseError {
    pub(crate) fn unlocated(kind: ParseErrorKind) -> Self {
        Self {
            line: 0,
            column: 0,
            kind,
        }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.line == 0 {
            write!(f, "{}", self.kind)
        } else {
            write!(
                f,
                "line {}, column {}: {}",
                self.line, self.column, self.kind
            )
        }
    }
}

impl core::error::Error for ParseError {}

#[derive(Debug, Clone, Copy)]
struct Token<'a> {
    text: &'a str,
    line: usize,
    column: usize,
}

impl Token<'_> {
    fn err(&self, kind: ParseErrorKind) -> ParseError {
        ParseError {
            line: self.line,
            column: self.column,
            kind,
        }
    }
}

fn flush<'a>(current: &mut Vec<Token<'a>>, out: &mut Vec<Vec<Token<'a>>>) {
    if !current.is_empty() {
        out.push(core::mem::take(current));
    }
}

/// Splits the source into statements of tokens, dropping comments.
fn statements(text: &str) -> Vec<Vec<Token<'_>>> {
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("");
        let mut current: Vec<Token<'_>> = Vec::new();
        let mut start: Option<(usize, usize)> = None; // (byte, column)
        let mut column = 0;
        for (byte, ch) in line.char_indices() {
            column += 1;
            let boundary = ch.is_whitespace() || ch == ';';
            if boundary {
                if let Some((b, c)) = start.take() {
                    current.push(Token {
                        text: &line[b..byte],
                        line: lineno + 1,
                        column: c,
                    });
                }
                if ch == ';' {
                    flush(&mut current, &mut out);
                }
            } else if start.is_none() {
                start = Some((byte, column));
            }
        }
        if let Some((b, c)) = start {
            current.push(Token {
                text: &line[b..],
                line: lineno + 1,
                column: c,
            });
        }
        flush(&mut current, &mut out);
    }
    out
}

struct Cursor<'a, 'b> {
    tokens: &'b [Token<'a>],
    pos: usize,
}

impl<'a> Cursor<'a, '_> {
    fn next(&mut self, expected: &'static str) -> Result<Token<'a>, ParseError> {
        match self.tokens.get(self.pos) {
            Some(t) => {
                self.pos += 1;
                Ok(*t)
            }
            None => {
                let last = self.tokens[self.tokens.len() - 1];
                Err(ParseError {
                    line: last.line,
                    column: last.column + last.text.chars().count(),
                    kind: ParseErrorKind::UnexpectedEnd(expected),
                })
            }
        }
    }

    fn peek(&self) -> Option<Token<'a>> {
        self.tokens.get(self.pos).copied()
    }

    fn finish(&self) -> Result<(), ParseError> {
        match self.peek() {
            Some(t) => Err(t.err(ParseErrorKind::TrailingInput(t.text.into()))),
            None => Ok(()),
        }
    }
}

fn parse_spin(t: Token<'_>) -> Result<Spin, ParseError> {
    match t.text {
        "A" => Ok(Spin::A),
        "B" => Ok(Spin::B),
        _ => Err(t.err(ParseErrorKind::UnknownSpin(t.text.into()))),
    }
}

fn parse_level(s: &str) -> Option<SpinLevel> {
    match s {
        "-1" => Some(SpinLevel::Minus),
        "0" => Some(SpinLevel::Zero),
        "+1" => Some(SpinLevel::Plus),
        _ => None,
    }
}

fn parse_transition(t: Token<'_>) -> Result<(SpinLevel, SpinLevel), ParseError> {
    let bad = || t.err(ParseErrorKind::UnknownTransition(t.text.into()));
    let (a, b) = t.text.split_once(':').ok_or_else(bad)?;
    match (parse_level(a), parse_level(b)) {
        (Some(a), Some(b)) if a != b => Ok((a, b)),
        _ => Err(bad()),
    }
}

fn parse_float(s: &str) -> Option<f64> {
    // reject words such as `inf` or `nan` that `f64::from_str` accepts
    if !s.starts_with(|c: char| c.is_ascii_digit() || c == '-' || c == '+' || c == '.') {
        return None;
    }
    s.parse::<f64>().ok().filter(|x| x.is_finite())
}

fn angle_value(s: &str) -> Option<f64> {
    match s {
        "pi" => Some(PI),
        "-pi" => Some(-PI),
        _ => {
            if let Some(den) = s.strip_prefix("pi/") {
                let d: u32 = den.parse().ok().filter(|&d| d > 0)?;
                Some(PI / f64::from(d))
            } else {
                parse_float(s)
            }
        }
    }
}

fn parse_angle(t: Token<'_>, text: &str) -> Result<f64, ParseError> {
    angle_value(text).ok_or_else(|| t.err(ParseErrorKind::InvalidAngle(text.into())))
}

fn duration_value(s: &str) -> Option<Duration> {
    let units = [
        ("ns", TimeUnit::Ns),
        ("us", TimeUnit::Us),
        ("µs", TimeUnit::Us),
        ("ms", TimeUnit::Ms),
    ];
    let d = match units.iter().find(|(suffix, _)| s.ends_with(suffix)) {
        Some((suffix, unit)) => Duration::new(parse_float(&s[..s.len() - suffix.len()])?, *unit),
        // a bare zero needs no unit
        None => Duration::new(parse_float(s).filter(|&x| x == 0.0)?, TimeUnit::Us),
    };
    (d.value >= 0.0).then_some(d)
}

fn parse_duration(t: Token<'_>) -> Result<Duration, ParseError> {
    duration_value(t.text).ok_or_else(|| t.err(ParseErrorKind::InvalidDuration(t.text.into())))
}

fn frequency_value(s: &str) -> Option<f64> {
    let units = [("GHz", 1e9), ("MHz", 1e6), ("kHz", 1e3), ("Hz", 1.0)];
    let (suffix, scale) = units.iter().find(|(suffix, _)| s.ends_with(suffix))?;
    Some(parse_float(&s[..s.len() - suffix.len()])? * scale)
}

fn parse_frequency(t: Token<'_>, text: &str) -> Result<f64, ParseError> {
    frequency_value(text).ok_or_else(|| t.err(ParseErrorKind::InvalidFrequency(text.into())))
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn parse_identifier(t: Token<'_>) -> Result<String, ParseError> {
    if is_identifier(t.text) {
        Ok(t.text.into())
    } else {
        Err(t.err(ParseErrorKind::InvalidIdentifier(t.text.into())))
    }
}

fn parse_wait(t: Token<'_>) -> Result<WaitSpec, ParseError> {
    if t.text
        .starts_with(|c: char| c.is_ascii_alphabetic() || c == '_')
    {
        return parse_identifier(t).map(WaitSpec::Sweep);
    }
    // `50us-T`: a '-' followed by an identifier start (so exponents like 1e-3 are skipped)
    let split = t.text.char_indices().find(|&(i, c)| {
        c == '-' && t.text[i + 1..].starts_with(|n: char| n.is_ascii_alphabetic() || n == '_')
    });
    if let Some((i, _)) = split {
        let total = duration_value(&t.text[..i])
            .ok_or_else(|| t.err(ParseErrorKind::InvalidDuration(t.text[..i].into())))?;
        let var = &t.text[i + 1..];
        if !is_identifier(var) {
            return Err(t.err(ParseErrorKind::InvalidIdentifier(var.into())));
        }
        return Ok(WaitSpec::Complement {
            total,
            var: var.into(),
        });
    }
    parse_duration(t).map(WaitSpec::Fixed)
}

fn parse_pulse(cur: &mut Cursor<'_, '_>) -> Result<PulseAction, ParseError> {
    let spin_tok = cur.next("spin")?;
    let target = parse_spin(spin_tok)?;
    let (from, to) = parse_transition(cur.next("transition")?)?;
    let angle_tok = cur.next("angle")?;
    let angle = parse_angle(angle_tok, angle_tok.text)?;
    let (mut phase, mut rabi, mut detune) = (None, None, None);
    while let Some(t) = cur.peek() {
        let Some((key, value)) = t.text.split_once('=') else {
            break;
        };
        cur.pos += 1;
        let repeated = || t.err(ParseErrorKind::InvalidOption(key.into()));
        match key {
            "phase" if phase.is_none() => phase = Some(parse_angle(t, value)?),
            "rabi" if rabi.is_none() => {
                let f = parse_frequency(t, value)?;
                if !(f > 0.0) {
                    return Err(t.err(ParseErrorKind::InvalidFrequency(value.into())));
                }
                rabi = Some(f);
            }
            "detune" if detune.is_none() => detune = Some((t, parse_frequency(t, value)?)),
            _ => return Err(repeated()),
        }
    }
    let mut action = PulseAction::new(target, from, to, angle)
        .map_err(|_| angle_tok.err(ParseErrorKind::InvalidAngle(angle_tok.text.into())))?
        .with_phase(phase.unwrap_or(0.0));
    match (rabi, detune) {
        (Some(rabi_frequency), d) => {
            let mode = PulseMode::Rabi {
                rabi_frequency,
                detuning: d.map_or(0.0, |x| x.1),
            };
            action = action.with_mode(mode).expect("validated drive parameters");
        }
        (None, Some((t, _))) => return Err(t.err(ParseErrorKind::DetuneWithoutRabi)),
        (None, None) => {}
    }
    Ok(action)
}

/// Parses program text. Errors carry the line and column of the offending token.
pub fn parse_program(text: &str) -> Result<PulseProgram, ParseError> {
    let mut events = Vec::new();
    let mut sweep: Option<Sweep> = None;
    let mut detuning = [0.0; 2];
    let mut first_read: Option<Token<'_>> = None;
    let mut symbolic: Vec<(Token<'_>, String)> = Vec::new();
    let mut last_token: Option<Token<'_>> = None;

    for stmt in statements(text) {
        let mut cur = Cursor {
            tokens: &stmt,
            pos: 0,
        };
        let head = cur.next("statement")?;
        last_token = stmt.last().copied();
        if let Some(r) = first_read {
            if head.text != "sweep" && head.text != "detune" {
                return Err(if head.text == "read" {
                    head.err(ParseErrorKind::MultipleReadouts)
                } else {
                    r.err(ParseErrorKind::ReadoutNotLast)
                });
            }
        }
        match head.text {
            "init" => events.push(Event::Init),
            "pulse" => events.push(Event::Pulse(parse_pulse(&mut cur)?)),
            "wait" => {
                let t = cur.next("duration or sweep variable")?;
                let w = parse_wait(t)?;
                if let Some(v) = w.variable() {
                    symbolic.push((t, v.into()));
                }
                events.push(Event::Wait(w));
            }
            "read" => {
                events.push(Event::Read(parse_spin(cur.next("spin")?)?));
                first_read = Some(head);
            }
            "sweep" => {
                if sweep.is_some() {
                    return Err(head.err(ParseErrorKind::MultipleSweeps));
                }
                let variable = parse_identifier(cur.next("sweep variable")?)?;
                let start = parse_duration(cur.next("sweep start")?)?;
                let stop = parse_duration(cur.next("sweep stop")?)?;
                let n_tok = cur.next("number of points")?;
                let points: usize = n_tok
                    .text
                    .parse()
                    .map_err(|_| n_tok.err(ParseErrorKind::InvalidNumber(n_tok.text.into())))?;
                if points == 0 || (points > 1 && !(stop.seconds() > start.seconds())) {
                    return Err(head.err(ParseErrorKind::InvalidSweep));
                }
                sweep = Some(Sweep {
                    variable,
                    start,
                    stop,
                    points,
                });
            }
            "detune" => {
                let spin = parse_spin(cur.next("spin")?)?;
                let t = cur.next("frequency")?;
                detuning[spin.index()] = parse_frequency(t, t.text)?;
            }
            other => return Err(head.err(ParseErrorKind::UnknownStatement(other.into()))),
        }
        cur.finish()?;
    }

    if first_read.is_none() {
        let (line, column) = last_token.map_or((1, 1), |t| (t.line, t.column));
        return Err(ParseError {
            line,
            column,
            kind: ParseErrorKind::MissingReadout,
        });
    }
    for (t, var) in symbolic {
        if sweep.as_ref().map(|s| s.variable.as_str()) != Some(var.as_str()) {
            return Err(t.err(ParseErrorKind::UndefinedVariable(var)));
        }
    }
    PulseProgram::new(events, sweep, detuning)
}

fn render_angle(x: f64) -> String {
    if x == PI {
        "pi".into()
    } else if x == -PI {
        "-pi".into()
    } else if x == PI / 2.0 {
        "pi/2".into()
    } else if x == PI / 4.0 {
        "pi/4".into()
    } else {
        format!("{x}")
    }
}

fn render_level(m: SpinLevel) -> &'static str {
    match m {
        SpinLevel::Minus => "-1",
        SpinLevel::Zero => "0",
        SpinLevel::Plus => "+1",
    }
}

fn render_duration(d: &Duration) -> String {
    format!("{}{}", d.value, d.unit.suffix())
}

/// Canonical text of a program; `parse_program(&render_program(p)) == Ok(p)`.
pub fn render_program(program: &PulseProgram) -> String {
    let mut out = String::new();
    for spin in [Spin::A, Spin::B] {
        let d = program.detuning(spin);
        if d != 0.0 {
            let _ = writeln!(out, "detune {} {}Hz", spin.letter(), d);
        }
    }
    for e in program.events() {
        match e {
            Event::Init => out.push_str("init"),
            Event::Pulse(p) => {
                let _ = write!(
                    out,
                    "pulse {} {}:{} {}",
                    p.target.letter(),
                    render_level(p.transition.0),
                    render_level(p.transition.1),
                    render_angle(p.angle)
                );
                if p.phase != 0.0 {
                    let _ = write!(out, " phase={}", render_angle(p.phase));
                }
                if let PulseMode::Rabi {
                    rabi_frequency,
                    detuning,
                } = p.mode
                {
                    let _ = write!(out, " rabi={rabi_frequency}Hz");
                    if detuning != 0.0 {
                        let _ = write!(out, " detune={detuning}Hz");
                    }
                }
            }
            Event::Wait(WaitSpec::Fixed(d)) => {
                let _ = write!(out, "wait {}", render_duration(d));
            }
            Event::Wait(WaitSpec::Sweep(v)) => {
                let _ = write!(out, "wait {v}");
            }
            Event::Wait(WaitSpec::Complement { total, var }) => {
                let _ = write!(out, "wait {}-{}", render_duration(total), var);
            }
            Event::Read(s) => {
                let _ = write!(out, "read {}", s.letter());
            }
        }
        out.push('\n');
    }
    if let Some(s) = program.sweep() {
        let _ = writeln!(
            out,
            "sweep {} {} {} {}",
            s.variable,
            render_duration(&s.start),
            render_duration(&s.stop),
            s.points
        );
    }
    out
}

impl fmt::Display for PulseProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render_program(self))
    }
}

impl core::str::FromStr for PulseProgram {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_program(s)
    }
}

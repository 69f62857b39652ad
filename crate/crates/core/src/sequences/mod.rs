//! Pulse programs: representation, text syntax, named experiments and execution.

mod dsl;
mod engine;
mod program;
mod templates;

pub use dsl::{parse_program, render_program, ParseError, ParseErrorKind};
pub use engine::{run_program, state_probe, Experiment, PreparedRun, SignalTrace};
pub use program::{Duration, Event, PulseProgram, Sweep, TimeUnit, WaitSpec};
pub use templates::{build_named, Template, TemplateParams};

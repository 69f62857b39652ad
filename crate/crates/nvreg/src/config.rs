//! INI run configuration.
//!
//! ```ini
//! [system]
//! a_axis = 0              ; index into the four <111> axes, or "x, y, z"
//! b_axis = 1
//! displacement = reference  ; or "5.6nm, 6.7nm, 5.1nm"
//! [field]
//! magnitude = 3mT
//! direction = a           ; a | b | x, y, z
//! [sequence]
//! template = deer
//! tau = 100us
//! [run]
//! seed = 1
//! ```
//!
//! Unknown sections and keys are rejected so that typos do not silently fall back to
//! defaults. Relative paths are resolved against the directory of the config file.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use ini::Ini;
use nvreg_core::dynamics::{DecoherenceParams, PulseMode};
use nvreg_core::linalg::Vector3;
use nvreg_core::measure::{Normalization, ReadoutModel};
use nvreg_core::optics::{EmitterModel, FlimConfig};
use nvreg_core::reference;
use nvreg_core::sequences::{
    build_named, parse_program, Experiment, PulseProgram, Template, TemplateParams,
};
use nvreg_core::spincore::{
    deer_frequencies, nv_axis, FieldSetting, NVCenter, SpinLevel, SpinPairSystem,
};
use nvreg_core::PhysicalConstants;

use crate::error::{CliError, CliResult};
use crate::units::{parse_list, parse_quantity, Dimension};

#[derive(Debug, Clone, PartialEq)]
pub enum SequenceSpec {
    Template {
        template: Template,
        params: TemplateParams,
    },
    Program {
        path: PathBuf,
        program: PulseProgram,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitSettings {
    pub dataset: Option<PathBuf>,
    /// Indices into the four <111> axes tried for B.
    pub b_axes: Vec<usize>,
    pub confidence_scale: f64,
    pub max_iterations: usize,
}

impl Default for FitSettings {
    fn default() -> Self {
        Self {
            dataset: None,
            b_axes: vec![0, 1, 2, 3],
            confidence_scale: 1.0,
            max_iterations: 100,
        }
    }
}

/// Lengths in nm and times in ns, as the optics module expects.
#[derive(Debug, Clone, PartialEq)]
pub struct FlimSettings {
    pub image: Option<PathBuf>,
    pub lifetimes: [f64; 2],
    pub distance: f64,
    pub angle_deg: f64,
    pub seed: Option<u64>,
    pub scan: FlimConfig,
}

impl Default for FlimSettings {
    fn default() -> Self {
        Self {
            image: None,
            lifetimes: [11.0, 7.0],
            distance: 8.0,
            angle_deg: 0.0,
            seed: None,
            scan: FlimConfig::default(),
        }
    }
}

impl FlimSettings {
    pub fn emitters(&self) -> CliResult<[EmitterModel; 2]> {
        let (s, c) = self.angle_deg.to_radians().sin_cos();
        let half = self.distance / 2.0;
        Ok([
            EmitterModel::new([-half * c, -half * s], self.lifetimes[0], 1.0)?,
            EmitterModel::new([half * c, half * s], self.lifetimes[1], 1.0)?,
        ])
    }

    /// Applies `key=value` pairs separated by commas or whitespace, as given to
    /// `--synthesize`.
    pub fn apply_overrides(&mut self, spec: &str) -> CliResult<()> {
        for pair in spec
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|p| !p.is_empty())
        {
            let (key, value) = pair
                .split_once('=')
                .ok_or_else(|| CliError::config(format!("expected key=value, got `{pair}`")))?;
            self.set(key.trim(), value.trim())?;
        }
        Ok(())
    }

    fn set(&mut self, key: &str, value: &str) -> CliResult<()> {
        let q = |dim| {
            parse_quantity(value, dim).map_err(|e| CliError::config(format!("flim {key}: {e}")))
        };
        let int = || {
            value
                .parse::<usize>()
                .map_err(|_| CliError::config(format!("flim {key}: `{value}` is not a count")))
        };
        match key {
            "d" | "distance" => self.distance = q(Dimension::Length)? * 1e9,
            "angle" => self.angle_deg = q(Dimension::Dimensionless)?,
            "photons" => self.scan.photons = q(Dimension::Dimensionless)?,
            "psf_fwhm" => self.scan.psf_fwhm = q(Dimension::Length)? * 1e9,
            "pixels" => {
                let n = int()?;
                self.scan.nx = n;
                self.scan.ny = n;
            }
            "pitch" => self.scan.pitch = q(Dimension::Length)? * 1e9,
            "bins" => self.scan.bins = int()?,
            "bin_width" => self.scan.bin_width = q(Dimension::Time)? * 1e9,
            "lifetimes" => {
                // `/` also separates, since commas split `--synthesize` pairs
                let v = parse_list(&value.replace('/', ","), Dimension::Time)
                    .map_err(|e| CliError::config(format!("flim lifetimes: {e}")))?;
                match v.as_slice() {
                    [a, b] => self.lifetimes = [a * 1e9, b * 1e9],
                    _ => return Err(CliError::config("flim lifetimes: expected two values")),
                }
            }
            "seed" => {
                self.seed = Some(value.parse().map_err(|_| {
                    CliError::config(format!("flim seed: `{value}` is not an integer"))
                })?)
            }
            "image" => self.image = Some(PathBuf::from(value)),
            _ => return Err(CliError::config(format!("unknown flim key `{key}`"))),
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub experiment: Experiment,
    pub sequence: Option<SequenceSpec>,
    pub seed: Option<u64>,
    /// `None` entries disable dephasing.
    pub fidelity_t2: Vec<Option<f64>>,
    pub fit: FitSettings,
    pub flim: FlimSettings,
    /// The text the configuration was read from, echoed into output headers.
    pub source: String,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            experiment: Experiment::new(reference::system(), reference::field()),
            sequence: None,
            seed: None,
            fidelity_t2: [2e-6, 110e-6, 200e-6, 1e-3].map(Some).to_vec(),
            fit: FitSettings::default(),
            flim: FlimSettings::default(),
            source: String::new(),
        }
    }
}

/// One INI section, remembering which keys were consumed.
struct Section<'a> {
    name: &'a str,
    props: Option<&'a ini::Properties>,
    used: BTreeSet<&'a str>,
}

impl<'a> Section<'a> {
    fn get(&mut self, key: &'a str) -> Option<&'a str> {
        self.used.insert(key);
        self.props.and_then(|p| p.get(key)).map(str::trim)
    }

    fn err(&self, key: &str, msg: impl std::fmt::Display) -> CliError {
        CliError::config(format!("[{}] {key}: {msg}", self.name))
    }

    fn quantity(&mut self, key: &'a str, dim: Dimension) -> CliResult<Option<f64>> {
        match self.get(key) {
            None => Ok(None),
            Some(v) => parse_quantity(v, dim)
                .map(Some)
                .map_err(|e| self.err(key, e)),
        }
    }

    /// A time that may also be `none`.
    fn optional_time(&mut self, key: &'a str) -> CliResult<Option<f64>> {
        match self.get(key) {
            None | Some("none") => Ok(None),
            Some(v) => parse_quantity(v, Dimension::Time)
                .map(Some)
                .map_err(|e| self.err(key, e)),
        }
    }

    fn parsed<T: FromStr>(&mut self, key: &'a str) -> CliResult<Option<T>> {
        match self.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| self.err(key, format!("cannot parse `{v}`"))),
        }
    }

    fn finish(self) -> CliResult<()> {
        if let Some(p) = self.props {
            for (k, _) in p.iter() {
                if !self.used.contains(k) {
                    return Err(CliError::config(format!(
                        "[{}] unknown key `{k}`",
                        self.name
                    )));
                }
            }
        }
        Ok(())
    }
}

const SECTIONS: [&str; 8] = [
    "system",
    "field",
    "decoherence",
    "readout",
    "sequence",
    "run",
    "fidelity",
    "fit",
];

fn axis(text: &str) -> Result<Vector3, String> {
    if let Ok(k) = text.parse::<usize>() {
        return if k < 4 {
            Ok(nv_axis(k))
        } else {
            Err(format!("axis index {k} out of range 0..4"))
        };
    }
    let v = parse_list(text, Dimension::Dimensionless)?;
    match v.as_slice() {
        [x, y, z] => {
            let v = Vector3::new(*x, *y, *z);
            if v.norm() > 0.0 {
                Ok(v.normalize())
            } else {
                Err("axis must be non-zero".into())
            }
        }
        _ => Err(format!(
            "`{text}` is neither an axis index nor three components"
        )),
    }
}

fn level(text: &str) -> Result<SpinLevel, String> {
    match text {
        "-1" => Ok(SpinLevel::Minus),
        "0" => Ok(SpinLevel::Zero),
        "+1" | "1" => Ok(SpinLevel::Plus),
        _ => Err(format!("`{text}` is not one of -1, 0, +1")),
    }
}

/// `ideal`, or `rabi <freq> [<detuning>]`.
fn pulse_mode(text: &str) -> Result<PulseMode, String> {
    let parts: Vec<&str> = text.split_whitespace().collect();
    match parts.as_slice() {
        ["ideal"] => Ok(PulseMode::Ideal),
        ["rabi", f, rest @ ..] if rest.len() <= 1 => Ok(PulseMode::Rabi {
            rabi_frequency: parse_quantity(f, Dimension::Frequency)?,
            detuning: rest
                .first()
                .map_or(Ok(0.0), |d| parse_quantity(d, Dimension::Frequency))?,
        }),
        _ => Err(format!("`{text}` is not `ideal` or `rabi FREQ [DETUNING]`")),
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base)
    }

    pub fn parse(text: &str, base: &Path) -> CliResult<Self> {
        let ini = Ini::load_from_str(text).map_err(|e| CliError::config(e.to_string()))?;
        for (name, props) in ini.iter() {
            match name {
                None if props.is_empty() => {}
                None => return Err(CliError::config("keys outside of a section")),
                Some(n) if SECTIONS.contains(&n) || n == "flim" => {}
                Some(n) => return Err(CliError::config(format!("unknown section [{n}]"))),
            }
        }
        let section = |name: &'static str| Section {
            name,
            props: ini.section(Some(name)),
            used: BTreeSet::new(),
        };
        let resolve = |p: &str| {
            let p = PathBuf::from(p);
            if p.is_absolute() {
                p
            } else {
                base.join(p)
            }
        };
        let mut cfg = RunConfig {
            source: text.to_owned(),
            ..Default::default()
        };

        let mut s = section("system");
        let center =
            |s: &mut Section<'_>, which: &'static str, default: usize| -> CliResult<NVCenter> {
                let key_axis = if which == "a" { "a_axis" } else { "b_axis" };
                let ax = match s.get(key_axis) {
                    None => nv_axis(default),
                    Some(v) => axis(v).map_err(|e| s.err(key_axis, e))?,
                };
                let (kd, ke) = if which == "a" {
                    ("a_d", "a_e")
                } else {
                    ("b_d", "b_e")
                };
                let d = s
                    .quantity(kd, Dimension::Frequency)?
                    .unwrap_or(NVCenter::DEFAULT_D);
                let e = s.quantity(ke, Dimension::Frequency)?.unwrap_or(0.0);
                Ok(NVCenter::new(ax, d, e)?)
            };
        let a = center(&mut s, "a", 0)?;
        let b = center(&mut s, "b", 1)?;
        let displacement = match s.get("displacement") {
            None | Some("reference") => reference::displacement(),
            Some(v) => match parse_list(v, Dimension::Length)
                .map_err(|e| s.err("displacement", e))?
                .as_slice()
            {
                [x, y, z] => Vector3::new(*x, *y, *z),
                _ => return Err(s.err("displacement", "expected three components")),
            },
        };
        s.finish()?;
        let system = SpinPairSystem::new(a, b, displacement)?;

        let mut s = section("field");
        let field = match (
            s.quantity("magnitude", Dimension::Field)?,
            s.get("direction"),
            s.get("vector"),
        ) {
            (_, _, Some(v)) if s.props.is_some_and(|p| p.contains_key("magnitude")) => {
                return Err(s.err("vector", format!("`{v}` conflicts with magnitude")))
            }
            (None, None, Some(v)) => match parse_list(v, Dimension::Field)
                .map_err(|e| s.err("vector", e))?
                .as_slice()
            {
                [x, y, z] => FieldSetting::new(Vector3::new(*x, *y, *z))?,
                _ => return Err(s.err("vector", "expected three components")),
            },
            (mag, dir, None) => {
                let dir = match dir {
                    None | Some("a") => system.center_a().axis(),
                    Some("b") => system.center_b().axis(),
                    Some(v) => axis(v).map_err(|e| s.err("direction", e))?,
                };
                FieldSetting::along(&dir, mag.unwrap_or(reference::FIELD_T))?
            }
            _ => return Err(s.err("vector", "direction conflicts with vector")),
        };
        s.finish()?;

        let mut s = section("decoherence");
        let decoherence = DecoherenceParams::new(
            s.optional_time("t2_a")?,
            s.optional_time("t2_b")?,
            s.optional_time("t2star_a")?,
            s.optional_time("t2star_b")?,
        )?;
        let samples = s.parsed::<usize>("t2star_samples")?;
        s.finish()?;

        let mut s = section("readout");
        let contrast = s
            .quantity("contrast", Dimension::Dimensionless)?
            .unwrap_or(0.3);
        let budget = s.quantity("photon_budget", Dimension::Dimensionless)?;
        let normalization = match s.get("normalization") {
            None | Some("spin-flip") | Some("spin-flip-normalized") => Normalization::SpinFlip,
            Some("raw") | Some("none") => Normalization::Raw,
            Some(v) => return Err(s.err("normalization", format!("`{v}` is not raw or spin-flip"))),
        };
        let init = [
            s.quantity("init_a", Dimension::Dimensionless)?
                .unwrap_or(1.0),
            s.quantity("init_b", Dimension::Dimensionless)?
                .unwrap_or(1.0),
        ];
        s.finish()?;
        let readout = ReadoutModel::new(contrast, budget, normalization)?;

        let mut s = section("run");
        cfg.seed = s.parsed::<u64>("seed")?;
        s.finish()?;

        let mut experiment = Experiment::new(system, field);
        experiment.decoherence = decoherence;
        experiment.readout = readout;
        experiment.init = init;
        if let Some(n) = samples {
            experiment.t2star_samples = n;
        }

        let mut s = section("sequence");
        cfg.sequence = match (s.get("template"), s.get("program")) {
            (Some(_), Some(_)) => return Err(s.err("program", "give either template or program")),
            (None, Some(p)) => {
                let path = resolve(p);
                let text = std::fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
                let program =
                    parse_program(&text).map_err(|e| CliError::format(&path, e.to_string()))?;
                Some(SequenceSpec::Program { path, program })
            }
            (Some(t), None) => {
                let template: Template = t.parse().map_err(|e| s.err("template", e))?;
                let mut params = TemplateParams {
                    tau: s.quantity("tau", Dimension::Time)?,
                    sweep_stop: s.quantity("sweep_stop", Dimension::Time)?,
                    detuning: s.quantity("detuning", Dimension::Frequency)?.unwrap_or(0.0),
                    ..Default::default()
                };
                if let Some(n) = s.parsed::<usize>("points")? {
                    params.points = n;
                }
                if let Some(p) = s.get("partner") {
                    params.partner = level(p).map_err(|e| s.err("partner", e))?;
                }
                if let Some(c) = s.get("control") {
                    params.control = Some(pulse_mode(c).map_err(|e| s.err("control", e))?);
                }
                params.coupling = match s.get("coupling") {
                    Some("auto") => Some(auto_coupling(&experiment)?),
                    Some(v) => Some(
                        parse_quantity(v, Dimension::Frequency)
                            .map_err(|e| s.err("coupling", e))?,
                    ),
                    None if matches!(template, Template::EntanglePhi | Template::EntanglePsi) => {
                        Some(auto_coupling(&experiment)?)
                    }
                    None => None,
                };
                // surfaces missing parameters as config errors
                build_named(template, &params)?;
                Some(SequenceSpec::Template { template, params })
            }
            (None, None) => {
                for key in [
                    "tau",
                    "sweep_stop",
                    "points",
                    "detuning",
                    "partner",
                    "control",
                    "coupling",
                ] {
                    if s.get(key).is_some() {
                        return Err(s.err(key, "given without a template"));
                    }
                }
                None
            }
        };
        s.finish()?;

        let mut s = section("fidelity");
        if let Some(v) = s.get("t2") {
            cfg.fidelity_t2 = v
                .split(',')
                .map(|p| match p.trim() {
                    "none" => Ok(None),
                    q => parse_quantity(q, Dimension::Time).map(Some),
                })
                .collect::<Result<_, _>>()
                .map_err(|e| s.err("t2", e))?;
        }
        s.finish()?;

        let mut s = section("fit");
        cfg.fit.dataset = s.get("dataset").map(resolve);
        if let Some(v) = s.get("b_axes") {
            cfg.fit.b_axes = v
                .split(',')
                .map(|p| p.trim().parse::<usize>().ok().filter(|k| *k < 4))
                .collect::<Option<_>>()
                .ok_or_else(|| s.err("b_axes", format!("`{v}` is not a list of axis indices")))?;
        }
        if let Some(c) = s.quantity("confidence_scale", Dimension::Dimensionless)? {
            cfg.fit.confidence_scale = c;
        }
        if let Some(n) = s.parsed::<usize>("max_iterations")? {
            cfg.fit.max_iterations = n;
        }
        s.finish()?;

        if let Some(props) = ini.section(Some("flim")) {
            for (k, v) in props.iter() {
                match k {
                    "image" => cfg.flim.image = Some(resolve(v.trim())),
                    _ => cfg.flim.set(k, v.trim())?,
                }
            }
        }

        cfg.experiment = experiment;
        Ok(cfg)
    }

    /// Shot noise or quasi-static detuning draws make the output depend on the seed.
    pub fn is_stochastic(&self) -> bool {
        self.experiment.readout.is_noisy() || self.experiment.decoherence.has_t2star()
    }

    pub fn program(&self) -> CliResult<PulseProgram> {
        match &self.sequence {
            None => Err(CliError::config("[sequence] needs a template or a program")),
            Some(SequenceSpec::Program { program, .. }) => Ok(program.clone()),
            Some(SequenceSpec::Template { template, params }) => {
                Ok(build_named(*template, params)?)
            }
        }
    }
}

/// The `|0> <-> |-1>` shift of A when B flips to `|-1>`.
pub fn auto_coupling(experiment: &Experiment) -> CliResult<f64> {
    let d = deer_frequencies(
        &experiment.system,
        &experiment.field,
        &PhysicalConstants::CODATA,
    )?;
    Ok(d.shift_minus)
}

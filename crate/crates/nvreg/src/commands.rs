//! The five subcommands. Each returns an [`Output`]; writing it to disk or stdout is
//! left to the binary so that the commands can be driven in-process.

use std::path::{Path, PathBuf};

use nvreg_core::dynamics::{fidelity, DecoherenceParams};
use nvreg_core::linalg::{Vec9, C64};
use nvreg_core::locate::{enumerate_sites, fit_geometry, FitOptions, DIAMOND_LATTICE_CONSTANT};
use nvreg_core::measure::fit_modulation;
use nvreg_core::optics::{
    correlate_displacement, fit_amplitudes, synthesize_flim, ImageGrid, Registration,
};
use nvreg_core::sequences::{
    build_named, parse_program, render_program, state_probe, Template, TemplateParams,
};
use nvreg_core::spincore::{nv_axis, pair_index, NVCenter, Spin, SpinLevel};

use crate::config::{auto_coupling, RunConfig, SequenceSpec};
use crate::error::{CliError, CliResult};
use crate::io::{self, Header, Report};
use crate::runner;

/// Command-line inputs shared by the subcommands.
#[derive(Debug, Clone, Default)]
pub struct Options {
    pub config: Option<PathBuf>,
    pub seed: Option<u64>,
    /// Positional inputs: a dataset, a FLIM image, two amplitude CSVs or a program.
    pub inputs: Vec<PathBuf>,
    /// `--synthesize` parameters for `flim`.
    pub synthesize: Option<String>,
    /// Worker threads, 0 for automatic.
    pub threads: usize,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Output {
    /// The data file, written to `--out` or stdout.
    pub primary: String,
    /// Files written next to `--out` as `<stem><suffix>`.
    pub companions: Vec<(String, String)>,
    /// Human-readable lines for stderr.
    pub summary: Vec<String>,
}

fn load(opts: &Options) -> CliResult<RunConfig> {
    match &opts.config {
        Some(p) => RunConfig::load(p),
        None => Ok(RunConfig::default()),
    }
}

fn seed(opts: &Options, cfg: &RunConfig, stochastic: bool) -> CliResult<u64> {
    match (opts.seed.or(cfg.seed), stochastic) {
        (Some(s), _) => Ok(s),
        (None, false) => Ok(0),
        (None, true) => Err(CliError::config(
            "noise is enabled (photon_budget or t2star) but no seed was given; set [run] seed or --seed",
        )),
    }
}

fn input<'a>(opts: &'a Options, fallback: Option<&'a PathBuf>, what: &str) -> CliResult<&'a Path> {
    match opts.inputs.as_slice() {
        [p] => Ok(p),
        [] => fallback
            .map(PathBuf::as_path)
            .ok_or_else(|| CliError::config(format!("no {what} given"))),
        _ => Err(CliError::config(format!("expected one {what}"))),
    }
}

fn describe(cfg: &RunConfig) -> String {
    match &cfg.sequence {
        Some(SequenceSpec::Template { template, .. }) => template.name().to_owned(),
        Some(SequenceSpec::Program { path, .. }) => path.display().to_string(),
        None => "none".into(),
    }
}

/// Simulates the configured sequence and emits the trace CSV.
pub fn cmd_run(opts: &Options) -> CliResult<Output> {
    let cfg = load(opts)?;
    let program = cfg.program()?;
    let seed = seed(opts, &cfg, cfg.is_stochastic())?;
    let pool = runner::pool(opts.threads)?;
    let trace = runner::run_parallel(&program, &cfg.experiment, seed, &pool)?;
    let header = Header::new("run")
        .field("seed", seed)
        .field("sequence", describe(&cfg))
        .field("points", trace.len())
        .block("config", &cfg.source)
        .block("program", &render_program(&program));
    let mut primary = Vec::new();
    io::write_trace(&mut primary, &header, &trace)
        .map_err(|e| CliError::io(Path::new("<output>"), e))?;
    let mut summary = vec![format!("run: {} points, seed {seed}", trace.len())];
    if let Ok(m) = fit_modulation(&trace) {
        if !m.flat {
            summary.push(format!(
                "run: dominant modulation {:.6} kHz, amplitude {:.4}",
                m.frequency / 1e3,
                m.amplitude
            ));
        }
    }
    Ok(Output {
        primary: String::from_utf8(primary).expect("csv is utf-8"),
        companions: Vec::new(),
        summary,
    })
}

/// Fits the register geometry to a DEER dataset; the sites CSV is the companion.
pub fn cmd_fit(opts: &Options) -> CliResult<Output> {
    let cfg = load(opts)?;
    let path = input(opts, cfg.fit.dataset.as_ref(), "dataset")?;
    let dataset = io::read_dataset(path, &io::read_to_string(path)?)?;
    let system = &cfg.experiment.system;
    let b = system.center_b();
    let options = FitOptions {
        constants: cfg.experiment.constants,
        center_a: *system.center_a(),
        b_candidates: cfg
            .fit
            .b_axes
            .iter()
            .map(|&k| NVCenter::new(nv_axis(k), b.d(), b.e()))
            .collect::<Result<_, _>>()?,
        max_iterations: cfg.fit.max_iterations,
    };
    let fit = fit_geometry(&dataset, &options)?;
    let best = &fit.best;
    let scale = cfg.fit.confidence_scale;

    // refuse to list an absurd number of sites when the fit is poorly constrained
    let cell = DIAMOND_LATTICE_CONSTANT.powi(3) / 8.0;
    let volume = 4.0 / 3.0
        * std::f64::consts::PI
        * scale.powi(3)
        * best.covariance.determinant().max(0.0).sqrt();
    if volume / cell > 1e5 {
        return Err(CliError::config(format!(
            "uncertainty ellipsoid holds about {:.0} lattice sites; lower confidence_scale",
            volume / cell
        )));
    }
    let sites = enumerate_sites(&best.displacement, &best.covariance, scale)?;

    let nm = |v: f64| v * 1e9;
    let sigma = best.sigma();
    let mut r = Report::default();
    r.push("entries", dataset.len());
    r.push("x_nm", nm(best.displacement.x));
    r.push("y_nm", nm(best.displacement.y));
    r.push("z_nm", nm(best.displacement.z));
    r.push("sigma_x_nm", nm(sigma.x));
    r.push("sigma_y_nm", nm(sigma.y));
    r.push("sigma_z_nm", nm(sigma.z));
    r.push("distance_nm", nm(best.distance()));
    r.push("lateral_nm", nm(best.lateral()));
    r.push("b_axis_index", cfg.fit.b_axes[best.assignment]);
    let axis = best.center_b.axis();
    r.push("b_axis", format!("{}, {}, {}", axis.x, axis.y, axis.z));
    r.push("chi_square", best.chi_square);
    r.push(
        "residual_rms",
        (best.chi_square / dataset.len() as f64).sqrt(),
    );
    r.push("assignment_margin", fit.assignment_margin());
    r.push("iterations", best.iterations);
    r.push("converged", best.converged);
    r.push("minima", fit.minima.len());
    r.push("confidence_scale", scale);
    r.push("sites", sites.len());

    let header = Header::new("fit")
        .field("dataset", path.display())
        .block("config", &cfg.source);
    let mut sites_csv = Vec::new();
    io::write_sites(&mut sites_csv, &sites).map_err(|e| CliError::io(Path::new("<sites>"), e))?;
    Ok(Output {
        primary: r.render(&header),
        companions: vec![(
            "_sites.csv".into(),
            String::from_utf8(sites_csv).expect("csv is utf-8"),
        )],
        summary: vec![
            format!(
                "fit: r = {:.3} nm (lateral {:.3} nm), B along axis {}, chi-square {:.3}",
                nm(best.distance()),
                nm(best.lateral()),
                cfg.fit.b_axes[best.assignment],
                best.chi_square
            ),
            format!(
                "fit: {} candidate lattice sites within {scale} sigma",
                sites.len()
            ),
        ],
    })
}

fn registration_report(r: &mut Report, reg: &Registration) {
    r.push("dx_nm", reg.shift[0]);
    r.push("dy_nm", reg.shift[1]);
    r.push("sigma_x_nm", reg.uncertainty[0]);
    r.push("sigma_y_nm", reg.uncertainty[1]);
    r.push("distance_nm", reg.distance());
}

fn matrix_csv(values: &[f64], nx: usize) -> String {
    let mut out = Vec::new();
    io::write_matrix(&mut out, values, nx).expect("in-memory write");
    String::from_utf8(out).expect("csv is utf-8")
}

/// Separates two emitters by lifetime and registers their images.
///
/// Inputs: a FLIM image file, `--synthesize` parameters, or two amplitude CSVs that
/// are registered directly.
pub fn cmd_flim(opts: &Options) -> CliResult<Output> {
    let mut cfg = load(opts)?;
    let mut r = Report::default();
    let mut header = Header::new("flim");
    let mut companions = Vec::new();

    if let [a, b] = opts.inputs.as_slice() {
        let (first, nx) = io::read_matrix(a, &io::read_to_string(a)?)?;
        let (second, nx2) = io::read_matrix(b, &io::read_to_string(b)?)?;
        if nx != nx2 || first.len() != second.len() {
            return Err(CliError::format(
                b,
                "amplitude images have different shapes",
            ));
        }
        let grid = ImageGrid {
            nx,
            ny: first.len() / nx,
            pitch: cfg.flim.scan.pitch,
        };
        let reg = correlate_displacement(&first, &second, grid, None)?;
        header = header
            .field("first", a.display())
            .field("second", b.display())
            .field("pitch_nm", grid.pitch);
        registration_report(&mut r, &reg);
        return Ok(Output {
            primary: r.render(&header),
            companions,
            summary: vec![format!(
                "flim: shift ({:.3}, {:.3}) nm",
                reg.shift[0], reg.shift[1]
            )],
        });
    }

    let image = if let Some(spec) = &opts.synthesize {
        if !opts.inputs.is_empty() {
            return Err(CliError::config("--synthesize takes no input file"));
        }
        cfg.flim.apply_overrides(spec)?;
        let seed = opts.seed.or(cfg.flim.seed).or(cfg.seed).ok_or_else(|| {
            CliError::config("synthesis draws photon noise and needs a seed; pass seed=N or --seed")
        })?;
        let f = &cfg.flim;
        header = header
            .field("source", "synthetic")
            .field("seed", seed)
            .field("separation_nm", f.distance)
            .field("angle_deg", f.angle_deg)
            .field("photons", f.scan.photons)
            .field("psf_fwhm_nm", f.scan.psf_fwhm);
        let image = synthesize_flim(&f.emitters()?, &f.scan, seed)?;
        let mut text = Vec::new();
        io::write_flim(&mut text, &image).map_err(|e| CliError::io(Path::new("<image>"), e))?;
        companions.push((
            "_image.flim".into(),
            String::from_utf8(text).expect("ascii"),
        ));
        image
    } else {
        let path = input(opts, cfg.flim.image.as_ref(), "FLIM image")?;
        let file = std::fs::File::open(path).map_err(|e| CliError::io(path, e))?;
        header = header.field("source", path.display());
        io::read_flim(path, std::io::BufReader::new(file))?
    };

    let lifetimes = cfg.flim.lifetimes;
    let amps = fit_amplitudes(&image, lifetimes)?;
    let reg = amps.displacement()?;
    header = header
        .field(
            "lifetimes_ns",
            format!("{}, {}", lifetimes[0], lifetimes[1]),
        )
        .block("config", &cfg.source);
    registration_report(&mut r, &reg);
    r.push("photons_first", amps.first.iter().sum::<f64>());
    r.push("photons_second", amps.second.iter().sum::<f64>());
    companions.push(("_a1.csv".into(), matrix_csv(&amps.first, amps.nx)));
    companions.push(("_a2.csv".into(), matrix_csv(&amps.second, amps.nx)));
    Ok(Output {
        primary: r.render(&header),
        companions,
        summary: vec![format!(
            "flim: shift ({:.3} ± {:.3}, {:.3} ± {:.3}) nm, distance {:.3} nm",
            reg.shift[0],
            reg.uncertainty[0],
            reg.shift[1],
            reg.uncertainty[1],
            reg.distance()
        )],
    })
}

/// `(i|-1,-1> - |0,0>) / sqrt 2`, the state the entangling sequence ends in.
pub fn bell_target() -> Vec9 {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut v = Vec9::zeros();
    v[pair_index(SpinLevel::Minus, SpinLevel::Minus)] = C64::new(0.0, s);
    v[pair_index(SpinLevel::Zero, SpinLevel::Zero)] = C64::new(-s, 0.0);
    v
}

/// Bell-state fidelity of the entangling sequence for each T2 in `[fidelity] t2`.
pub fn cmd_fidelity(opts: &Options) -> CliResult<Output> {
    let cfg = load(opts)?;
    let mut params = match &cfg.sequence {
        Some(SequenceSpec::Template {
            template: Template::EntanglePhi,
            params,
        }) => params.clone(),
        None => TemplateParams::default(),
        Some(_) => {
            return Err(CliError::config(
                "fidelity runs the entangle_phi template; remove [sequence] or use it",
            ))
        }
    };
    if params.sweep_stop.is_some() {
        return Err(CliError::config(
            "fidelity needs a fixed tau; remove sweep_stop",
        ));
    }
    if params.coupling.is_none() {
        params.coupling = Some(auto_coupling(&cfg.experiment)?);
    }
    let program = build_named(Template::EntanglePhi, &params)?;
    let seed = seed(opts, &cfg, cfg.experiment.decoherence.has_t2star())?;
    let prefix = program.events().len() - 1;
    let target = bell_target();
    let base = &cfg.experiment.decoherence;
    let rows = cfg
        .fidelity_t2
        .iter()
        .map(|&t2| {
            let mut exp = cfg.experiment.clone();
            exp.decoherence =
                DecoherenceParams::new(t2, t2, base.t2star(Spin::A), base.t2star(Spin::B))?;
            Ok((
                t2,
                fidelity(&state_probe(&program, &exp, prefix, 0, seed)?, &target),
            ))
        })
        .collect::<CliResult<Vec<_>>>()?;

    let header = Header::new("fidelity")
        .field("seed", seed)
        .field("coupling_hz", params.coupling.expect("set above"))
        .block("config", &cfg.source)
        .block("program", &render_program(&program));
    let mut primary = header.render();
    primary.push_str("t2_s,fidelity\n");
    for (t2, f) in &rows {
        let t2 = t2.map_or_else(|| "inf".to_owned(), |t| t.to_string());
        primary.push_str(&format!("{t2},{f}\n"));
    }
    let summary = rows
        .iter()
        .map(|(t2, f)| match t2 {
            Some(t) => format!("fidelity: T2 = {} us -> F = {f:.6}", t * 1e6),
            None => format!("fidelity: no dephasing -> F = {f:.12}"),
        })
        .collect();
    Ok(Output {
        primary,
        companions: Vec::new(),
        summary,
    })
}

/// Checks a program file and prints its canonical form.
pub fn cmd_parse(opts: &Options) -> CliResult<Output> {
    let path = input(opts, None, "program file")?;
    let text = if path == Path::new("-") {
        std::io::read_to_string(std::io::stdin()).map_err(|e| CliError::io(path, e))?
    } else {
        io::read_to_string(path)?
    };
    let program = parse_program(&text).map_err(|e| {
        let at = if e.line > 0 {
            format!("{}:{}: ", e.line, e.column)
        } else {
            String::new()
        };
        CliError::format(path, format!("{at}{}", e.kind))
    })?;
    Ok(Output {
        primary: render_program(&program),
        companions: Vec::new(),
        summary: vec![match program.sweep() {
            Some(sw) => format!(
                "parse: ok, {} events, sweep {} over {} points",
                program.events().len(),
                sw.variable,
                sw.points
            ),
            None => format!("parse: ok, {} events, no sweep", program.events().len()),
        }],
    })
}

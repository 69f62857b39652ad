use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use nvreg::commands::{self, Options, Output};
use nvreg::{runner, CliError, CliResult};

/// Two-NV-center register toolkit.
///
/// Exit codes: 0 success, 2 configuration or input error, 3 runtime failure,
/// 4 geometry fit did not converge. NVREG_THREADS caps worker threads (0 = auto).
#[derive(Debug, Parser)]
#[command(name = "nvreg", version, about, long_about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// INI configuration file
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output file; companion files are written next to it
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Seed for photon and detuning noise, overrides [run] seed
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
    /// Also print the data to stdout when --out is given
    #[arg(long)]
    stdout: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate the configured pulse sequence and write the trace CSV
    Run {
        #[command(flatten)]
        common: Common,
    },
    /// Fit the register geometry to a DEER dataset CSV
    Fit {
        /// Dataset CSV, overrides [fit] dataset
        dataset: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Register two emitters in a FLIM image
    Flim {
        /// FLIM image, or two amplitude CSVs to register directly
        #[arg(num_args = 0..=2)]
        inputs: Vec<PathBuf>,
        /// Synthesize the image instead, e.g. "d=8nm,seed=1"
        #[arg(long, value_name = "PARAMS")]
        synthesize: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Bell-state fidelity of the entangling sequence versus T2
    Fidelity {
        #[command(flatten)]
        common: Common,
    },
    /// Check a pulse program and print its canonical form
    Parse {
        /// Program file, or - for stdin
        program: PathBuf,
        #[command(flatten)]
        common: Common,
    },
}

fn companion(out: &Path, suffix: &str) -> PathBuf {
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    out.with_file_name(format!("{stem}{suffix}"))
}

fn write_file(path: &Path, text: &str) -> CliResult<()> {
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

fn emit(output: &Output, common: &Common) -> CliResult<()> {
    for line in &output.summary {
        eprintln!("{line}");
    }
    match &common.out {
        Some(out) => {
            write_file(out, &output.primary)?;
            for (suffix, text) in &output.companions {
                let p = companion(out, suffix);
                write_file(&p, text)?;
                eprintln!("wrote {}", p.display());
            }
            if common.stdout {
                print(&output.primary)?;
            }
        }
        None => {
            print(&output.primary)?;
            if !output.companions.is_empty() {
                eprintln!(
                    "note: pass --out to also write the {} companion file(s)",
                    output.companions.len()
                );
            }
        }
    }
    Ok(())
}

fn print(text: &str) -> CliResult<()> {
    let mut stdout = std::io::stdout().lock();
    stdout
        .write_all(text.as_bytes())
        .and_then(|_| stdout.flush())
        .map_err(|e| CliError::io(Path::new("<stdout>"), e))
}

fn run(cli: Cli) -> CliResult<()> {
    let threads = runner::thread_count()?;
    let options = |common: &Common, inputs: Vec<PathBuf>, synthesize: Option<String>| Options {
        config: common.config.clone(),
        seed: common.seed,
        inputs,
        synthesize,
        threads,
    };
    let (output, common) = match &cli.command {
        Command::Run { common } => (commands::cmd_run(&options(common, vec![], None))?, common),
        Command::Fit { dataset, common } => (
            commands::cmd_fit(&options(common, dataset.iter().cloned().collect(), None))?,
            common,
        ),
        Command::Flim {
            inputs,
            synthesize,
            common,
        } => (
            commands::cmd_flim(&options(common, inputs.clone(), synthesize.clone()))?,
            common,
        ),
        Command::Fidelity { common } => (
            commands::cmd_fidelity(&options(common, vec![], None))?,
            common,
        ),
        Command::Parse { program, common } => (
            commands::cmd_parse(&options(common, vec![program.clone()], None))?,
            common,
        ),
    };
    emit(&output, common)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("nvreg: error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

//! Parallel sweep execution. Sweep points are independent and each draws its noise
//! from its own stream, so the result does not depend on the thread count.

use nvreg_core::sequences::{Experiment, PreparedRun, PulseProgram, SignalTrace};

use crate::error::{CliError, CliResult};

pub const THREADS_VAR: &str = "NVREG_THREADS";

/// Worker count from `NVREG_THREADS`; unset or `0` lets rayon decide.
pub fn thread_count() -> CliResult<usize> {
    match std::env::var(THREADS_VAR) {
        Err(_) => Ok(0),
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| CliError::config(format!("{THREADS_VAR}: `{v}` is not a thread count"))),
    }
}

pub fn pool(threads: usize) -> CliResult<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::config(format!("thread pool: {e}")))
}

pub fn run_parallel(
    program: &PulseProgram,
    experiment: &Experiment,
    seed: u64,
    pool: &rayon::ThreadPool,
) -> CliResult<SignalTrace> {
    use rayon::prelude::*;
    let run = PreparedRun::new(program, experiment, seed)?;
    let values = pool.install(|| {
        (0..run.len())
            .into_par_iter()
            .map(|i| run.evaluate(i))
            .collect::<Result<Vec<_>, _>>()
    })?;
    Ok(run.into_trace(values))
}

//! Parallel trial execution.
//!
//! Trials are independent and each owns its RNG stream, so the parallel
//! result vector is identical to the sequential one, whatever the pool size.

use prqs_core::numerics::QuadratureSpec;
use prqs_core::simulate::{
    run_trial_with, summarize, EmpiricalSummary, ProtocolConfig, TrialResult,
};
use rayon::prelude::*;
use rayon::{ThreadPool, ThreadPoolBuilder};

use crate::LabError;

/// Environment variable holding the worker count; unset or `0` means one
/// worker per available core.
pub const THREADS_ENV: &str = "PRQS_THREADS";

/// Resolves the worker count: explicit value first, then [`THREADS_ENV`].
pub fn resolve_threads(explicit: Option<usize>) -> Result<usize, LabError> {
    if let Some(n) = explicit {
        return Ok(n);
    }
    match std::env::var(THREADS_ENV) {
        Ok(raw) if !raw.trim().is_empty() => raw.trim().parse().map_err(|_| {
            LabError::Usage(format!(
                "{THREADS_ENV} must be a non-negative integer, got {raw:?}"
            ))
        }),
        _ => Ok(0),
    }
}

pub fn build_pool(threads: usize) -> Result<ThreadPool, LabError> {
    Ok(ThreadPoolBuilder::new().num_threads(threads).build()?)
}

/// Runs trials `0..config.n_trials`, returned in trial-index order.
pub fn run_trials(
    config: &ProtocolConfig,
    spec: &QuadratureSpec,
) -> Result<Vec<TrialResult>, LabError> {
    config.validate()?;
    let trials = (0..config.n_trials)
        .into_par_iter()
        .map(|i| run_trial_with(config, i, spec))
        .collect::<prqs_core::Result<Vec<_>>>()?;
    Ok(trials)
}

/// Parallel counterpart of `prqs_core::simulate::run_experiment`.
pub fn run_experiment(
    config: &ProtocolConfig,
    spec: &QuadratureSpec,
) -> Result<(Vec<TrialResult>, EmpiricalSummary), LabError> {
    let trials = run_trials(config, spec)?;
    let summary = summarize(config, &trials)?;
    Ok((trials, summary))
}

//! Parallel experiment execution.
//!
//! Trials are independent: trial `i` depends only on the experiment config
//! and `i`, so results are identical for any thread count. Each trial's log
//! is written by the worker that ran it; reports are written after the
//! reduction by a single writer.

use std::path::{Path, PathBuf};

use berryreach_core::harness::{run_trial, summarize, ExperimentConfig, ExperimentSummary, TrialResult};
use rayon::prelude::*;
use rayon::ThreadPool;

use crate::config::SuiteConfig;
use crate::error::AppError;
use crate::io::{create_dir, write_log};
use crate::report;

#[derive(Debug, Clone)]
pub struct ExperimentRun {
    pub summary: ExperimentSummary,
    /// In trial order.
    pub results: Vec<TrialResult>,
}

pub fn thread_pool(jobs: usize) -> Result<ThreadPool, AppError> {
    if jobs == 0 {
        return Err(AppError::config("--jobs must be at least 1"));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| AppError::config(format!("thread pool: {e}")))
}

/// Runs every trial of `config`. With `out_dir`, each trial's log goes to
/// `out_dir/<log_ref>`.
pub fn run_experiment(
    config: &ExperimentConfig,
    pool: &ThreadPool,
    out_dir: Option<&Path>,
) -> Result<ExperimentRun, AppError> {
    config.validate()?;
    let results: Vec<TrialResult> = pool.install(|| {
        (0..config.trials)
            .into_par_iter()
            .map(|i| {
                let outcome = run_trial(config, i)?;
                if let Some(dir) = out_dir {
                    write_log(&dir.join(&outcome.result.log_ref), &outcome.log)?;
                }
                Ok::<_, AppError>(outcome.result)
            })
            .collect::<Result<_, _>>()
    })?;
    Ok(ExperimentRun {
        summary: summarize(config.scenario, &results),
        results,
    })
}

pub struct SuiteOutput {
    pub runs: Vec<ExperimentRun>,
    pub table: String,
    pub out_dir: PathBuf,
}

/// Runs a suite and writes `summary.csv`, `failures.csv`, `trials.csv` and
/// `trials/*.jsonl` under `out_dir`.
pub fn run_suite(suite: &SuiteConfig, jobs: usize, out_dir: &Path, write_logs: bool) -> Result<SuiteOutput, AppError> {
    let pool = thread_pool(jobs)?;
    create_dir(out_dir)?;
    if write_logs {
        create_dir(&out_dir.join("trials"))?;
    }
    let mut runs = Vec::with_capacity(suite.experiments.len());
    for exp in &suite.experiments {
        runs.push(run_experiment(exp, &pool, write_logs.then_some(out_dir))?);
    }
    let table = report::emit_report(&runs, out_dir)?;
    Ok(SuiteOutput {
        runs,
        table,
        out_dir: out_dir.to_path_buf(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use berryreach_core::harness::ScenarioKind;

    #[test]
    fn thread_count_does_not_change_results() {
        let cfg = ExperimentConfig::new(ScenarioKind::Baseline, 6, 3);
        let a = run_experiment(&cfg, &thread_pool(1).unwrap(), None).unwrap();
        let b = run_experiment(&cfg, &thread_pool(4).unwrap(), None).unwrap();
        assert_eq!(a.results, b.results);
        assert_eq!(a.summary, b.summary);
    }

    #[test]
    fn zero_jobs_rejected() {
        assert!(matches!(thread_pool(0), Err(AppError::Config(_))));
    }
}

//! Command-line interface.
//!
//! Exit codes: 0 success (failed trials are data, not errors), 2 bad
//! configuration or arguments, 3 file-system error, 4 log or scene schema
//! mismatch.

use std::io::Write;
use std::path::PathBuf;

use berryreach_core::harness::{
    run_trial_in, trial_scene, ExperimentConfig, ScenarioKind, SceneSpec,
};
use berryreach_core::scene::PlacementClass;
use clap::{ArgGroup, Args, Parser, Subcommand};

use crate::config::{bundled_suite, load_suite, scenario_from_name, SuiteConfig};
use crate::error::AppError;
use crate::io::{read_scene, read_text, write_log, write_scene};
use crate::replay::{replay, state_label};
use crate::runner::run_suite;

/// Default output directory when `--out-dir` is not given.
pub const OUT_DIR_ENV: &str = "BERRYREACH_OUT_DIR";

#[derive(Debug, Parser)]
#[command(name = "berryreach", version, about = "Simulated eye-in-hand berry reaching experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate the scene a trial would see and write it as JSON
    GenScene(GenSceneArgs),
    /// Run one trial and print its state transitions
    RunTrial(RunTrialArgs),
    /// Run every scenario of a suite config and write CSV reports and logs
    RunSuite(RunSuiteArgs),
    /// Print a trial log as a transcript and check its invariants
    Replay(ReplayArgs),
    /// Check a suite config or scene file without running anything
    Validate(ValidateArgs),
}

fn parse_scenario(s: &str) -> Result<ScenarioKind, String> {
    scenario_from_name(s).map_err(|e| match e {
        AppError::Config(m) => m,
        other => other.to_string(),
    })
}

#[derive(Debug, Args)]
pub struct GenSceneArgs {
    /// Scenario whose scene generator to use
    #[arg(long, value_parser = parse_scenario)]
    pub scenario: ScenarioKind,
    /// Master seed of the experiment
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Trial index within the experiment
    #[arg(long, default_value_t = 0)]
    pub trial: usize,
    /// Output JSON path
    #[arg(long)]
    pub out: PathBuf,
    /// Corridor width between row faces in meters (high_tunnel only)
    #[arg(long)]
    pub row_spacing: Option<f64>,
    /// Take scenario parameters from this suite config
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RunTrialArgs {
    /// Scenario whose parameters and scene generator to use
    #[arg(long, value_parser = parse_scenario)]
    pub scenario: ScenarioKind,
    /// Master seed of the experiment
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Trial index within the experiment
    #[arg(long, default_value_t = 0)]
    pub trial: usize,
    /// Take scenario parameters from this suite config
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Run against this scene file instead of the generated scene
    #[arg(long)]
    pub scene: Option<PathBuf>,
    /// Write the per-tick JSONL log here
    #[arg(long)]
    pub log: Option<PathBuf>,
    /// Print every logged tick, not only state changes and events
    #[arg(long)]
    pub verbose: bool,
}

#[derive(Debug, Args)]
pub struct RunSuiteArgs {
    /// Suite config; the bundled eight-scenario suite if omitted
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory
    #[arg(long, env = OUT_DIR_ENV, default_value = "berryreach-out")]
    pub out_dir: PathBuf,
    /// Worker threads [default: available cores]
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Override the trial count of every scenario
    #[arg(long)]
    pub trials: Option<usize>,
    /// Override the master seed of every scenario
    #[arg(long)]
    pub seed: Option<u64>,
    /// Skip writing per-trial JSONL logs
    #[arg(long)]
    pub no_logs: bool,
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    /// JSONL log written by run-trial or run-suite
    #[arg(long)]
    pub trial_log: PathBuf,
    /// Print only state changes and events
    #[arg(long)]
    pub brief: bool,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("input").required(true).multiple(true).args(["config", "scene"])))]
pub struct ValidateArgs {
    /// Suite config to check
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Scene JSON to check
    #[arg(long)]
    pub scene: Option<PathBuf>,
}

pub fn run(cli: Cli) -> Result<(), AppError> {
    let mut out = std::io::stdout().lock();
    match cli.command {
        Command::GenScene(a) => gen_scene(a, &mut out),
        Command::RunTrial(a) => run_trial_cmd(a, &mut out),
        Command::RunSuite(a) => run_suite_cmd(a, &mut out),
        Command::Replay(a) => replay_cmd(a, &mut out),
        Command::Validate(a) => validate(a, &mut out),
    }?;
    out.flush()?;
    Ok(())
}

fn experiment(scenario: ScenarioKind, seed: u64, config: Option<&PathBuf>) -> Result<ExperimentConfig, AppError> {
    let mut exp = ExperimentConfig::new(scenario, 1, seed);
    if let Some(path) = config {
        let suite = load_suite(path)?;
        let found = suite
            .experiments
            .into_iter()
            .find(|e| e.scenario == scenario)
            .ok_or_else(|| AppError::config(format!("{} does not list {}", path.display(), scenario.name())))?;
        exp.params = found.params;
    }
    Ok(exp)
}

fn gen_scene(a: GenSceneArgs, out: &mut impl Write) -> Result<(), AppError> {
    let mut exp = experiment(a.scenario, a.seed, a.config.as_ref())?;
    if let Some(w) = a.row_spacing {
        match &mut exp.params.scene {
            SceneSpec::HighTunnel(t) => t.row_spacing = w,
            _ => return Err(AppError::config("--row-spacing applies to high_tunnel only")),
        }
    }
    let scene = trial_scene(&exp, a.trial)?;
    write_scene(&a.out, &scene, Some(a.scenario.name()))?;
    writeln!(
        out,
        "{} berries ({} periphery, {} under canopy), {} obstacles -> {}",
        scene.berries.len(),
        scene.count_class(PlacementClass::Periphery),
        scene.count_class(PlacementClass::UnderCanopy),
        scene.obstacles.len(),
        a.out.display()
    )?;
    Ok(())
}

fn run_trial_cmd(a: RunTrialArgs, out: &mut impl Write) -> Result<(), AppError> {
    let exp = experiment(a.scenario, a.seed, a.config.as_ref())?;
    exp.validate()?;
    let scene = match &a.scene {
        Some(p) => read_scene(p)?.scene,
        None => trial_scene(&exp, a.trial)?,
    };
    let outcome = run_trial_in(&exp, a.trial, &scene)?;
    let mut last = None;
    for rec in &outcome.log {
        let changed = last.as_ref() != Some(&rec.state);
        if a.verbose || changed || rec.event.is_some() {
            let event = rec.event.as_deref().map(|e| format!("  [{e}]")).unwrap_or_default();
            writeln!(out, "tick {:>5}  t={:>8.3}s  {}{}", rec.tick, rec.time_s, rec.state.name(), event)?;
        }
        last = Some(rec.state);
    }
    if let Some(p) = &a.log {
        write_log(p, &outcome.log)?;
    }
    let r = &outcome.result;
    writeln!(
        out,
        "{} trial {}: {}{} in {:.2} s, target {} ({})",
        r.scenario.name(),
        r.trial_index,
        if r.success { "reached" } else { "failed" },
        r.failure.map(|m| format!(" ({})", m.name())).unwrap_or_default(),
        r.reach_time_s,
        r.target_id,
        match r.target_class {
            PlacementClass::Periphery => "periphery",
            PlacementClass::UnderCanopy => "under canopy",
        }
    )?;
    writeln!(out, "{}", serde_json::to_string(r).expect("result serializes"))?;
    Ok(())
}

fn run_suite_cmd(a: RunSuiteArgs, out: &mut impl Write) -> Result<(), AppError> {
    let mut suite: SuiteConfig = match &a.config {
        Some(p) => load_suite(p)?,
        None => bundled_suite(),
    };
    for e in &mut suite.experiments {
        if let Some(n) = a.trials {
            e.trials = n;
        }
        if let Some(s) = a.seed {
            e.master_seed = s;
        }
        e.validate()?;
    }
    let jobs = match a.jobs {
        Some(j) => j,
        None => std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1),
    };
    let done = run_suite(&suite, jobs, &a.out_dir, !a.no_logs)?;
    write!(out, "{}", done.table)?;
    writeln!(out, "wrote {}", done.out_dir.display())?;
    Ok(())
}

fn replay_cmd(a: ReplayArgs, out: &mut impl Write) -> Result<(), AppError> {
    let text = read_text(&a.trial_log)?;
    let t = replay(&text)?;
    let mut last_state = None;
    for line in &t.lines {
        if !a.brief || last_state != Some(line.state) || line.has_event {
            writeln!(out, "{}", line.text)?;
        }
        last_state = Some(line.state);
    }
    match &t.terminal {
        Some(s) => writeln!(out, "terminal: {}", state_label(s))?,
        None => writeln!(out, "terminal: none")?,
    }
    if !t.violations.is_empty() {
        eprintln!("warning: {} log invariant violation(s)", t.violations.len());
        for v in &t.violations {
            eprintln!("  {v}");
        }
    }
    Ok(())
}

fn validate(a: ValidateArgs, out: &mut impl Write) -> Result<(), AppError> {
    if let Some(p) = &a.config {
        let suite = load_suite(p)?;
        for e in &suite.experiments {
            writeln!(out, "{:<16} trials {:>5}  seed {}", e.scenario.name(), e.trials, e.master_seed)?;
        }
        writeln!(out, "{}: ok", p.display())?;
    }
    if let Some(p) = &a.scene {
        let f = read_scene(p)?;
        writeln!(
            out,
            "{}: ok, {} berries, {} obstacles",
            p.display(),
            f.scene.berries.len(),
            f.scene.obstacles.len()
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }
}

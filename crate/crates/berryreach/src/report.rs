//! Table-shaped reports.
//!
//! `summary.csv`: `scenario,label,n,successes,success_rate_pct,mean_time_s,
//! std_time_s,mean_terminal_error_m,under_canopy_collisions`. Times are over
//! successful trials; empty cells mean "no data".
//!
//! `failures.csv`: `scenario` then one count column per failure mode and
//! `failures`, the row total. Suitable for a stacked histogram.
//!
//! `trials.csv`: one row per trial with its outcome and log path.
//!
//! Rows follow table order whatever order the runs arrive in. Floats are
//! printed with fixed precision so reruns are byte-identical.

use std::path::Path;

use berryreach_core::harness::{ExperimentSummary, FailureMode, ScenarioKind};

use crate::error::AppError;
use crate::io::write_text;
use crate::runner::ExperimentRun;

fn table_rank(kind: ScenarioKind) -> usize {
    ScenarioKind::ALL.iter().position(|k| *k == kind).unwrap_or(usize::MAX)
}

fn ordered(runs: &[ExperimentRun]) -> Vec<&ExperimentRun> {
    let mut v: Vec<_> = runs.iter().collect();
    v.sort_by_key(|r| table_rank(r.summary.scenario));
    v
}

fn opt(v: Option<f64>, digits: usize) -> String {
    v.map(|x| format!("{x:.digits$}")).unwrap_or_default()
}

fn to_string(w: csv::Writer<Vec<u8>>) -> String {
    String::from_utf8(w.into_inner().expect("in-memory writer")).expect("utf-8 csv")
}

pub fn summary_csv(summaries: &[&ExperimentSummary]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "scenario",
        "label",
        "n",
        "successes",
        "success_rate_pct",
        "mean_time_s",
        "std_time_s",
        "mean_terminal_error_m",
        "under_canopy_collisions",
    ])
    .expect("in-memory write");
    for s in summaries {
        w.write_record([
            s.scenario.name().to_string(),
            s.scenario.label().to_string(),
            s.n.to_string(),
            s.successes.to_string(),
            format!("{:.2}", s.success_rate_pct),
            opt(s.mean_time_s, 3),
            opt(s.std_time_s, 3),
            opt(s.mean_terminal_error_m, 4),
            s.under_canopy_collisions.to_string(),
        ])
        .expect("in-memory write");
    }
    to_string(w)
}

pub fn failures_csv(summaries: &[&ExperimentSummary]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["scenario".to_string()];
    header.extend(FailureMode::ALL.iter().map(|m| m.name().to_string()));
    header.push("failures".into());
    w.write_record(&header).expect("in-memory write");
    for s in summaries {
        let mut row = vec![s.scenario.name().to_string()];
        row.extend(FailureMode::ALL.iter().map(|m| s.failure_count(*m).to_string()));
        row.push((s.n - s.successes).to_string());
        w.write_record(&row).expect("in-memory write");
    }
    to_string(w)
}

pub fn trials_csv(runs: &[&ExperimentRun]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "scenario",
        "trial",
        "seed",
        "success",
        "failure",
        "reach_time_s",
        "target_id",
        "target_class",
        "reached_id",
        "ticks",
        "terminal_error_m",
        "collision_object",
        "log",
    ])
    .expect("in-memory write");
    for run in runs {
        for r in &run.results {
            w.write_record([
                r.scenario.name().to_string(),
                r.trial_index.to_string(),
                r.seed.to_string(),
                r.success.to_string(),
                r.failure.map(|m| m.name().to_string()).unwrap_or_default(),
                format!("{:.3}", r.reach_time_s),
                r.target_id.to_string(),
                match r.target_class {
                    berryreach_core::scene::PlacementClass::Periphery => "periphery".into(),
                    berryreach_core::scene::PlacementClass::UnderCanopy => "under_canopy".into(),
                },
                r.reached_id.map(|i| i.to_string()).unwrap_or_default(),
                r.ticks.to_string(),
                opt(r.terminal_error_m, 4),
                r.collision_object.clone().unwrap_or_default(),
                r.log_ref.clone(),
            ])
            .expect("in-memory write");
        }
    }
    to_string(w)
}

/// Fixed-width text version of the summary table.
pub fn format_table(summaries: &[&ExperimentSummary]) -> String {
    let mut out = format!("{:<30} {:>11} {:>17} {:>6}\n", "Scenario", "Success (%)", "Time (s)", "n");
    for s in summaries {
        let time = match (s.mean_time_s, s.std_time_s) {
            (Some(m), Some(sd)) => format!("{m:.2} ± {sd:.2}"),
            _ => "--".to_string(),
        };
        out.push_str(&format!(
            "{:<30} {:>11.1} {:>17} {:>6}\n",
            s.scenario.label(),
            s.success_rate_pct,
            time,
            s.n
        ));
    }
    out
}

/// Writes the three CSV files and returns the text table.
pub fn emit_report(runs: &[ExperimentRun], out_dir: &Path) -> Result<String, AppError> {
    let runs = ordered(runs);
    let summaries: Vec<&ExperimentSummary> = runs.iter().map(|r| &r.summary).collect();
    write_text(&out_dir.join("summary.csv"), &summary_csv(&summaries))?;
    write_text(&out_dir.join("failures.csv"), &failures_csv(&summaries))?;
    write_text(&out_dir.join("trials.csv"), &trials_csv(&runs))?;
    Ok(format_table(&summaries))
}

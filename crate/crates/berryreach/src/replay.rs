//! Human-readable transcripts of trial logs, with invariant checks.

use berryreach_core::pipeline::{LogRecord, LOG_SCHEMA_VERSION};
use berryreach_core::servoing::ServoState;

use crate::error::AppError;

#[derive(Debug, Clone)]
pub struct Line {
    pub text: String,
    pub state: ServoState,
    pub has_event: bool,
}

#[derive(Debug, Clone, Default)]
pub struct Transcript {
    pub lines: Vec<Line>,
    /// Broken log invariants, one message each. The transcript is still
    /// produced when these are present.
    pub violations: Vec<String>,
    pub terminal: Option<ServoState>,
}

pub fn state_label(s: &ServoState) -> String {
    match s {
        ServoState::Failed(m) => format!("Failed({})", m.name()),
        other => other.name().to_string(),
    }
}

fn describe(rec: &LogRecord) -> String {
    let mut line = format!("tick {:>5}  t={:>8.3}s  {:<12}", rec.tick, rec.time_s, state_label(&rec.state));
    if let Some([eu, ev]) = rec.error_px {
        line.push_str(&format!("  err=({eu:+7.1},{ev:+7.1})px"));
    }
    let t = rec.twist;
    if t.iter().any(|v| *v != 0.0) {
        line.push_str(&format!(
            "  v=({:+.3},{:+.3},{:+.3}) w=({:+.3},{:+.3},{:+.3})",
            t[0], t[1], t[2], t[3], t[4], t[5]
        ));
    }
    if let Some(e) = &rec.event {
        line.push_str(&format!("  [{e}]"));
    }
    line
}

/// Parses a JSONL trial log. Fails on an empty log or a schema version
/// mismatch; anything else wrong is reported as a violation.
pub fn replay(text: &str) -> Result<Transcript, AppError> {
    let mut out = Transcript::default();
    let mut prev: Option<LogRecord> = None;
    let mut any = false;
    for (n, raw) in text.lines().enumerate() {
        let n = n + 1;
        if raw.trim().is_empty() {
            continue;
        }
        any = true;
        let value: serde_json::Value = match serde_json::from_str(raw) {
            Ok(v) => v,
            Err(e) => {
                out.violations.push(format!("line {n}: not JSON ({e})"));
                continue;
            }
        };
        match value.get("schema").and_then(|v| v.as_u64()) {
            Some(v) if v == LOG_SCHEMA_VERSION as u64 => {}
            other => {
                return Err(AppError::Schema(format!(
                    "line {n}: log schema {other:?}, expected {LOG_SCHEMA_VERSION}"
                )))
            }
        }
        let rec: LogRecord = match serde_json::from_value(value) {
            Ok(r) => r,
            Err(e) => {
                out.violations.push(format!("line {n}: malformed record ({e})"));
                continue;
            }
        };
        if !rec.time_s.is_finite() || rec.twist.iter().chain(rec.q.iter()).any(|v| !v.is_finite()) {
            out.violations.push(format!("line {n}: non-finite value"));
        }
        if let Some(p) = &prev {
            if rec.time_s < p.time_s {
                out.violations
                    .push(format!("line {n}: time went backwards ({} -> {})", p.time_s, rec.time_s));
            }
            if rec.tick < p.tick {
                out.violations.push(format!("line {n}: tick went backwards ({} -> {})", p.tick, rec.tick));
            }
            if p.state.is_terminal() {
                out.violations
                    .push(format!("line {n}: record after terminal state {}", state_label(&p.state)));
            } else if !p.state.can_transition(&rec.state) {
                out.violations.push(format!(
                    "line {n}: illegal transition {} -> {}",
                    state_label(&p.state),
                    state_label(&rec.state)
                ));
            }
        }
        out.lines.push(Line {
            text: describe(&rec),
            state: rec.state,
            has_event: rec.event.is_some(),
        });
        prev = Some(rec);
    }
    if !any {
        return Err(AppError::Schema("empty trial log".into()));
    }
    match &prev {
        Some(p) if p.state.is_terminal() => out.terminal = Some(p.state),
        Some(_) => out.violations.push("log does not end in a terminal state".into()),
        None => {}
    }
    Ok(out)
}

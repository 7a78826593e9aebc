use serde::Serialize;

use super::tags::{parse_tags, resolve_moves, TagError};
use crate::protocol::{initial_session, Move, ProtocolError};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FailureReason {
    Protocol(ProtocolError),
    Parse(TagError),
}

impl FailureReason {
    /// Short machine-readable code, e.g. `IllegalMove(begin_argument)`.
    pub fn code(&self) -> String {
        match self {
            FailureReason::Protocol(ProtocolError::IllegalMove { kind, .. }) => format!("IllegalMove({kind})"),
            FailureReason::Protocol(ProtocolError::TopicMismatch { .. }) => "TopicMismatch".into(),
            FailureReason::Protocol(ProtocolError::StaleTopic { .. }) => "StaleTopic".into(),
            FailureReason::Protocol(ProtocolError::InvalidMetadata { .. }) => "InvalidMetadata".into(),
            FailureReason::Protocol(ProtocolError::NotTerminalEligible) => "NotTerminalEligible".into(),
            FailureReason::Parse(TagError::UnknownTag { token, .. }) => format!("UnknownTag({token})"),
            FailureReason::Parse(TagError::MalformedBracket { .. }) => "MalformedBracket".into(),
        }
    }
}

/// Verdict of replaying a trace through the engine.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationReport {
    pub valid: bool,
    /// 1-based ordinal of the first rejected move.
    pub failure_index: Option<usize>,
    pub reason: Option<FailureReason>,
    /// Valid and terminal-eligible after the last move.
    pub complete: bool,
    /// Dialogues closed explicitly, plus those closed implicitly at the end
    /// of a complete trace.
    pub dialogues_closed: usize,
}

impl ValidationReport {
    fn failed(index: usize, reason: FailureReason, dialogues_closed: usize) -> Self {
        ValidationReport {
            valid: false,
            failure_index: Some(index),
            reason: Some(reason),
            complete: false,
            dialogues_closed,
        }
    }
}

/// Replays `moves` from the initial state. Protocol violations are reported,
/// never raised.
pub fn validate_trace(moves: &[Move]) -> ValidationReport {
    let mut s = initial_session();
    for (i, m) in moves.iter().enumerate() {
        if let Err(e) = s.apply(m) {
            return ValidationReport::failed(i + 1, FailureReason::Protocol(e), s.completed_dialogues());
        }
    }
    let complete = s.is_terminal_eligible();
    let dialogues_closed = if complete {
        s.completed_dialogues() + s.depth().min(1)
    } else {
        s.completed_dialogues()
    };
    ValidationReport {
        valid: true,
        failure_index: None,
        reason: None,
        complete,
        dialogues_closed,
    }
}

/// Parses, resolves and validates one tag trace.
pub fn validate_tags(text: &str) -> ValidationReport {
    match parse_tags(text) {
        Ok(tags) => validate_trace(&resolve_moves(&tags)),
        Err(e) => ValidationReport::failed(e.position(), FailureReason::Parse(e), 0),
    }
}

/// One line of the line-delimited JSON validation output.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationRecord {
    pub trace: String,
    pub valid: bool,
    pub failure_index: Option<usize>,
    pub reason: Option<String>,
    pub complete: bool,
}

impl ValidationRecord {
    pub fn new(trace: impl Into<String>, report: &ValidationReport) -> Self {
        ValidationRecord {
            trace: trace.into(),
            valid: report.valid,
            failure_index: report.failure_index,
            reason: report.reason.as_ref().map(FailureReason::code),
            complete: report.complete,
        }
    }
}

/// Traces of a tag trace file: one per line, `#` starts a comment, blank
/// lines are skipped. Yields `(line number, trace text)`.
pub fn trace_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, line)| {
        let body = line.split('#').next().unwrap_or("").trim();
        (!body.is_empty()).then_some((i + 1, body))
    })
}

/// Validates every trace of a tag trace file.
pub fn validate_trace_file(text: &str) -> Vec<ValidationRecord> {
    trace_lines(text)
        .map(|(_, trace)| ValidationRecord::new(trace, &validate_tags(trace)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::{MoveKind, ProtocolError};

    #[test]
    fn question_explain_affirm_is_complete() {
        let r = validate_tags("[BQ][E][AF]");
        assert!(r.valid && r.complete);
        assert_eq!(r.dialogues_closed, 1);
    }

    #[test]
    fn argument_without_termination_rule_is_rejected_at_four() {
        let r = validate_tags("[BE][AF][RQ][BA][EA]");
        assert!(!r.valid);
        assert_eq!(r.failure_index, Some(4));
        assert!(matches!(
            r.reason,
            Some(FailureReason::Protocol(ProtocolError::IllegalMove {
                kind: MoveKind::BeginArgument,
                ..
            }))
        ));
        assert_eq!(r.reason.unwrap().code(), "IllegalMove(begin_argument)");
    }

    #[test]
    fn open_question_is_a_valid_prefix_only() {
        let r = validate_tags("[BQ]");
        assert!(r.valid);
        assert!(!r.complete);
    }

    #[test]
    fn reference_dialogue_is_complete() {
        let r = validate_tags("[BE][RQ][FE][BA][AA][EA]");
        assert!(r.valid && r.complete);
        assert_eq!(r.dialogues_closed, 1);
    }

    #[test]
    fn parse_failures_are_reports() {
        let r = validate_tags("[BQ][XX]");
        assert_eq!(r.failure_index, Some(2));
        assert_eq!(r.reason.unwrap().code(), "UnknownTag(XX)");
        let r = validate_tags("[BQ");
        assert!(!r.valid);
    }

    #[test]
    fn invariants_hold() {
        for t in ["", "[BQ]", "[BA]", "[BQ][E][EE][BQ][E][AF]", "[E]"] {
            let r = validate_tags(t);
            assert_eq!(r.valid, r.failure_index.is_none(), "{t}");
            assert!(!r.complete || r.valid, "{t}");
        }
    }

    #[test]
    fn file_format() {
        let text = "# fixtures\n[BQ][E][AF]\n\n[BE][AF][RQ][BA][EA]  # the illegal one\n";
        let recs = validate_trace_file(text);
        assert_eq!(recs.len(), 2);
        assert_eq!(recs[1].trace, "[BE][AF][RQ][BA][EA]");
        let line = serde_json::to_string(&recs[1]).unwrap();
        assert_eq!(
            line,
            r#"{"trace":"[BE][AF][RQ][BA][EA]","valid":false,"failure_index":4,"reason":"IllegalMove(begin_argument)","complete":false}"#
        );
    }
}

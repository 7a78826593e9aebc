//! Coded transcripts: explanation dialogues annotated segment by segment with
//! one of seventeen codes.
//!
//! File format (UTF-8):
//!
//! ```text
//! @type: 3
//! 1.1|
//! 2.2|why did it take that route?
//! 3.1|because it has been gazing at it
//! 1.2|
//!
//! 1.1|
//! ...
//! ```
//!
//! Dialogues are separated by blank lines. An `@type: N` header (N in 1..=6)
//! sets the dialogue type for the dialogue it appears in and every later one
//! until the next header. Lines starting with `#` are comments.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::protocol::{Actor, Move, MoveKind, QuestionSubtype, SessionState, Topic};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Code {
    QeStart,
    QeEnd,
    How,
    Why,
    What,
    Explanation,
    ExplaineeAffirmation,
    ExplainerAffirmation,
    QuestionContext,
    Counterfactual,
    Argument,
    ArgumentStart,
    ArgumentAffirmation,
    CounterArgument,
    ArgumentContrast,
    ExplainerReturnQuestion,
    ExplaineeReturnQuestion,
}

impl Code {
    pub const ALL: [Code; 17] = [
        Code::QeStart,
        Code::QeEnd,
        Code::How,
        Code::Why,
        Code::What,
        Code::Explanation,
        Code::ExplaineeAffirmation,
        Code::ExplainerAffirmation,
        Code::QuestionContext,
        Code::Counterfactual,
        Code::Argument,
        Code::ArgumentStart,
        Code::ArgumentAffirmation,
        Code::CounterArgument,
        Code::ArgumentContrast,
        Code::ExplainerReturnQuestion,
        Code::ExplaineeReturnQuestion,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Code::QeStart => "1.1",
            Code::QeEnd => "1.2",
            Code::How => "2.1",
            Code::Why => "2.2",
            Code::What => "2.3",
            Code::Explanation => "3.1",
            Code::ExplaineeAffirmation => "3.2",
            Code::ExplainerAffirmation => "3.3",
            Code::QuestionContext => "3.4",
            Code::Counterfactual => "3.5",
            Code::Argument => "4.1",
            Code::ArgumentStart => "4.2",
            Code::ArgumentAffirmation => "4.3",
            Code::CounterArgument => "4.4",
            Code::ArgumentContrast => "4.5",
            Code::ExplainerReturnQuestion => "5.1",
            Code::ExplaineeReturnQuestion => "5.2",
        }
    }

    pub fn from_id(id: &str) -> Option<Code> {
        Code::ALL.into_iter().find(|c| c.id() == id)
    }

    pub fn is_boundary(self) -> bool {
        matches!(self, Code::QeStart | Code::QeEnd)
    }
}

impl fmt::Display for Code {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

/// The six corpus sources a dialogue may come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum DialogueType {
    StaticExplainee = 1,
    StaticExplainer = 2,
    ExplainerAgent = 3,
    ExplaineeAgent = 4,
    QnA = 5,
    MultipleExplainee = 6,
}

impl DialogueType {
    pub const ALL: [DialogueType; 6] = [
        DialogueType::StaticExplainee,
        DialogueType::StaticExplainer,
        DialogueType::ExplainerAgent,
        DialogueType::ExplaineeAgent,
        DialogueType::QnA,
        DialogueType::MultipleExplainee,
    ];

    pub fn number(self) -> u8 {
        self as u8
    }

    pub fn from_number(n: u8) -> Option<Self> {
        DialogueType::ALL.into_iter().find(|t| t.number() == n)
    }

    pub fn label(self) -> &'static str {
        match self {
            DialogueType::StaticExplainee => "Human-Human static explainee",
            DialogueType::StaticExplainer => "Human-Human static explainer",
            DialogueType::ExplainerAgent => "Human-Explainer agent",
            DialogueType::ExplaineeAgent => "Human-Explainee agent",
            DialogueType::QnA => "Human-Human QnA",
            DialogueType::MultipleExplainee => "Human-Human multiple explainee",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    pub code: Code,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodedDialogue {
    pub dialogue_type: Option<DialogueType>,
    pub segments: Vec<Segment>,
}

impl CodedDialogue {
    pub fn codes(&self) -> impl Iterator<Item = Code> + '_ {
        self.segments.iter().map(|s| s.code)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BoundaryMode {
    /// Every dialogue must open with 1.1 and close with 1.2.
    Strict,
    /// Boundary codes may be missing.
    #[default]
    Lenient,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TranscriptError {
    #[error("line {line}: unknown code {code:?}")]
    UnknownCode { line: usize, code: String },
    #[error("line {line}: expected `code|text`")]
    MalformedLine { line: usize },
    #[error("line {line}: dialogue type must be 1..=6")]
    BadDialogueType { line: usize },
    #[error("dialogue ending at line {line} lacks a 1.1/1.2 boundary")]
    MissingBoundary { line: usize },
    #[error("expected exactly one dialogue, found {found}")]
    NotSingleDialogue { found: usize },
}

/// Parses a file holding any number of dialogues.
pub fn parse_coded_corpus(text: &str, mode: BoundaryMode) -> Result<Vec<CodedDialogue>, TranscriptError> {
    let mut out = Vec::new();
    let mut current_type = None;
    let mut segments: Vec<Segment> = Vec::new();
    let mut block_type = None;

    let mut finish = |segments: &mut Vec<Segment>, ty: Option<DialogueType>, line: usize| {
        if segments.is_empty() {
            return Ok(());
        }
        let segs = std::mem::take(segments);
        if mode == BoundaryMode::Strict
            && (segs.first().map(|s| s.code) != Some(Code::QeStart) || segs.last().map(|s| s.code) != Some(Code::QeEnd))
        {
            return Err(TranscriptError::MissingBoundary { line });
        }
        out.push(CodedDialogue {
            dialogue_type: ty,
            segments: segs,
        });
        Ok(())
    };

    let mut last_line = 0;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        last_line = line;
        let trimmed = raw.trim();
        if trimmed.is_empty() {
            finish(&mut segments, block_type, line - 1)?;
            block_type = current_type;
            continue;
        }
        if trimmed.starts_with('#') {
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix("@type:") {
            let ty = rest
                .trim()
                .parse::<u8>()
                .ok()
                .and_then(DialogueType::from_number)
                .ok_or(TranscriptError::BadDialogueType { line })?;
            current_type = Some(ty);
            block_type = Some(ty);
            continue;
        }
        let (code, text) = trimmed.split_once('|').ok_or(TranscriptError::MalformedLine { line })?;
        let code = code.trim();
        let code = Code::from_id(code).ok_or_else(|| TranscriptError::UnknownCode {
            line,
            code: code.to_string(),
        })?;
        if segments.is_empty() {
            block_type = current_type;
        }
        segments.push(Segment {
            code,
            text: text.trim().to_string(),
        });
    }
    finish(&mut segments, block_type, last_line)?;
    Ok(out)
}

/// Parses a file holding exactly one dialogue.
pub fn parse_coded_transcript(text: &str, mode: BoundaryMode) -> Result<CodedDialogue, TranscriptError> {
    let mut all = parse_coded_corpus(text, mode)?;
    if all.len() != 1 {
        return Err(TranscriptError::NotSingleDialogue { found: all.len() });
    }
    Ok(all.pop().expect("one dialogue"))
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("segment {index} (code {code}) has no legal position in the protocol")]
pub struct UnmappableSequence {
    /// 1-based segment index.
    pub index: usize,
    pub code: Code,
}

/// Maps a coded dialogue onto protocol moves about topic `p`.
///
/// Boundary codes produce no moves. Information codes (question context,
/// counterfactual case, contrast case) become metadata on a neighbouring move
/// unless question context answers a pending clarification question, in which
/// case it is a `clarify`. Arguments have no end code, so an explanation-level
/// code arriving after an argument reached a termination rule first emits
/// `end_argument`.
pub fn codes_to_moves(d: &CodedDialogue) -> Result<Vec<Move>, UnmappableSequence> {
    let topic = Topic::new("p").expect("non-empty");
    let mut s = SessionState::default();
    let mut out: Vec<Move> = Vec::new();
    let mut pending_context: Option<String> = None;
    let mut closed = false;

    for (i, seg) in d.segments.iter().enumerate() {
        let fail = || UnmappableSequence {
            index: i + 1,
            code: seg.code,
        };
        if closed && seg.code != Code::QeEnd {
            return Err(fail());
        }
        let text = (!seg.text.is_empty()).then(|| seg.text.clone());
        let mv = |actor: Actor, kind: MoveKind| {
            let m = Move::new(actor, kind, topic.clone());
            match &text {
                Some(t) => m.with_content(t.clone()),
                None => m,
            }
        };
        let next = match seg.code {
            Code::QeStart => {
                if !out.is_empty() {
                    return Err(fail());
                }
                None
            }
            Code::QeEnd => {
                closed = true;
                None
            }
            Code::How | Code::Why | Code::What => {
                let subtype = match seg.code {
                    Code::How => QuestionSubtype::How,
                    Code::Why => QuestionSubtype::Why,
                    _ => QuestionSubtype::What,
                };
                let kind = if s.depth() == 0 {
                    MoveKind::BeginQuestion
                } else {
                    MoveKind::ReturnQuestion
                };
                let mut m = mv(Actor::Q, kind).with_subtype(subtype);
                if let Some(ctx) = pending_context.take() {
                    m.content = Some(join_text(Some(ctx), m.content.take()));
                }
                Some(m)
            }
            Code::Explanation => {
                let kind = match s.top() {
                    None => MoveKind::BeginExplanation,
                    Some(_) if s.is_legal(Actor::E, MoveKind::Explain) => MoveKind::Explain,
                    Some(_) => MoveKind::FurtherExplain,
                };
                Some(mv(Actor::E, kind))
            }
            Code::ExplaineeAffirmation => Some(mv(Actor::Q, MoveKind::Affirm)),
            Code::ExplainerAffirmation => Some(mv(Actor::E, MoveKind::Affirm)),
            Code::QuestionContext => {
                if s.is_legal(Actor::Q, MoveKind::Clarify) {
                    Some(mv(Actor::Q, MoveKind::Clarify))
                } else {
                    match out.last_mut() {
                        Some(last) if last.kind.is_question() => {
                            last.content = Some(join_text(last.content.take(), text.clone()));
                        }
                        _ => pending_context = Some(join_text(pending_context.take(), text.clone())),
                    }
                    None
                }
            }
            Code::Counterfactual => {
                let q = out
                    .iter_mut()
                    .rev()
                    .find(|m| m.kind.is_question())
                    .filter(|m| {
                        matches!(
                            m.question_subtype,
                            Some(QuestionSubtype::Why) | Some(QuestionSubtype::How)
                        )
                    })
                    .ok_or_else(fail)?;
                q.counterfactual = Some(true);
                if text.is_some() {
                    q.content = Some(join_text(q.content.take(), text.clone()));
                }
                None
            }
            Code::Argument | Code::ArgumentStart => {
                if s.depth() == 0 {
                    Some(mv(Actor::E, MoveKind::BeginExplanation))
                } else {
                    let actor = if s.is_legal(Actor::Q, MoveKind::BeginArgument) {
                        Actor::Q
                    } else {
                        Actor::E
                    };
                    Some(mv(actor, MoveKind::BeginArgument))
                }
            }
            Code::ArgumentAffirmation | Code::CounterArgument => {
                let kind = if seg.code == Code::ArgumentAffirmation {
                    MoveKind::AffirmArgument
                } else {
                    MoveKind::CounterArgument
                };
                let actor = Actor::BOTH
                    .into_iter()
                    .find(|&a| s.is_legal(a, kind))
                    .ok_or_else(fail)?;
                Some(mv(actor, kind))
            }
            Code::ArgumentContrast => {
                let arg = out
                    .iter_mut()
                    .rev()
                    .find(|m| {
                        matches!(
                            m.kind,
                            MoveKind::BeginArgument | MoveKind::AffirmArgument | MoveKind::CounterArgument
                        )
                    })
                    .ok_or_else(fail)?;
                arg.content = Some(join_text(arg.content.take(), text.clone()));
                None
            }
            Code::ExplainerReturnQuestion => Some(mv(Actor::E, MoveKind::ReturnQuestion)),
            Code::ExplaineeReturnQuestion => Some(mv(Actor::Q, MoveKind::ReturnQuestion)),
        };
        if let Some(m) = next {
            if s.apply(&m).is_err() {
                // Argument endings are not coded: an explanation-level code
                // after a finished argument closes it.
                let close = Move::new(Actor::E, MoveKind::EndArgument, topic.clone());
                let mut closed_arg = s.clone();
                closed_arg.apply(&close).map_err(|_| fail())?;
                closed_arg.apply(&m).map_err(|_| fail())?;
                s = closed_arg;
                out.push(close);
            }
            out.push(m);
        }
    }
    Ok(out)
}

fn join_text(a: Option<String>, b: Option<String>) -> String {
    match (a, b) {
        (Some(a), Some(b)) if !a.is_empty() && !b.is_empty() => format!("{a} {b}"),
        (Some(a), Some(b)) => a + &b,
        (Some(a), None) => a,
        (None, Some(b)) => b,
        (None, None) => String::new(),
    }
}

//! The bracketed tag language: `[BQ][E][AF]`.
//!
//! Each bracket holds a tag, optionally followed by `:Q`/`:E` to pin the actor
//! and `@topic` to pin the topic, e.g. `[BA:E]` or `[BQ:Q@cities]`. Without
//! suffixes the actor is whichever party the protocol allows at that point
//! and the topic is `p`, then `q`, `r`, ... for each new dialogue.
//!
//! | tag | move              | tag | move             |
//! |-----|-------------------|-----|------------------|
//! | BQ  | begin_question    | BA  | begin_argument   |
//! | BE  | begin_explanation | AA  | affirm_argument  |
//! | E   | explain           | CA  | counter_argument |
//! | FE  | further_explain   | EA  | end_argument     |
//! | AF  | affirm            | EE  | end_explanation  |
//! | RQ  | return_question   | CL  | clarify          |

use std::fmt::Write as _;

use thiserror::Error;

use crate::protocol::{initial_session, Actor, Move, MoveKind, SessionState, Topic};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TagError {
    #[error("unknown tag {token:?} at position {position}")]
    UnknownTag { position: usize, token: String },
    #[error("malformed bracket at position {position}")]
    MalformedBracket { position: usize },
}

impl TagError {
    pub fn position(&self) -> usize {
        match self {
            TagError::UnknownTag { position, .. } | TagError::MalformedBracket { position } => *position,
        }
    }
}

/// One bracketed element of a trace.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tag {
    pub kind: MoveKind,
    pub actor: Option<Actor>,
    pub topic: Option<Topic>,
}

impl Tag {
    pub fn bare(kind: MoveKind) -> Self {
        Tag {
            kind,
            actor: None,
            topic: None,
        }
    }
}

pub type TagSequence = Vec<Tag>;

pub fn tag_of(kind: MoveKind) -> &'static str {
    match kind {
        MoveKind::BeginQuestion => "BQ",
        MoveKind::BeginExplanation => "BE",
        MoveKind::Explain => "E",
        MoveKind::FurtherExplain => "FE",
        MoveKind::Affirm => "AF",
        MoveKind::ReturnQuestion => "RQ",
        MoveKind::Clarify => "CL",
        MoveKind::BeginArgument => "BA",
        MoveKind::AffirmArgument => "AA",
        MoveKind::CounterArgument => "CA",
        MoveKind::EndArgument => "EA",
        MoveKind::EndExplanation => "EE",
    }
}

pub fn kind_of_tag(tag: &str) -> Option<MoveKind> {
    let upper = tag.to_ascii_uppercase();
    MoveKind::ALL.into_iter().find(|&k| tag_of(k) == upper)
}

/// Parses a bracketed tag string. Positions in errors are 1-based tag ordinals.
pub fn parse_tags(text: &str) -> Result<TagSequence, TagError> {
    let mut tags = Vec::new();
    let mut rest = text.trim_start();
    while !rest.is_empty() {
        let position = tags.len() + 1;
        let Some(body) = rest.strip_prefix('[') else {
            return Err(TagError::MalformedBracket { position });
        };
        let Some(close) = body.find(']') else {
            return Err(TagError::MalformedBracket { position });
        };
        let inner = &body[..close];
        if inner.contains('[') {
            return Err(TagError::MalformedBracket { position });
        }
        tags.push(parse_one(inner.trim(), position)?);
        rest = body[close + 1..].trim_start();
    }
    Ok(tags)
}

fn parse_one(inner: &str, position: usize) -> Result<Tag, TagError> {
    let (head, topic) = match inner.split_once('@') {
        Some((h, t)) => (h, Some(t)),
        None => (inner, None),
    };
    let (token, actor) = match head.split_once(':') {
        Some((tok, a)) => (tok, Some(a)),
        None => (head, None),
    };
    let kind = kind_of_tag(token).ok_or_else(|| TagError::UnknownTag {
        position,
        token: token.to_string(),
    })?;
    let actor = match actor.map(str::to_ascii_uppercase).as_deref() {
        None => None,
        Some("Q") => Some(Actor::Q),
        Some("E") => Some(Actor::E),
        Some(_) => return Err(TagError::MalformedBracket { position }),
    };
    let topic = match topic {
        None => None,
        Some(t) if t.is_empty() || t.chars().any(char::is_whitespace) => {
            return Err(TagError::MalformedBracket { position })
        }
        Some(t) => Some(Topic::new(t).expect("non-empty")),
    };
    Ok(Tag { kind, actor, topic })
}

/// Topic assigned to the `n`th dialogue when a trace does not name one.
pub fn auto_topic(n: usize) -> Topic {
    const LETTERS: [&str; 11] = ["p", "q", "r", "s", "t", "u", "v", "w", "x", "y", "z"];
    let letter = LETTERS[n % LETTERS.len()];
    let round = n / LETTERS.len();
    let token = if round == 0 {
        letter.to_string()
    } else {
        format!("{letter}{}", round + 1)
    };
    Topic::new(token).expect("non-empty")
}

/// Actor a bare tag resolves to in `s`: the only party allowed to make the
/// move, `Q` when both are (only `begin_argument`), and otherwise the party
/// that normally makes it.
pub fn default_actor(s: &SessionState, kind: MoveKind) -> Actor {
    if kind.is_closing() {
        return Actor::E;
    }
    match (s.is_legal(Actor::Q, kind), s.is_legal(Actor::E, kind)) {
        (true, false) => Actor::Q,
        (false, true) => Actor::E,
        (true, true) => Actor::Q,
        (false, false) => natural_actor(kind),
    }
}

fn natural_actor(kind: MoveKind) -> Actor {
    match kind {
        MoveKind::BeginQuestion
        | MoveKind::Affirm
        | MoveKind::ReturnQuestion
        | MoveKind::Clarify
        | MoveKind::BeginArgument
        | MoveKind::CounterArgument => Actor::Q,
        _ => Actor::E,
    }
}

/// Topic a bare tag resolves to in `s`.
pub fn default_topic(s: &SessionState) -> Topic {
    if let Some(t) = s.open_topic() {
        return t.clone();
    }
    let n = s.completed_dialogues();
    let candidate = auto_topic(n);
    if s.last_closed_topic() == Some(&candidate) {
        auto_topic(n + 1)
    } else {
        candidate
    }
}

/// Assigns actors and topics by walking the engine left to right. Once a tag
/// is illegal the walk stops advancing, so the remaining tags resolve against
/// the state at the failure point.
pub fn resolve_moves(tags: &[Tag]) -> Vec<Move> {
    let mut s = initial_session();
    let mut stuck = false;
    tags.iter()
        .map(|tag| {
            let actor = tag.actor.unwrap_or_else(|| default_actor(&s, tag.kind));
            let topic = tag.topic.clone().unwrap_or_else(|| default_topic(&s));
            let m = Move::new(actor, tag.kind, topic);
            if !stuck && s.apply(&m).is_err() {
                stuck = true;
            }
            m
        })
        .collect()
}

/// Canonical bracketed form. Suffixes are written only where the default
/// resolution would pick a different actor or topic.
pub fn format_tags(moves: &[Move]) -> String {
    let mut s = initial_session();
    let mut stuck = false;
    let mut out = String::new();
    for m in moves {
        out.push('[');
        out.push_str(tag_of(m.kind));
        if m.actor != default_actor(&s, m.kind) {
            let _ = write!(out, ":{}", m.actor);
        }
        if m.topic != default_topic(&s) {
            let _ = write!(out, "@{}", m.topic);
        }
        out.push(']');
        if !stuck && s.apply(m).is_err() {
            stuck = true;
        }
    }
    out
}

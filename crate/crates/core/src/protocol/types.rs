use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// One of the two parties of an explanation dialogue.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Actor {
    /// The questioner, i.e. the explainee.
    Q,
    /// The explainer.
    E,
}

impl Actor {
    pub const BOTH: [Actor; 2] = [Actor::Q, Actor::E];

    pub fn other(self) -> Actor {
        match self {
            Actor::Q => Actor::E,
            Actor::E => Actor::Q,
        }
    }
}

impl fmt::Display for Actor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Actor::Q => f.pad("Q"),
            Actor::E => f.pad("E"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("topic token must be non-empty")]
pub struct TopicError;

/// Opaque topic token. Two topics are the same iff their tokens are equal.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Topic(String);

impl Topic {
    pub fn new(token: impl Into<String>) -> Result<Self, TopicError> {
        let token = token.into();
        if token.is_empty() {
            return Err(TopicError);
        }
        Ok(Topic(token))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl TryFrom<String> for Topic {
    type Error = TopicError;

    fn try_from(value: String) -> Result<Self, Self::Error> {
        Topic::new(value)
    }
}

impl From<Topic> for String {
    fn from(t: Topic) -> String {
        t.0
    }
}

impl fmt::Display for Topic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(&self.0)
    }
}

/// Every move of the game: the seven locutions followed by the five control moves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MoveKind {
    Explain,
    FurtherExplain,
    Affirm,
    ReturnQuestion,
    /// Explainee's answer to the explainer's clarification question.
    Clarify,
    AffirmArgument,
    CounterArgument,
    BeginQuestion,
    BeginExplanation,
    BeginArgument,
    EndExplanation,
    EndArgument,
}

impl MoveKind {
    pub const ALL: [MoveKind; 12] = [
        MoveKind::Explain,
        MoveKind::FurtherExplain,
        MoveKind::Affirm,
        MoveKind::ReturnQuestion,
        MoveKind::Clarify,
        MoveKind::AffirmArgument,
        MoveKind::CounterArgument,
        MoveKind::BeginQuestion,
        MoveKind::BeginExplanation,
        MoveKind::BeginArgument,
        MoveKind::EndExplanation,
        MoveKind::EndArgument,
    ];

    pub fn is_control(self) -> bool {
        matches!(
            self,
            MoveKind::BeginQuestion
                | MoveKind::BeginExplanation
                | MoveKind::BeginArgument
                | MoveKind::EndExplanation
                | MoveKind::EndArgument
        )
    }

    pub fn is_locution(self) -> bool {
        !self.is_control()
    }

    /// Controls that close a dialogue. They are not attributed to either party.
    pub fn is_closing(self) -> bool {
        matches!(self, MoveKind::EndExplanation | MoveKind::EndArgument)
    }

    /// Moves that may carry a question subtype.
    pub fn is_question(self) -> bool {
        matches!(
            self,
            MoveKind::BeginQuestion | MoveKind::ReturnQuestion | MoveKind::Clarify
        )
    }

    pub fn name(self) -> &'static str {
        match self {
            MoveKind::Explain => "explain",
            MoveKind::FurtherExplain => "further_explain",
            MoveKind::Affirm => "affirm",
            MoveKind::ReturnQuestion => "return_question",
            MoveKind::Clarify => "clarify",
            MoveKind::AffirmArgument => "affirm_argument",
            MoveKind::CounterArgument => "counter_argument",
            MoveKind::BeginQuestion => "begin_question",
            MoveKind::BeginExplanation => "begin_explanation",
            MoveKind::BeginArgument => "begin_argument",
            MoveKind::EndExplanation => "end_explanation",
            MoveKind::EndArgument => "end_argument",
        }
    }

    pub fn from_name(name: &str) -> Option<MoveKind> {
        MoveKind::ALL.into_iter().find(|k| k.name() == name)
    }
}

impl fmt::Display for MoveKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuestionSubtype {
    Why,
    How,
    What,
}

/// A single utterance-level event.
///
/// `question_subtype`, `counterfactual` and `content` are carried along but
/// never influence transitions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Move {
    pub actor: Actor,
    pub kind: MoveKind,
    pub topic: Topic,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub content: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub question_subtype: Option<QuestionSubtype>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub counterfactual: Option<bool>,
}

impl Move {
    pub fn new(actor: Actor, kind: MoveKind, topic: Topic) -> Self {
        Move {
            actor,
            kind,
            topic,
            content: None,
            question_subtype: None,
            counterfactual: None,
        }
    }

    pub fn with_content(mut self, content: impl Into<String>) -> Self {
        self.content = Some(content.into());
        self
    }

    pub fn with_subtype(mut self, subtype: QuestionSubtype) -> Self {
        self.question_subtype = Some(subtype);
        self
    }

    pub fn with_counterfactual(mut self, counterfactual: bool) -> Self {
        self.counterfactual = Some(counterfactual);
        self
    }

    /// The party the move is attributed to; closing controls belong to neither.
    pub fn speaker(&self) -> Option<Actor> {
        if self.kind.is_closing() {
            None
        } else {
            Some(self.actor)
        }
    }

    /// Checks the metadata invariants; returns a description of the first violation.
    pub fn metadata_violation(&self) -> Option<&'static str> {
        if self.question_subtype.is_some() && !self.kind.is_question() {
            return Some("question subtype on a non-question move");
        }
        if self.counterfactual.is_some()
            && !matches!(
                self.question_subtype,
                Some(QuestionSubtype::Why) | Some(QuestionSubtype::How)
            )
        {
            return Some("counterfactual flag requires a why or how question");
        }
        None
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FrameType {
    Explanation,
    Argumentation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum FrameState {
    // explanation
    QPosed,
    ClarifyPending,
    Explained,
    QAffirmed,
    BothAffirmed,
    // argumentation
    APosed,
    AExplained,
    AAffirmed,
}

impl FrameState {
    pub fn frame_type(self) -> FrameType {
        match self {
            FrameState::QPosed
            | FrameState::ClarifyPending
            | FrameState::Explained
            | FrameState::QAffirmed
            | FrameState::BothAffirmed => FrameType::Explanation,
            FrameState::APosed | FrameState::AExplained | FrameState::AAffirmed => FrameType::Argumentation,
        }
    }
}

impl fmt::Display for FrameState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

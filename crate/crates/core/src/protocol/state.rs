use std::collections::BTreeSet;

use serde::Serialize;
use thiserror::Error;

use super::tables::{protocol_tables, ActorRule, Effect, Guard, Transition};
use super::types::{Actor, FrameState, FrameType, Move, MoveKind, Topic};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProtocolError {
    #[error("illegal move: {kind} by {actor} in {}", state.map_or("no open dialogue".to_string(), |s| s.to_string()))]
    IllegalMove {
        actor: Actor,
        kind: MoveKind,
        state: Option<FrameState>,
    },
    #[error("topic mismatch: open dialogue is about {expected}, move is about {found}")]
    TopicMismatch { expected: Topic, found: Topic },
    #[error("topic {topic} was the subject of the dialogue that just closed")]
    StaleTopic { topic: Topic },
    #[error("malformed {kind} move: {detail}")]
    InvalidMetadata { kind: MoveKind, detail: &'static str },
    #[error("open dialogues have not reached a termination rule")]
    NotTerminalEligible,
}

/// One open dialogue.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DialogueFrame {
    pub frame_type: FrameType,
    pub topic: Topic,
    pub state: FrameState,
    /// Last locution played in this frame. An explanation frame opened by
    /// `begin_explanation` starts with `explain`, since that control carries
    /// the opening explanation.
    pub last_locution: Option<MoveKind>,
    pub argument_proposer: Option<Actor>,
    pub explanation_given: bool,
}

impl DialogueFrame {
    fn last_is_terminal(&self) -> bool {
        self.last_locution
            .is_some_and(|k| protocol_tables().termination_set(self.frame_type).contains(&k))
    }
}

/// Stack of open dialogues plus the full move history.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct SessionState {
    frames: Vec<DialogueFrame>,
    history: Vec<Move>,
    completed_dialogues: usize,
    last_closed_topic: Option<Topic>,
}

pub fn initial_session() -> SessionState {
    SessionState::default()
}

impl SessionState {
    pub fn frames(&self) -> &[DialogueFrame] {
        &self.frames
    }

    pub fn top(&self) -> Option<&DialogueFrame> {
        self.frames.last()
    }

    /// The explanation frame at the bottom of the stack, if any.
    pub fn explanation(&self) -> Option<&DialogueFrame> {
        self.frames.first()
    }

    pub fn depth(&self) -> usize {
        self.frames.len()
    }

    pub fn history(&self) -> &[Move] {
        &self.history
    }

    pub fn completed_dialogues(&self) -> usize {
        self.completed_dialogues
    }

    pub fn last_closed_topic(&self) -> Option<&Topic> {
        self.last_closed_topic.as_ref()
    }

    pub fn top_state(&self) -> Option<FrameState> {
        self.top().map(|f| f.state)
    }

    /// Topic every move must carry right now; `None` when no dialogue is open.
    pub fn open_topic(&self) -> Option<&Topic> {
        self.top().map(|f| &f.topic)
    }

    pub fn legal_moves(&self) -> BTreeSet<(Actor, MoveKind)> {
        let from = self.top_state();
        let mut out = BTreeSet::new();
        for tr in protocol_tables().transitions_from(from) {
            if !self.guard_holds(tr.guard) {
                continue;
            }
            for actor in Actor::BOTH {
                if self.actor_allowed(tr.actor, actor) {
                    out.insert((actor, tr.kind));
                }
            }
        }
        out
    }

    pub fn is_legal(&self, actor: Actor, kind: MoveKind) -> bool {
        self.find_transition(actor, kind).is_some()
    }

    /// True iff every open frame's last locution is a termination-rule locution.
    pub fn is_terminal_eligible(&self) -> bool {
        self.frames.iter().all(DialogueFrame::last_is_terminal)
    }

    fn guard_holds(&self, guard: Guard) -> bool {
        let top = self.top();
        match guard {
            Guard::Always => true,
            Guard::FirstExplanation => top.is_some_and(|f| !f.explanation_given),
            Guard::ExplanationGiven => top.is_some_and(|f| f.explanation_given),
            Guard::LastLocutionTerminal => top.is_some_and(DialogueFrame::last_is_terminal),
        }
    }

    fn actor_allowed(&self, rule: ActorRule, actor: Actor) -> bool {
        match rule {
            ActorRule::Only(a) => a == actor,
            ActorRule::Either => true,
            ActorRule::NonProposer => self.top().and_then(|f| f.argument_proposer).is_some_and(|p| p != actor),
        }
    }

    fn find_transition(&self, actor: Actor, kind: MoveKind) -> Option<&'static Transition> {
        protocol_tables()
            .transitions_from(self.top_state())
            .find(|t| t.kind == kind && self.guard_holds(t.guard) && self.actor_allowed(t.actor, actor))
    }

    /// Applies `m` in place. On error the state is left untouched.
    pub fn apply(&mut self, m: &Move) -> Result<(), ProtocolError> {
        if let Some(detail) = m.metadata_violation() {
            return Err(ProtocolError::InvalidMetadata { kind: m.kind, detail });
        }
        let tr = self
            .find_transition(m.actor, m.kind)
            .ok_or(ProtocolError::IllegalMove {
                actor: m.actor,
                kind: m.kind,
                state: self.top_state(),
            })?;
        match self.top() {
            Some(frame) if frame.topic != m.topic => {
                return Err(ProtocolError::TopicMismatch {
                    expected: frame.topic.clone(),
                    found: m.topic.clone(),
                });
            }
            None if self.last_closed_topic.as_ref() == Some(&m.topic) => {
                return Err(ProtocolError::StaleTopic { topic: m.topic.clone() });
            }
            _ => {}
        }

        match tr.effect {
            Effect::OpenExplanation(state) => {
                let opened_with_explanation = m.kind == MoveKind::BeginExplanation;
                self.frames.push(DialogueFrame {
                    frame_type: FrameType::Explanation,
                    topic: m.topic.clone(),
                    state,
                    last_locution: opened_with_explanation.then_some(MoveKind::Explain),
                    argument_proposer: None,
                    explanation_given: opened_with_explanation,
                });
            }
            Effect::Goto(state) => {
                let top = self.frames.last_mut().expect("transition requires an open frame");
                top.state = state;
                top.last_locution = Some(m.kind);
                if matches!(m.kind, MoveKind::Explain | MoveKind::FurtherExplain) {
                    top.explanation_given = true;
                }
            }
            Effect::Counter => {
                let top = self.frames.last_mut().expect("transition requires an open frame");
                top.state = FrameState::APosed;
                top.last_locution = Some(m.kind);
                top.argument_proposer = Some(m.actor);
            }
            Effect::PushArgument => {
                self.frames.push(DialogueFrame {
                    frame_type: FrameType::Argumentation,
                    topic: m.topic.clone(),
                    state: FrameState::APosed,
                    last_locution: None,
                    argument_proposer: Some(m.actor),
                    explanation_given: false,
                });
            }
            Effect::PopArgument => {
                self.frames.pop();
                let parent = self.frames.last_mut().expect("argument sits on an explanation");
                parent.state = FrameState::Explained;
            }
            Effect::PopExplanation => {
                let closed = self.frames.pop().expect("transition requires an open frame");
                self.completed_dialogues += 1;
                self.last_closed_topic = Some(closed.topic);
            }
        }
        self.history.push(m.clone());
        Ok(())
    }

    /// Closes every open frame, innermost first, by issuing the matching end
    /// controls (attributed to the explainer in the history).
    pub fn close_all(&mut self) -> Result<(), ProtocolError> {
        if !self.is_terminal_eligible() {
            return Err(ProtocolError::NotTerminalEligible);
        }
        while let Some(top) = self.top() {
            let kind = match top.frame_type {
                FrameType::Argumentation => MoveKind::EndArgument,
                FrameType::Explanation => MoveKind::EndExplanation,
            };
            let m = Move::new(Actor::E, kind, top.topic.clone());
            self.apply(&m)?;
        }
        Ok(())
    }
}

pub fn legal_moves(s: &SessionState) -> BTreeSet<(Actor, MoveKind)> {
    s.legal_moves()
}

/// Returns the successor state, or the reason `m` is not allowed in `s`.
pub fn apply_move(s: &SessionState, m: &Move) -> Result<SessionState, ProtocolError> {
    let mut next = s.clone();
    next.apply(m)?;
    Ok(next)
}

pub fn is_terminal_eligible(s: &SessionState) -> bool {
    s.is_terminal_eligible()
}

pub fn auto_close(s: &SessionState) -> Result<SessionState, ProtocolError> {
    let mut next = s.clone();
    next.close_all()?;
    Ok(next)
}

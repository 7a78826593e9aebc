use std::sync::OnceLock;

use super::types::{Actor, FrameState, FrameType, MoveKind};

/// Who may make the move of a transition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ActorRule {
    Only(Actor),
    Either,
    /// The party that did not put forward the argument currently on the table.
    NonProposer,
}

/// Extra condition on the open frame beyond its state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Guard {
    Always,
    /// No explanation has been given in the frame yet.
    FirstExplanation,
    /// An explanation has already been given in the frame.
    ExplanationGiven,
    /// The frame's last locution is in its termination set.
    LastLocutionTerminal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Effect {
    /// Open an explanation frame in the given state.
    OpenExplanation(FrameState),
    Goto(FrameState),
    /// Re-enter `APosed` with the countering party as proposer.
    Counter,
    PushArgument,
    PopArgument,
    PopExplanation,
}

/// What an edge of the transition relation rests on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Basis {
    /// Stated directly by the protocol rules.
    Stated,
    /// Required by a worked example dialogue.
    Example,
    /// Not stated; the smallest addition consistent with the stated rules.
    Inferred,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Transition {
    /// `None` means no dialogue is open.
    pub from: Option<FrameState>,
    pub actor: ActorRule,
    pub kind: MoveKind,
    pub guard: Guard,
    pub effect: Effect,
    pub basis: Basis,
}

#[derive(Debug, Clone)]
pub struct ProtocolTables {
    pub explanation_locutions: Vec<MoveKind>,
    pub argumentation_locutions: Vec<MoveKind>,
    pub explanation_termination: Vec<MoveKind>,
    pub argumentation_termination: Vec<MoveKind>,
    pub controls: Vec<MoveKind>,
    pub transitions: Vec<Transition>,
}

impl ProtocolTables {
    pub fn locutions(&self, frame: FrameType) -> &[MoveKind] {
        match frame {
            FrameType::Explanation => &self.explanation_locutions,
            FrameType::Argumentation => &self.argumentation_locutions,
        }
    }

    pub fn termination_set(&self, frame: FrameType) -> &[MoveKind] {
        match frame {
            FrameType::Explanation => &self.explanation_termination,
            FrameType::Argumentation => &self.argumentation_termination,
        }
    }

    pub fn transitions_from(&self, from: Option<FrameState>) -> impl Iterator<Item = &Transition> {
        self.transitions.iter().filter(move |t| t.from == from)
    }
}

/// The static locution sets, termination sets and transition relation.
pub fn protocol_tables() -> &'static ProtocolTables {
    static TABLES: OnceLock<ProtocolTables> = OnceLock::new();
    TABLES.get_or_init(build)
}

fn build() -> ProtocolTables {
    use ActorRule::*;
    use Basis::*;
    use Effect::*;
    use FrameState::*;
    use MoveKind::*;

    let t = |from: Option<FrameState>, actor: ActorRule, kind: MoveKind, guard: Guard, effect: Effect, basis: Basis| {
        Transition {
            from,
            actor,
            kind,
            guard,
            effect,
            basis,
        }
    };
    let q = Only(Actor::Q);
    let e = Only(Actor::E);

    let mut transitions = vec![
        // commencement
        t(None, q, BeginQuestion, Guard::Always, OpenExplanation(QPosed), Stated),
        t(
            None,
            e,
            BeginExplanation,
            Guard::Always,
            OpenExplanation(Explained),
            Example,
        ),
        // explanation dialogue
        t(
            Some(QPosed),
            e,
            Explain,
            Guard::FirstExplanation,
            Goto(Explained),
            Stated,
        ),
        t(
            Some(QPosed),
            e,
            FurtherExplain,
            Guard::ExplanationGiven,
            Goto(Explained),
            Example,
        ),
        t(
            Some(QPosed),
            e,
            ReturnQuestion,
            Guard::Always,
            Goto(ClarifyPending),
            Stated,
        ),
        t(Some(ClarifyPending), q, Clarify, Guard::Always, Goto(QPosed), Inferred),
        t(Some(Explained), q, Affirm, Guard::Always, Goto(QAffirmed), Stated),
        t(Some(Explained), q, ReturnQuestion, Guard::Always, Goto(QPosed), Example),
        t(Some(QAffirmed), e, Affirm, Guard::Always, Goto(BothAffirmed), Inferred),
        t(Some(QAffirmed), q, ReturnQuestion, Guard::Always, Goto(QPosed), Stated),
    ];
    for (from, basis) in [(Explained, Example), (QAffirmed, Inferred), (BothAffirmed, Inferred)] {
        transitions.push(t(Some(from), Either, BeginArgument, Guard::Always, PushArgument, basis));
    }
    for from in [Explained, QAffirmed, BothAffirmed] {
        transitions.push(t(
            Some(from),
            Either,
            EndExplanation,
            Guard::Always,
            PopExplanation,
            Inferred,
        ));
    }
    transitions.extend([
        // embedded argumentation dialogue
        t(
            Some(APosed),
            NonProposer,
            AffirmArgument,
            Guard::Always,
            Goto(AAffirmed),
            Example,
        ),
        t(
            Some(APosed),
            NonProposer,
            CounterArgument,
            Guard::Always,
            Counter,
            Inferred,
        ),
        t(
            Some(APosed),
            e,
            FurtherExplain,
            Guard::Always,
            Goto(AExplained),
            Inferred,
        ),
        t(
            Some(AExplained),
            q,
            AffirmArgument,
            Guard::Always,
            Goto(AAffirmed),
            Inferred,
        ),
        t(Some(AExplained), q, CounterArgument, Guard::Always, Counter, Inferred),
        t(
            Some(APosed),
            Either,
            EndArgument,
            Guard::LastLocutionTerminal,
            PopArgument,
            Inferred,
        ),
        t(
            Some(AAffirmed),
            Either,
            EndArgument,
            Guard::Always,
            PopArgument,
            Example,
        ),
    ]);

    ProtocolTables {
        explanation_locutions: vec![Explain, Affirm, FurtherExplain, ReturnQuestion, Clarify],
        argumentation_locutions: vec![AffirmArgument, CounterArgument, FurtherExplain],
        explanation_termination: vec![Affirm, Explain, FurtherExplain],
        argumentation_termination: vec![AffirmArgument, CounterArgument],
        controls: vec![
            BeginQuestion,
            BeginExplanation,
            BeginArgument,
            EndExplanation,
            EndArgument,
        ],
        transitions,
    }
}

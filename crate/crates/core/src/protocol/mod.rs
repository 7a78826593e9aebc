//! The explanation dialogue game.
//!
//! Two atomic dialogue types are played: an *explanation* dialogue between the
//! explainee (`Q`) and the explainer (`E`), and an *argumentation* dialogue that
//! may be embedded inside it once an explanation has been given. Control moves
//! open and close dialogues; locutions move a dialogue between states.
//!
//! The engine is a pure value-level state machine: [`SessionState`] is the only
//! state, [`apply_move`] and [`legal_moves`] are deterministic functions of it,
//! and every transition is listed in the static table returned by
//! [`protocol_tables`].

mod state;
mod tables;
mod types;

pub use state::{apply_move, auto_close, initial_session, is_terminal_eligible, legal_moves};
pub use state::{DialogueFrame, ProtocolError, SessionState};
pub use tables::{protocol_tables, ActorRule, Basis, Effect, Guard, ProtocolTables, Transition};
pub use types::{Actor, FrameState, FrameType, Move, MoveKind, QuestionSubtype, Topic, TopicError};

//! Executable explanation dialogue game.
//!
//! * [`protocol`]: the dialogue game itself (moves, transition table,
//!   embedded argumentation, termination and sequencing).
//! * [`codec`]: the bracketed tag language, coded transcripts and trace
//!   validation by replay.
//! * [`analytics`]: code frequencies, termination distributions and the
//!   game-type histogram of a corpus.
//! * [`agents`]: a template-driven explainer, a random explainee and a
//!   closed-loop simulator.

pub mod agents;
pub mod analytics;
pub mod codec;
pub mod protocol;

pub use protocol::{
    apply_move, auto_close, initial_session, is_terminal_eligible, legal_moves, protocol_tables, Actor, Move, MoveKind,
    ProtocolError, SessionState, Topic,
};

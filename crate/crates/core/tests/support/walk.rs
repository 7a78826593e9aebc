//! Random walks over the engine, for property tests.

#![allow(dead_code)]

use exdialog::codec::default_topic;
use exdialog::{Move, SessionState, Topic};

/// Follows `choices` through the legal move sets. Each choice picks one legal
/// `(actor, kind)` pair; new dialogues occasionally get a named topic.
pub fn walk(choices: &[u32]) -> Vec<Move> {
    let mut s = SessionState::default();
    for (i, &c) in choices.iter().enumerate() {
        let legal: Vec<_> = s.legal_moves().into_iter().collect();
        if legal.is_empty() {
            break;
        }
        let (actor, kind) = legal[c as usize % legal.len()];
        let topic = match s.open_topic() {
            Some(t) => t.clone(),
            None if c % 3 == 0 => Topic::new(format!("topic-{i}")).unwrap(),
            None => default_topic(&s),
        };
        s.apply(&Move::new(actor, kind, topic)).expect("legal by construction");
    }
    s.history().to_vec()
}

pub fn replay(moves: &[Move]) -> SessionState {
    let mut s = SessionState::default();
    for m in moves {
        s.apply(m).expect("valid history");
    }
    s
}

//! Steps through a dialogue with an embedded argument, printing the legal
//! moves before every step.

use exdialog::{apply_move, initial_session, is_terminal_eligible, legal_moves, Actor, Move, MoveKind, Topic};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let topic = Topic::new("route")?;
    let script = [
        (
            Actor::E,
            MoveKind::BeginExplanation,
            "The robot will go left around the table.",
        ),
        (Actor::Q, MoveKind::ReturnQuestion, "Why not right?"),
        (
            Actor::E,
            MoveKind::FurtherExplain,
            "The right side was blocked a minute ago.",
        ),
        (Actor::Q, MoveKind::BeginArgument, "It is clear now."),
        (
            Actor::E,
            MoveKind::AffirmArgument,
            "True, but it has no new observation of it.",
        ),
        (Actor::E, MoveKind::EndArgument, ""),
    ];

    let mut s = initial_session();
    for (actor, kind, text) in script {
        let legal: Vec<String> = legal_moves(&s).iter().map(|(a, k)| format!("{a}:{k}")).collect();
        println!("legal: {}", legal.join(" "));
        let mut m = Move::new(actor, kind, topic.clone());
        if !text.is_empty() {
            m = m.with_content(text);
        }
        s = apply_move(&s, &m)?;
        let who = m.speaker().map_or("-".to_string(), |a| a.to_string());
        println!("{who:>2} {kind:<18} {text}");
    }
    println!("terminal-eligible: {}", is_terminal_eligible(&s));

    let bad = Move::new(Actor::Q, MoveKind::Explain, topic);
    if let Err(e) = apply_move(&s, &bad) {
        println!("rejected: {e}");
    }
    Ok(())
}

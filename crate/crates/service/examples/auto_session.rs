//! An auto-mode session: the scripted explainer answers each question from
//! the knowledge base, including a clarification for a near-miss topic.

use std::time::Duration;

use exdialog::agents::load_knowledge_base;
use exdialog::{Actor, Move, MoveKind, Topic};
use exdialog_service::{ExportFormat, Mode, SessionManager};

const KB: &str = include_str!("../../core/data/kb.json");

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = tempfile::tempdir()?;
    let mgr = SessionManager::new(dir.path(), Duration::from_secs(1800))?;
    let session = mgr.create_session(Mode::Auto, Some(load_knowledge_base(KB)?))?;
    let (id, q) = (&session.session_id, &session.credentials[&Actor::Q]);

    let ask = |kind, topic: &str, text: &str| -> Result<(), Box<dyn std::error::Error>> {
        let m = Move::new(Actor::Q, kind, Topic::new(topic)?).with_content(text);
        mgr.post_move(id, q, m)?;
        Ok(())
    };
    ask(MoveKind::BeginQuestion, "cities", "Which city comes next?")?;
    ask(MoveKind::Affirm, "cities", "Makes sense.")?;
    ask(MoveKind::EndExplanation, "cities", "")?;
    ask(MoveKind::BeginQuestion, "Route", "Where is it going?")?;

    for m in mgr.session_view(id)?.history {
        let who = m.speaker().map_or("-".into(), |a| a.to_string());
        println!(
            "{who:>2} {:<16} {:<8} {}",
            m.kind,
            m.topic,
            m.content.unwrap_or_default()
        );
    }
    print!("{}", mgr.export_trace(id, ExportFormat::Tags)?);
    Ok(())
}

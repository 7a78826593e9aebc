//! A wizard-of-oz session driven in-process: both parties post moves with
//! their own credentials while a subscriber prints the event stream. The
//! session is then recovered from its log as if the server had restarted.

use std::time::Duration;

use exdialog::codec::{parse_tags, resolve_moves};
use exdialog::Actor;
use exdialog_service::{ExportFormat, Mode, SessionManager};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = tempfile::tempdir()?;
    let mgr = SessionManager::new(dir.path(), Duration::from_secs(1800))?;
    let session = mgr.create_session(Mode::Woz, None)?;
    let id = &session.session_id;
    let mut events = mgr.subscribe(id, &session.credentials[&Actor::Q], 0)?;

    for m in resolve_moves(&parse_tags("[BE@route][RQ][FE][BA][AA][EA]")?) {
        mgr.post_move(id, &session.credentials[&m.actor], m)?;
    }
    let rogue = resolve_moves(&parse_tags("[E:Q@route]")?)
        .remove(0)
        .with_content("out of turn");
    let rejection = mgr.post_move(id, &session.credentials[&Actor::Q], rogue)?;
    println!("rejected (caller only): {}", rejection.payload["reason"]);

    while let Some(e) = events.try_next() {
        println!("{:>3} {:?} {}", e.seq, e.kind, e.payload);
    }
    print!("export: {}", mgr.export_trace(id, ExportFormat::Tags)?);

    drop(mgr);
    let (mgr, report) = SessionManager::recover(dir.path(), Duration::from_secs(1800))?;
    let view = mgr.session_view(id)?;
    println!(
        "recovered {} session(s); {} moves, seq {}",
        report.recovered.len(),
        view.history.len(),
        view.seq
    );
    Ok(())
}

//! Session manager: owns every live session, serialises moves per session,
//! persists them before acknowledging, and fans events out to subscribers.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::io;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::{Arc, Mutex, RwLock};
use std::time::{Duration, Instant, SystemTime, UNIX_EPOCH};

use exdialog::agents::{explainer_to_move, ExplanandumRecord, ScriptedExplainer};
use exdialog::codec::{format_tags, FailureReason};
use exdialog::{Actor, Move, MoveKind, SessionState};
use serde::{Deserialize, Serialize};
use serde_json::json;
use thiserror::Error;
use tokio::sync::broadcast;
use uuid::Uuid;

use crate::log::{read_log, LogError, LogHeader, LogWriter, Mode};

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(30 * 60);

/// Upper bound on consecutive scripted explainer replies to one move.
const MAX_AUTO_REPLIES: usize = 4;

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error("unknown session {0}")]
    UnknownSession(String),
    #[error("credential does not belong to this session")]
    BadCredential,
    #[error("credential is for {credential}, move is by {claimed}")]
    ActorMismatch { credential: Actor, claimed: Actor },
    #[error("session is closed")]
    SessionClosed,
    #[error("auto mode needs a non-empty knowledge base")]
    MissingKnowledgeBase,
    #[error(transparent)]
    Log(#[from] LogError),
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventType {
    MoveAccepted,
    MoveRejected,
    LegalMoves,
    SessionClosed,
    Error,
}

/// Everything pushed to clients. `seq` numbers the events of a session from
/// 1 without gaps; a rejection carries the seq of the last event it was
/// judged against and is never broadcast.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WireEvent {
    #[serde(rename = "type")]
    pub kind: EventType,
    pub seq: u64,
    pub payload: serde_json::Value,
}

impl WireEvent {
    pub fn error(reason: impl Into<String>) -> Self {
        WireEvent {
            kind: EventType::Error,
            seq: 0,
            payload: json!({ "reason": reason.into() }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExportFormat {
    Tags,
    Jsonl,
}

impl FromStr for ExportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "tags" => Ok(ExportFormat::Tags),
            "jsonl" => Ok(ExportFormat::Jsonl),
            other => Err(format!("unknown export format {other:?}")),
        }
    }
}

/// Returned once on creation; the credentials are not shown again.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CreatedSession {
    pub session_id: String,
    pub mode: Mode,
    pub credentials: BTreeMap<Actor, String>,
}

/// Snapshot of a session for display.
#[derive(Debug, Clone, Serialize)]
pub struct SessionView {
    pub session_id: String,
    pub mode: Mode,
    pub created_at: u64,
    pub closed: bool,
    /// Seq of the latest event.
    pub seq: u64,
    pub history: Vec<Move>,
    pub legal: BTreeMap<Actor, Vec<MoveKind>>,
    pub terminal_eligible: bool,
    pub state: SessionState,
    #[serde(skip)]
    pub log_path: PathBuf,
}

#[derive(Debug)]
struct Session {
    header: LogHeader,
    state: SessionState,
    log: LogWriter,
    events: Vec<WireEvent>,
    tx: broadcast::Sender<WireEvent>,
    closed: bool,
    last_activity: Instant,
}

impl Session {
    fn new(header: LogHeader, log: LogWriter) -> Self {
        let (tx, _) = broadcast::channel(256);
        let mut s = Session {
            header,
            state: SessionState::default(),
            log,
            events: Vec::new(),
            tx,
            closed: false,
            last_activity: Instant::now(),
        };
        s.emit_legal_moves();
        s
    }

    fn last_seq(&self) -> u64 {
        self.events.len() as u64
    }

    fn emit(&mut self, kind: EventType, payload: serde_json::Value) -> WireEvent {
        let e = WireEvent {
            kind,
            seq: self.last_seq() + 1,
            payload,
        };
        self.events.push(e.clone());
        // No receivers is fine.
        let _ = self.tx.send(e.clone());
        e
    }

    fn emit_legal_moves(&mut self) -> WireEvent {
        let payload = json!({
            "legal": legal_by_actor(&self.state),
            "terminal_eligible": self.state.is_terminal_eligible(),
        });
        self.emit(EventType::LegalMoves, payload)
    }

    /// Records a move already known to be legal: log first, then state, then events.
    fn commit(&mut self, m: &Move) -> Result<WireEvent, ServiceError> {
        let move_seq = self.state.history().len() as u64 + 1;
        let mut next = self.state.clone();
        next.apply(m).expect("caller checked legality");
        self.log.append(move_seq, m)?;
        self.state = next;
        let accepted = self.emit(EventType::MoveAccepted, json!({ "move_seq": move_seq, "move": m }));
        self.emit_legal_moves();
        Ok(accepted)
    }

    fn close(&mut self, reason: &str) {
        if !self.closed {
            self.closed = true;
            self.emit(EventType::SessionClosed, json!({ "reason": reason }));
        }
    }

    fn view(&self) -> SessionView {
        SessionView {
            session_id: self.header.session_id.clone(),
            mode: self.header.mode,
            created_at: self.header.created_at,
            closed: self.closed,
            seq: self.last_seq(),
            history: self.state.history().to_vec(),
            legal: legal_by_actor(&self.state),
            terminal_eligible: self.state.is_terminal_eligible(),
            state: self.state.clone(),
            log_path: self.log.path().to_path_buf(),
        }
    }
}

fn legal_by_actor(s: &SessionState) -> BTreeMap<Actor, Vec<MoveKind>> {
    let mut out: BTreeMap<Actor, Vec<MoveKind>> = Actor::BOTH.into_iter().map(|a| (a, Vec::new())).collect();
    for (actor, kind) in s.legal_moves() {
        out.entry(actor).or_default().push(kind);
    }
    out
}

fn now_ms() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_millis() as u64)
}

/// Live view of a session's events, starting after a given seq.
pub struct Subscription {
    backlog: VecDeque<WireEvent>,
    rx: broadcast::Receiver<WireEvent>,
    last_seq: u64,
    session: Arc<Mutex<Session>>,
}

impl Subscription {
    /// Next event in seq order; `None` once the session is gone.
    pub async fn next(&mut self) -> Option<WireEvent> {
        loop {
            if let Some(e) = self.backlog.pop_front() {
                self.last_seq = e.seq;
                return Some(e);
            }
            match self.rx.recv().await {
                Ok(e) if e.seq <= self.last_seq => continue,
                Ok(e) => {
                    self.last_seq = e.seq;
                    return Some(e);
                }
                Err(broadcast::error::RecvError::Lagged(_)) => self.refill(),
                Err(broadcast::error::RecvError::Closed) => return None,
            }
        }
    }

    /// Non-blocking variant of [`Subscription::next`].
    pub fn try_next(&mut self) -> Option<WireEvent> {
        loop {
            if let Some(e) = self.backlog.pop_front() {
                self.last_seq = e.seq;
                return Some(e);
            }
            match self.rx.try_recv() {
                Ok(e) if e.seq <= self.last_seq => continue,
                Ok(e) => {
                    self.last_seq = e.seq;
                    return Some(e);
                }
                Err(broadcast::error::TryRecvError::Lagged(_)) => self.refill(),
                Err(_) => return None,
            }
        }
    }

    fn refill(&mut self) {
        let s = self.session.lock().unwrap();
        self.backlog
            .extend(s.events.iter().skip(self.last_seq as usize).cloned());
    }
}

/// Result of scanning a data directory on startup.
#[derive(Debug, Default)]
pub struct RecoveryReport {
    pub recovered: Vec<String>,
    /// Logs that could not be replayed, with the reason.
    pub skipped: Vec<(PathBuf, String)>,
}

pub struct SessionManager {
    data_dir: PathBuf,
    timeout: Duration,
    sessions: RwLock<HashMap<String, Arc<Mutex<Session>>>>,
}

impl SessionManager {
    pub fn new(data_dir: impl Into<PathBuf>, timeout: Duration) -> io::Result<Self> {
        let data_dir = data_dir.into();
        std::fs::create_dir_all(&data_dir)?;
        Ok(SessionManager {
            data_dir,
            timeout,
            sessions: RwLock::new(HashMap::new()),
        })
    }

    /// Opens a manager over `data_dir` and reloads every session log in it.
    pub fn recover(data_dir: impl Into<PathBuf>, timeout: Duration) -> io::Result<(Self, RecoveryReport)> {
        let mgr = SessionManager::new(data_dir, timeout)?;
        let mut report = RecoveryReport::default();
        let mut paths: Vec<PathBuf> = std::fs::read_dir(&mgr.data_dir)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "jsonl"))
            .collect();
        paths.sort();
        for path in paths {
            match mgr.load(&path) {
                Ok(id) => report.recovered.push(id),
                Err(e) => {
                    tracing::warn!(path = %path.display(), error = %e, "skipping session log");
                    report.skipped.push((path, e.to_string()));
                }
            }
        }
        Ok((mgr, report))
    }

    fn load(&self, path: &Path) -> Result<String, ServiceError> {
        let replayed = read_log(path)?;
        let file_len = std::fs::metadata(path)?.len();
        if replayed.valid_len < file_len {
            // Drop a torn final write so new appends start on a fresh line.
            std::fs::OpenOptions::new()
                .write(true)
                .open(path)?
                .set_len(replayed.valid_len)?;
        }
        let mut session = Session::new(replayed.header, LogWriter::open(path)?);
        for m in replayed.state.history() {
            let move_seq = session.state.history().len() as u64 + 1;
            session.state.apply(m).expect("replayed log is legal");
            session.emit(EventType::MoveAccepted, json!({ "move_seq": move_seq, "move": m }));
            session.emit_legal_moves();
        }
        let id = session.header.session_id.clone();
        self.sessions
            .write()
            .unwrap()
            .insert(id.clone(), Arc::new(Mutex::new(session)));
        Ok(id)
    }

    pub fn data_dir(&self) -> &Path {
        &self.data_dir
    }

    pub fn timeout(&self) -> Duration {
        self.timeout
    }

    pub fn session_ids(&self) -> Vec<String> {
        let mut ids: Vec<String> = self.sessions.read().unwrap().keys().cloned().collect();
        ids.sort();
        ids
    }

    /// Creates a session and its log. Auto mode needs a knowledge base for
    /// the scripted explainer.
    pub fn create_session(
        &self,
        mode: Mode,
        kb: Option<Vec<ExplanandumRecord>>,
    ) -> Result<CreatedSession, ServiceError> {
        if mode == Mode::Auto && kb.as_ref().is_none_or(|kb| kb.is_empty()) {
            return Err(ServiceError::MissingKnowledgeBase);
        }
        let session_id = Uuid::new_v4().to_string();
        let credentials: BTreeMap<Actor, String> = Actor::BOTH
            .into_iter()
            .map(|a| (a, Uuid::new_v4().to_string()))
            .collect();
        let header = LogHeader {
            session_id: session_id.clone(),
            mode,
            created_at: now_ms(),
            credentials: credentials.clone(),
            kb,
        };
        let log = LogWriter::create(&self.log_path(&session_id), &header)?;
        let session = Session::new(header, log);
        self.sessions
            .write()
            .unwrap()
            .insert(session_id.clone(), Arc::new(Mutex::new(session)));
        tracing::info!(%session_id, ?mode, "session created");
        Ok(CreatedSession {
            session_id,
            mode,
            credentials,
        })
    }

    fn log_path(&self, id: &str) -> PathBuf {
        self.data_dir.join(format!("{id}.jsonl"))
    }

    fn get(&self, id: &str) -> Result<Arc<Mutex<Session>>, ServiceError> {
        self.sessions
            .read()
            .unwrap()
            .get(id)
            .cloned()
            .ok_or_else(|| ServiceError::UnknownSession(id.to_string()))
    }

    fn expire_locked(&self, s: &mut Session) {
        if !s.closed && s.last_activity.elapsed() >= self.timeout {
            s.close("timeout");
        }
    }

    /// Submits a move on behalf of the credential's holder.
    ///
    /// An illegal move yields a `move_rejected` event for the caller only;
    /// nothing is logged or broadcast. A legal one is synced to the log
    /// before the `move_accepted` event is returned. In auto mode the
    /// scripted explainer's replies are committed before this returns.
    pub fn post_move(&self, id: &str, credential: &str, m: Move) -> Result<WireEvent, ServiceError> {
        let session = self.get(id)?;
        let mut s = session.lock().unwrap();
        self.expire_locked(&mut s);
        let actor = s
            .header
            .credentials
            .iter()
            .find_map(|(a, c)| (c == credential).then_some(*a))
            .ok_or(ServiceError::BadCredential)?;
        if s.closed {
            return Err(ServiceError::SessionClosed);
        }
        if actor != m.actor {
            return Err(ServiceError::ActorMismatch {
                credential: actor,
                claimed: m.actor,
            });
        }
        s.last_activity = Instant::now();
        if let Err(e) = s.state.clone().apply(&m) {
            let payload = json!({
                "reason": FailureReason::Protocol(e.clone()).code(),
                "message": e.to_string(),
                "move": m,
            });
            return Ok(WireEvent {
                kind: EventType::MoveRejected,
                seq: s.last_seq(),
                payload,
            });
        }
        let accepted = s.commit(&m)?;
        if s.header.mode == Mode::Auto {
            let kb = s.header.kb.clone().unwrap_or_default();
            for _ in 0..MAX_AUTO_REPLIES {
                if !explainer_to_move(&s.state) {
                    break;
                }
                match ScriptedExplainer::default().step(&s.state, &kb) {
                    Ok(reply) => {
                        s.commit(&reply)?;
                    }
                    Err(e) => {
                        tracing::warn!(session_id = %id, error = %e, "scripted explainer produced no reply");
                        break;
                    }
                }
            }
        }
        Ok(accepted)
    }

    pub fn session_view(&self, id: &str) -> Result<SessionView, ServiceError> {
        let session = self.get(id)?;
        let mut s = session.lock().unwrap();
        self.expire_locked(&mut s);
        Ok(s.view())
    }

    /// Events with seq greater than `from_seq`, then live events. Either
    /// participant's credential may subscribe.
    pub fn subscribe(&self, id: &str, credential: &str, from_seq: u64) -> Result<Subscription, ServiceError> {
        let session = self.get(id)?;
        let s = session.lock().unwrap();
        if !s.header.credentials.values().any(|c| c == credential) {
            return Err(ServiceError::BadCredential);
        }
        let backlog = s.events.iter().skip(from_seq as usize).cloned().collect();
        let rx = s.tx.subscribe();
        drop(s);
        Ok(Subscription {
            backlog,
            rx,
            last_seq: from_seq,
            session,
        })
    }

    /// `tags`: one line per finished dialogue, each valid on its own; an open
    /// dialogue is included when it could end where it stands.
    /// `jsonl`: every move of the session, one per line.
    pub fn export_trace(&self, id: &str, format: ExportFormat) -> Result<String, ServiceError> {
        let session = self.get(id)?;
        let s = session.lock().unwrap();
        Ok(export(&s.state, format))
    }

    /// Closes a session; later moves are refused.
    pub fn close_session(&self, id: &str, reason: &str) -> Result<(), ServiceError> {
        let session = self.get(id)?;
        session.lock().unwrap().close(reason);
        Ok(())
    }

    /// Closes every session idle for longer than the timeout. Returns their ids.
    pub fn expire_idle(&self) -> Vec<String> {
        let sessions: Vec<_> = self
            .sessions
            .read()
            .unwrap()
            .iter()
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect();
        let mut expired = Vec::new();
        for (id, session) in sessions {
            let mut s = session.lock().unwrap();
            let was_open = !s.closed;
            self.expire_locked(&mut s);
            if was_open && s.closed {
                tracing::info!(session_id = %id, "session timed out");
                expired.push(id);
            }
        }
        expired
    }
}

pub fn export(state: &SessionState, format: ExportFormat) -> String {
    let history = state.history();
    match format {
        ExportFormat::Jsonl => history
            .iter()
            .map(|m| serde_json::to_string(m).expect("moves serialize") + "\n")
            .collect(),
        ExportFormat::Tags => {
            let mut out = String::new();
            let mut start = 0;
            for (i, m) in history.iter().enumerate() {
                if m.kind == MoveKind::EndExplanation {
                    out += &format_tags(&history[start..=i]);
                    out.push('\n');
                    start = i + 1;
                }
            }
            if start < history.len() && state.is_terminal_eligible() {
                out += &format_tags(&history[start..]);
                out.push('\n');
            }
            out
        }
    }
}

//! Append-only session log: one JSON object per line.
//!
//! The first line is a header (`{"header": {...}}`), every following line an
//! accepted move (`{"seq": n, "move": {...}}`) with `seq` counting from 1.
//! The log is the source of truth: a session's state is the fold of its
//! move lines through the protocol engine.

use std::collections::BTreeMap;
use std::fs::{File, OpenOptions};
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use exdialog::agents::ExplanandumRecord;
use exdialog::{Actor, Move, SessionState};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// A human wizard plays the explainer.
    Woz,
    /// The scripted explainer answers automatically.
    Auto,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogHeader {
    pub session_id: String,
    pub mode: Mode,
    /// Milliseconds since the Unix epoch.
    pub created_at: u64,
    pub credentials: BTreeMap<Actor, String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kb: Option<Vec<ExplanandumRecord>>,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum LogLine {
    Header {
        header: LogHeader,
    },
    Move {
        seq: u64,
        #[serde(rename = "move")]
        mv: Move,
    },
}

#[derive(Debug, Error)]
pub enum LogError {
    #[error("corrupt log entry at byte offset {offset}: {detail}")]
    CorruptLog { offset: u64, detail: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Open handle for appending to a session log.
#[derive(Debug)]
pub struct LogWriter {
    path: PathBuf,
    file: File,
}

impl LogWriter {
    /// Creates a new log holding only `header`. Fails if the file exists.
    pub fn create(path: &Path, header: &LogHeader) -> io::Result<Self> {
        let file = OpenOptions::new().create_new(true).append(true).open(path)?;
        let mut w = LogWriter {
            path: path.to_path_buf(),
            file,
        };
        w.write_line(&LogLine::Header { header: header.clone() })?;
        Ok(w)
    }

    /// Reopens an existing log for appending.
    pub fn open(path: &Path) -> io::Result<Self> {
        let file = OpenOptions::new().append(true).open(path)?;
        Ok(LogWriter {
            path: path.to_path_buf(),
            file,
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    /// Appends an accepted move and syncs it to disk.
    pub fn append(&mut self, seq: u64, m: &Move) -> io::Result<()> {
        self.write_line(&LogLine::Move { seq, mv: m.clone() })
    }

    fn write_line(&mut self, line: &LogLine) -> io::Result<()> {
        let mut buf = serde_json::to_vec(line).map_err(io::Error::other)?;
        buf.push(b'\n');
        self.file.write_all(&buf)?;
        self.file.sync_data()
    }
}

/// A decoded log: its header and the state it folds to.
#[derive(Debug, Clone)]
pub struct ReplayedLog {
    pub header: LogHeader,
    pub state: SessionState,
    /// Length in bytes of the well-formed prefix that was replayed.
    pub valid_len: u64,
}

/// Folds a log's bytes through the engine.
///
/// A final line without a trailing newline that does not decode is a torn
/// write and is ignored. Any other undecodable, out-of-sequence or illegal
/// entry is reported as corrupt at its byte offset.
pub fn replay_bytes(bytes: &[u8]) -> Result<ReplayedLog, LogError> {
    let mut header: Option<LogHeader> = None;
    let mut state = SessionState::default();
    let mut offset = 0u64;
    let mut valid_len = 0u64;
    let mut rest = bytes;

    while !rest.is_empty() {
        let (line, terminated, consumed) = match rest.iter().position(|&b| b == b'\n') {
            Some(i) => (&rest[..i], true, i + 1),
            None => (rest, false, rest.len()),
        };
        let corrupt = |detail: String| LogError::CorruptLog { offset, detail };
        let parsed: Result<LogLine, _> = serde_json::from_slice(line);
        match parsed {
            Err(_) if !terminated => break,
            Err(e) => return Err(corrupt(e.to_string())),
            Ok(LogLine::Header { header: h }) => {
                if header.is_some() || offset != 0 {
                    return Err(corrupt("unexpected header".into()));
                }
                header = Some(h);
            }
            Ok(LogLine::Move { seq, mv }) => {
                if header.is_none() {
                    return Err(corrupt("move before header".into()));
                }
                let expected = state.history().len() as u64 + 1;
                if seq != expected {
                    return Err(corrupt(format!("sequence {seq}, expected {expected}")));
                }
                state.apply(&mv).map_err(|e| corrupt(e.to_string()))?;
            }
        }
        offset += consumed as u64;
        valid_len = offset;
        rest = &rest[consumed..];
    }
    let header = header.ok_or(LogError::CorruptLog {
        offset: 0,
        detail: "missing header".into(),
    })?;
    Ok(ReplayedLog {
        header,
        state,
        valid_len,
    })
}

pub fn read_log(path: &Path) -> Result<ReplayedLog, LogError> {
    replay_bytes(&std::fs::read(path)?)
}

/// Rebuilds the session state recorded in a log file.
pub fn replay_log(path: &Path) -> Result<SessionState, LogError> {
    read_log(path).map(|r| r.state)
}

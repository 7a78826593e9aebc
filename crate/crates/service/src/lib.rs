//! Session service for explanation dialogues: a durable move log per
//! session, a session manager that enforces the protocol, and an HTTP and
//! WebSocket interface for the console.

pub mod commands;
pub mod config;
pub mod http;
pub mod log;
pub mod session;

pub use log::{replay_log, LogError, Mode};
pub use session::{
    CreatedSession, EventType, ExportFormat, ServiceError, SessionManager, SessionView, Subscription, WireEvent,
};

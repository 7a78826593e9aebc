//! HTTP and WebSocket front end over a [`SessionManager`].
//!
//! | method | path | |
//! |---|---|---|
//! | POST | `/sessions` | create; body `{"mode": "woz"|"auto", "kb": [...]}` |
//! | GET | `/sessions/{id}` | history, legal moves per actor, terminal flag |
//! | POST | `/sessions/{id}/moves` | body `{"credential": "...", "move": {...}}` |
//! | GET | `/sessions/{id}/export?format=tags|jsonl` | plain text |
//! | GET | `/sessions/{id}/stream` | WebSocket; first message `{"credential": "...", "last_seq": n}` |

use std::sync::Arc;
use std::time::Duration;

use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use exdialog::agents::ExplanandumRecord;
use exdialog::Move;
use serde::Deserialize;
use serde_json::json;

use crate::config::ServiceConfig;
use crate::log::Mode;
use crate::session::{ExportFormat, ServiceError, SessionManager, WireEvent};

pub struct ApiError(ServiceError);

impl From<ServiceError> for ApiError {
    fn from(e: ServiceError) -> Self {
        ApiError(e)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let (status, code) = match &self.0 {
            ServiceError::UnknownSession(_) => (StatusCode::NOT_FOUND, "unknown_session"),
            ServiceError::BadCredential => (StatusCode::UNAUTHORIZED, "bad_credential"),
            ServiceError::ActorMismatch { .. } => (StatusCode::FORBIDDEN, "actor_mismatch"),
            ServiceError::SessionClosed => (StatusCode::CONFLICT, "session_closed"),
            ServiceError::MissingKnowledgeBase => (StatusCode::BAD_REQUEST, "missing_knowledge_base"),
            ServiceError::Log(_) | ServiceError::Io(_) => (StatusCode::INTERNAL_SERVER_ERROR, "storage"),
        };
        if status.is_server_error() {
            tracing::error!(error = %self.0, "request failed");
        }
        (status, Json(json!({ "error": code, "message": self.0.to_string() }))).into_response()
    }
}

#[derive(Debug, Deserialize)]
pub struct CreateRequest {
    pub mode: Mode,
    #[serde(default)]
    pub kb: Option<Vec<ExplanandumRecord>>,
}

#[derive(Debug, Deserialize)]
pub struct MoveRequest {
    pub credential: String,
    #[serde(rename = "move")]
    pub mv: Move,
}

#[derive(Debug, Deserialize)]
pub struct ExportQuery {
    pub format: Option<ExportFormat>,
}

/// First message a stream client sends.
#[derive(Debug, Deserialize)]
pub struct Hello {
    pub credential: String,
    #[serde(default)]
    pub last_seq: u64,
}

type AppState = Arc<SessionManager>;

pub fn router(mgr: Arc<SessionManager>) -> Router {
    Router::new()
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(view_session))
        .route("/sessions/{id}/moves", post(post_move))
        .route("/sessions/{id}/export", get(export_trace))
        .route("/sessions/{id}/stream", get(stream))
        .with_state(mgr)
}

async fn create_session(State(mgr): State<AppState>, Json(req): Json<CreateRequest>) -> Result<Response, ApiError> {
    let created = mgr.create_session(req.mode, req.kb)?;
    Ok((StatusCode::CREATED, Json(created)).into_response())
}

async fn view_session(State(mgr): State<AppState>, Path(id): Path<String>) -> Result<Response, ApiError> {
    Ok(Json(mgr.session_view(&id)?).into_response())
}

async fn post_move(
    State(mgr): State<AppState>,
    Path(id): Path<String>,
    Json(req): Json<MoveRequest>,
) -> Result<Json<WireEvent>, ApiError> {
    Ok(Json(mgr.post_move(&id, &req.credential, req.mv)?))
}

async fn export_trace(
    State(mgr): State<AppState>,
    Path(id): Path<String>,
    Query(q): Query<ExportQuery>,
) -> Result<Response, ApiError> {
    let format = q.format.unwrap_or(ExportFormat::Tags);
    let body = mgr.export_trace(&id, format)?;
    let mime = match format {
        ExportFormat::Tags => "text/plain; charset=utf-8",
        ExportFormat::Jsonl => "application/x-ndjson",
    };
    Ok(([(header::CONTENT_TYPE, mime)], body).into_response())
}

async fn stream(State(mgr): State<AppState>, Path(id): Path<String>, ws: WebSocketUpgrade) -> Response {
    ws.on_upgrade(move |socket| run_stream(mgr, id, socket))
}

async fn send(socket: &mut WebSocket, e: &WireEvent) -> bool {
    let text = serde_json::to_string(e).expect("events serialize");
    socket.send(Message::Text(text.into())).await.is_ok()
}

async fn run_stream(mgr: AppState, id: String, mut socket: WebSocket) {
    let hello = loop {
        match socket.recv().await {
            Some(Ok(Message::Text(t))) => break serde_json::from_str::<Hello>(&t),
            Some(Ok(Message::Ping(_) | Message::Pong(_))) => continue,
            _ => return,
        }
    };
    let hello = match hello {
        Ok(h) => h,
        Err(e) => {
            send(&mut socket, &WireEvent::error(format!("bad hello: {e}"))).await;
            return;
        }
    };
    let mut sub = match mgr.subscribe(&id, &hello.credential, hello.last_seq) {
        Ok(s) => s,
        Err(e) => {
            send(&mut socket, &WireEvent::error(e.to_string())).await;
            return;
        }
    };
    loop {
        tokio::select! {
            event = sub.next() => match event {
                Some(e) => {
                    if !send(&mut socket, &e).await {
                        return;
                    }
                }
                None => return,
            },
            incoming = socket.recv() => match incoming {
                Some(Ok(Message::Close(_))) | None | Some(Err(_)) => return,
                Some(Ok(_)) => {}
            },
        }
    }
}

/// Recovers sessions from the data directory and serves until `shutdown` resolves.
pub async fn serve_with_shutdown(
    config: ServiceConfig,
    listener: tokio::net::TcpListener,
    shutdown: impl std::future::Future<Output = ()> + Send + 'static,
) -> anyhow::Result<()> {
    let (mgr, report) = SessionManager::recover(&config.data_dir, config.session_timeout)?;
    tracing::info!(
        recovered = report.recovered.len(),
        skipped = report.skipped.len(),
        data_dir = %config.data_dir.display(),
        "session logs loaded"
    );
    serve_manager(Arc::new(mgr), listener, shutdown).await
}

/// Serves `mgr` on `listener`, closing idle sessions in the background.
pub async fn serve_manager(
    mgr: Arc<SessionManager>,
    listener: tokio::net::TcpListener,
    shutdown: impl std::future::Future<Output = ()> + Send + 'static,
) -> anyhow::Result<()> {
    let reaper = {
        let mgr = mgr.clone();
        let period = (mgr.timeout() / 4).clamp(Duration::from_millis(100), Duration::from_secs(30));
        tokio::spawn(async move {
            let mut tick = tokio::time::interval(period);
            loop {
                tick.tick().await;
                mgr.expire_idle();
            }
        })
    };
    let result = axum::serve(listener, router(mgr))
        .with_graceful_shutdown(shutdown)
        .await;
    reaper.abort();
    Ok(result?)
}

/// Binds the configured port and serves until Ctrl-C.
pub async fn serve(config: ServiceConfig) -> anyhow::Result<()> {
    let listener = tokio::net::TcpListener::bind(("0.0.0.0", config.port)).await?;
    tracing::info!(addr = %listener.local_addr()?, "listening");
    serve_with_shutdown(config, listener, async {
        let _ = tokio::signal::ctrl_c().await;
    })
    .await
}

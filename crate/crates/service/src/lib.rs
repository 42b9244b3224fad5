//! HTTP and websocket front end: assist queries go through a bounded
//! per-session queue, client events go straight to the log.

use std::sync::Arc;

use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::State;
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use futures_util::{SinkExt, StreamExt};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use tokio::sync::oneshot;

use outbound_core::events::EventError;
use outbound_core::mt::{LangPair, MtError};
use outbound_core::session::{AssistError, AssistQueue, QueueError};
use outbound_core::{Response as AssistResponse, Service};

#[derive(Clone)]
pub struct AppState {
    service: Arc<Service>,
    queue: Arc<AssistQueue>,
}

impl AppState {
    pub fn new(service: Service, queue: AssistQueue) -> Self {
        Self {
            service: Arc::new(service),
            queue: Arc::new(queue),
        }
    }

    pub fn service(&self) -> &Arc<Service> {
        &self.service
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AssistRequest {
    pub session: String,
    pub text: String,
    pub engine: String,
    pub serial: u64,
    #[serde(default)]
    pub src: Option<String>,
    #[serde(default)]
    pub tgt: Option<String>,
}

/// An error with the status it maps to.
#[derive(Debug)]
pub struct ApiError {
    pub status: StatusCode,
    pub kind: &'static str,
    pub message: String,
}

impl ApiError {
    fn new(status: StatusCode, kind: &'static str, message: impl ToString) -> Self {
        Self {
            status,
            kind,
            message: message.to_string(),
        }
    }

    fn body(&self) -> Value {
        json!({ "error": self.kind, "message": self.message })
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body())).into_response()
    }
}

fn mt_error(e: &MtError) -> ApiError {
    let (status, kind) = match e {
        MtError::UnknownEngine(_) => (StatusCode::NOT_FOUND, "unknown_engine"),
        MtError::UnsupportedPair { .. } => (StatusCode::UNPROCESSABLE_ENTITY, "unsupported_pair"),
        MtError::LengthLimitExceeded { .. } => (StatusCode::PAYLOAD_TOO_LARGE, "length_limit_exceeded"),
        MtError::RemoteFailure { .. } => (StatusCode::BAD_GATEWAY, "remote_failure"),
        _ => (StatusCode::INTERNAL_SERVER_ERROR, "engine_error"),
    };
    ApiError::new(status, kind, e)
}

impl From<AssistError> for ApiError {
    fn from(e: AssistError) -> Self {
        match &e {
            AssistError::EmptyInput => ApiError::new(StatusCode::BAD_REQUEST, "empty_input", &e),
            AssistError::Engine(m) => mt_error(m),
            AssistError::Translation(rt) => {
                let mut err = mt_error(&rt.error);
                err.message = e.to_string();
                err
            }
            AssistError::Estimation(_) => ApiError::new(StatusCode::BAD_GATEWAY, "estimation_failed", &e),
            _ => ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", &e),
        }
    }
}

impl From<QueueError> for ApiError {
    fn from(e: QueueError) -> Self {
        match e {
            QueueError::Superseded { .. } => ApiError::new(StatusCode::CONFLICT, "superseded", e),
            QueueError::Full(_) | QueueError::ShuttingDown => {
                ApiError::new(StatusCode::SERVICE_UNAVAILABLE, "busy", e)
            }
        }
    }
}

impl From<EventError> for ApiError {
    fn from(e: EventError) -> Self {
        match e {
            EventError::SchemaViolation(_) => ApiError::new(StatusCode::BAD_REQUEST, "schema_violation", e),
            EventError::StorageFailure(_) => {
                ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "storage_failure", e)
            }
        }
    }
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/assist", post(assist_handler))
        .route("/log", post(log_handler))
        .route("/engines", get(engines_handler))
        .route("/ws", get(ws_handler))
        .with_state(state)
}

/// Queues the query and waits for its result. A newer request from the
/// same session that arrives while this one is still pending cancels it.
pub async fn assist(state: &AppState, req: AssistRequest) -> Result<AssistResponse, ApiError> {
    let pair = match (req.src, req.tgt) {
        (Some(s), Some(t)) => Some(LangPair::new(s, t)),
        (None, None) => None,
        _ => {
            return Err(ApiError::new(
                StatusCode::BAD_REQUEST,
                "bad_request",
                "src and tgt must be given together",
            ))
        }
    };
    let (tx, rx) = oneshot::channel::<Result<AssistResponse, ApiError>>();
    let tx = Arc::new(std::sync::Mutex::new(Some(tx)));
    let cancel_tx = Arc::clone(&tx);
    let service = Arc::clone(&state.service);
    let (session, text, engine, serial) = (req.session.clone(), req.text, req.engine, req.serial);
    let work = move || {
        let res = service
            .handle_request(&session, &text, &engine, pair.as_ref(), serial)
            .map_err(ApiError::from);
        if let Some(tx) = tx.lock().expect("reply lock poisoned").take() {
            let _ = tx.send(res);
        }
    };
    let cancel = move |e: QueueError| {
        if let Some(tx) = cancel_tx.lock().expect("reply lock poisoned").take() {
            let _ = tx.send(Err(e.into()));
        }
    };
    let queue = Arc::clone(&state.queue);
    let session = req.session;
    tokio::task::spawn_blocking(move || queue.submit(&session, serial, work, cancel))
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e))??;
    rx.await
        .map_err(|_| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", "worker dropped request"))?
}

pub async fn append_log(state: &AppState, record: Value) -> Result<u64, ApiError> {
    let service = Arc::clone(&state.service);
    tokio::task::spawn_blocking(move || service.log().append_json(record))
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e))?
        .map_err(ApiError::from)
}

pub fn engines(state: &AppState) -> Value {
    json!(state.service.registry().descriptors().collect::<Vec<_>>())
}

async fn assist_handler(
    State(state): State<AppState>,
    Json(req): Json<AssistRequest>,
) -> Result<Json<AssistResponse>, ApiError> {
    assist(&state, req).await.map(Json)
}

async fn log_handler(State(state): State<AppState>, Json(record): Json<Value>) -> Result<Json<Value>, ApiError> {
    let seq = append_log(&state, record).await?;
    Ok(Json(json!({ "seq": seq })))
}

async fn engines_handler(State(state): State<AppState>) -> Json<Value> {
    Json(engines(&state))
}

/// Websocket message: the HTTP route and its JSON body.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Envelope {
    pub route: String,
    #[serde(default)]
    pub body: Value,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReplyEnvelope {
    pub route: String,
    pub status: u16,
    pub body: Value,
}

fn reply<T: Serialize>(route: &str, res: Result<T, ApiError>) -> ReplyEnvelope {
    let (status, body) = match res {
        Ok(v) => (StatusCode::OK, serde_json::to_value(v).unwrap_or(Value::Null)),
        Err(e) => (e.status, e.body()),
    };
    ReplyEnvelope {
        route: route.to_owned(),
        status: status.as_u16(),
        body,
    }
}

/// Handles one websocket message the way the matching HTTP route would.
pub async fn dispatch(state: &AppState, text: &str) -> ReplyEnvelope {
    let env: Envelope = match serde_json::from_str(text) {
        Ok(e) => e,
        Err(e) => {
            return reply::<()>("", Err(ApiError::new(StatusCode::BAD_REQUEST, "bad_request", e)))
        }
    };
    match env.route.as_str() {
        "/assist" => {
            let res = match serde_json::from_value::<AssistRequest>(env.body) {
                Ok(req) => assist(state, req).await,
                Err(e) => Err(ApiError::new(StatusCode::BAD_REQUEST, "bad_request", e)),
            };
            reply(&env.route, res)
        }
        "/log" => reply(&env.route, append_log(state, env.body).await.map(|seq| json!({ "seq": seq }))),
        "/engines" => reply(&env.route, Ok(engines(state))),
        other => reply::<()>(
            other,
            Err(ApiError::new(StatusCode::NOT_FOUND, "unknown_route", format!("no route {other}"))),
        ),
    }
}

async fn ws_handler(State(state): State<AppState>, ws: WebSocketUpgrade) -> Response {
    ws.on_upgrade(move |socket| serve_socket(state, socket))
}

/// Each message is handled on its own task so a slow assist query does not
/// hold up log writes; replies may therefore arrive out of order and carry
/// the request serial for matching.
async fn serve_socket(state: AppState, socket: WebSocket) {
    use tokio::sync::mpsc;
    let (out_tx, mut out_rx) = mpsc::unbounded_channel::<String>();
    let (mut sink, mut stream) = socket.split();
    let writer = tokio::spawn(async move {
        while let Some(text) = out_rx.recv().await {
            if sink.send(Message::Text(text.into())).await.is_err() {
                break;
            }
        }
    });
    while let Some(Ok(msg)) = stream.next().await {
        let text = match msg {
            Message::Text(t) => t.to_string(),
            Message::Close(_) => break,
            _ => continue,
        };
        let state = state.clone();
        let out_tx = out_tx.clone();
        tokio::spawn(async move {
            let r = dispatch(&state, &text).await;
            let _ = out_tx.send(serde_json::to_string(&r).expect("reply serializes"));
        });
    }
    drop(out_tx);
    let _ = writer.await;
}

/// Binds `addr` and serves until the process is stopped.
pub async fn serve(addr: &str, state: AppState) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    tracing::info!(addr = %listener.local_addr()?, "listening");
    axum::serve(listener, router(state)).await
}

use std::future::Future;
use std::io;
use std::path::Path;

use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::State;
use axum::http::StatusCode;
use axum::response::Response;
use axum::routing::get;
use axum::{Json, Router};
use streamviz::session::{Command, ServerMessage, Status};
use tokio::net::TcpListener;
use tokio::sync::broadcast::error::RecvError;
use tower_http::services::ServeDir;
use tracing::debug;

use crate::actor::SessionHandle;

/// Routes `/session` and `/status`; everything else is served from
/// `static_dir` when given.
pub fn router(handle: SessionHandle, static_dir: Option<&Path>) -> Router {
    let app = Router::new()
        .route("/session", get(upgrade))
        .route("/status", get(status))
        .with_state(handle);
    match static_dir {
        Some(dir) => app.fallback_service(ServeDir::new(dir)),
        None => app,
    }
}

pub async fn serve(
    listener: TcpListener,
    app: Router,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> io::Result<()> {
    axum::serve(listener, app)
        .with_graceful_shutdown(shutdown)
        .await
}

async fn status(State(handle): State<SessionHandle>) -> Result<Json<Status>, StatusCode> {
    handle
        .status()
        .await
        .map(Json)
        .map_err(|_| StatusCode::SERVICE_UNAVAILABLE)
}

async fn upgrade(ws: WebSocketUpgrade, State(handle): State<SessionHandle>) -> Response {
    ws.on_upgrade(move |socket| client(socket, handle))
}

async fn send(socket: &mut WebSocket, text: &str) -> bool {
    socket.send(Message::Text(text.into())).await.is_ok()
}

async fn client(mut socket: WebSocket, handle: SessionHandle) {
    let mut messages = handle.subscribe();
    if let Ok(frame) = handle.last_frame().await {
        if !send(&mut socket, &ServerMessage::Frame(frame).to_json()).await {
            return;
        }
    }
    loop {
        tokio::select! {
            msg = messages.recv() => match msg {
                Ok(text) => {
                    if !send(&mut socket, &text).await {
                        break;
                    }
                }
                Err(RecvError::Lagged(n)) => debug!(skipped = n, "slow client"),
                Err(RecvError::Closed) => break,
            },
            incoming = socket.recv() => match incoming {
                Some(Ok(Message::Text(text))) => {
                    let reply = match serde_json::from_str::<Command>(&text) {
                        Ok(command) => match handle.command(command).await {
                            Ok(reply) => reply,
                            Err(_) => break,
                        },
                        Err(e) => Some(ServerMessage::Error { message: format!("bad command: {e}") }),
                    };
                    if let Some(reply) = reply {
                        if !send(&mut socket, &reply.to_json()).await {
                            break;
                        }
                    }
                }
                Some(Ok(Message::Close(_))) | None | Some(Err(_)) => break,
                Some(Ok(_)) => {}
            },
        }
    }
}

use std::sync::Arc;
use std::time::Duration;

use streamviz::session::{Command, Frame, ServerMessage, Session, Status};
use tokio::sync::{broadcast, mpsc, oneshot};
use tokio::task::JoinHandle;
use tokio::time::{interval, Interval, MissedTickBehavior};
use tracing::debug;

use crate::error::ServiceError;

const BROADCAST_CAPACITY: usize = 64;
const REQUEST_CAPACITY: usize = 1024;

enum Request {
    Articles(Vec<String>),
    Command(Command, oneshot::Sender<Option<ServerMessage>>),
    Status(oneshot::Sender<Status>),
    LastFrame(oneshot::Sender<Frame>),
}

/// Cheap, cloneable handle to the session task.
#[derive(Clone)]
pub struct SessionHandle {
    requests: mpsc::Sender<Request>,
    messages: broadcast::Sender<Arc<str>>,
}

impl SessionHandle {
    async fn request<T>(
        &self,
        make: impl FnOnce(oneshot::Sender<T>) -> Request,
    ) -> Result<T, ServiceError> {
        let (tx, rx) = oneshot::channel();
        self.requests
            .send(make(tx))
            .await
            .map_err(|_| ServiceError::Stopped)?;
        rx.await.map_err(|_| ServiceError::Stopped)
    }

    /// Queues wire-format record lines for ingestion.
    pub async fn submit(&self, lines: Vec<String>) -> Result<(), ServiceError> {
        self.requests
            .send(Request::Articles(lines))
            .await
            .map_err(|_| ServiceError::Stopped)
    }

    /// Applies a command. Broadcast results go to every subscriber; the
    /// returned message, if any, is meant for the issuer only.
    pub async fn command(&self, command: Command) -> Result<Option<ServerMessage>, ServiceError> {
        self.request(|tx| Request::Command(command, tx)).await
    }

    pub async fn status(&self) -> Result<Status, ServiceError> {
        self.request(Request::Status).await
    }

    pub async fn last_frame(&self) -> Result<Frame, ServiceError> {
        self.request(Request::LastFrame).await
    }

    /// Serialized server messages (frames and opened articles).
    pub fn subscribe(&self) -> broadcast::Receiver<Arc<str>> {
        self.messages.subscribe()
    }
}

fn ticker(rate: f64) -> Interval {
    let mut t = interval(Duration::from_secs_f64(1.0 / rate));
    t.set_missed_tick_behavior(MissedTickBehavior::Delay);
    t
}

/// Starts the session task. It runs until every handle is dropped and then
/// returns the session.
pub fn spawn(session: Session) -> (SessionHandle, JoinHandle<Session>) {
    let (requests, rx) = mpsc::channel(REQUEST_CAPACITY);
    let (messages, _) = broadcast::channel(BROADCAST_CAPACITY);
    let handle = SessionHandle {
        requests,
        messages: messages.clone(),
    };
    let task = tokio::spawn(run(session, rx, messages));
    (handle, task)
}

async fn run(
    mut session: Session,
    mut requests: mpsc::Receiver<Request>,
    messages: broadcast::Sender<Arc<str>>,
) -> Session {
    let publish = |msg: &ServerMessage| {
        // no subscribers is fine
        let _ = messages.send(Arc::from(msg.to_json()));
    };
    let mut rate = session.config().tick_rate;
    let mut clock = ticker(rate);
    loop {
        tokio::select! {
            _ = clock.tick() => {
                if session.is_paused() {
                    continue;
                }
                let frame = session.tick();
                publish(&ServerMessage::Frame(frame));
            }
            request = requests.recv() => {
                let Some(request) = request else { break };
                match request {
                    Request::Articles(lines) => session.on_articles(lines.iter().map(String::as_str)),
                    Request::Command(command, reply) => {
                        debug!(?command, "client command");
                        let outcome = session.handle(command);
                        for msg in &outcome.broadcast {
                            publish(msg);
                        }
                        let _ = reply.send(outcome.reply);
                        if session.config().tick_rate != rate {
                            rate = session.config().tick_rate;
                            clock = ticker(rate);
                        }
                    }
                    Request::Status(reply) => {
                        let _ = reply.send(session.status());
                    }
                    Request::LastFrame(reply) => {
                        let _ = reply.send(session.last_frame().clone());
                    }
                }
            }
        }
    }
    session
}

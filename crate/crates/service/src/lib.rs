//! Session server: one task owns the [`streamviz::session::Session`]; record
//! intake, client commands and the tick loop all go through it.
//!
//! Endpoints: `GET /session` (WebSocket) and `GET /status` (JSON counters).

mod actor;
mod error;
mod intake;
mod server;

pub use actor::{spawn, SessionHandle};
pub use error::ServiceError;
pub use intake::{accept_records, control_channel, forward_control, read_records, ChannelControl};
pub use server::{router, serve};

#[derive(Debug, thiserror::Error)]
pub enum ServiceError {
    #[error("session task has stopped")]
    Stopped,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

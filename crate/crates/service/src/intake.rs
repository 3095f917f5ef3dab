use std::io;

use streamviz::session::ControlSink;
use tokio::io::{AsyncBufRead, AsyncBufReadExt, AsyncWrite, AsyncWriteExt, BufReader};
use tokio::net::TcpListener;
use tokio::sync::mpsc;
use tracing::{info, warn};

use crate::actor::SessionHandle;
use crate::error::ServiceError;

/// Feeds newline-delimited records into the session until end of input.
/// Returns the number of lines read.
pub async fn read_records<R: AsyncBufRead + Unpin>(
    reader: R,
    handle: &SessionHandle,
) -> Result<u64, ServiceError> {
    let mut lines = reader.lines();
    let mut count = 0;
    while let Some(line) = lines.next_line().await? {
        count += 1;
        handle.submit(vec![line]).await?;
    }
    Ok(count)
}

/// Accepts scraper connections and reads records from each of them.
pub async fn accept_records(
    listener: TcpListener,
    handle: SessionHandle,
) -> Result<(), ServiceError> {
    loop {
        let (stream, peer) = listener.accept().await?;
        info!(%peer, "scraper connected");
        let handle = handle.clone();
        tokio::spawn(async move {
            match read_records(BufReader::new(stream), &handle).await {
                Ok(n) => info!(%peer, records = n, "scraper disconnected"),
                Err(e) => warn!(%peer, error = %e, "scraper intake failed"),
            }
        });
    }
}

/// Control sink that hands lines to an async writer task.
#[derive(Debug, Clone)]
pub struct ChannelControl(mpsc::UnboundedSender<String>);

impl ControlSink for ChannelControl {
    fn send_line(&mut self, line: &str) -> io::Result<()> {
        self.0.send(line.to_owned()).map_err(|_| {
            io::Error::new(io::ErrorKind::BrokenPipe, "scraper control channel closed")
        })
    }
}

pub fn control_channel() -> (ChannelControl, mpsc::UnboundedReceiver<String>) {
    let (tx, rx) = mpsc::unbounded_channel();
    (ChannelControl(tx), rx)
}

/// Writes control lines to the scraper. Once a write fails the receiver is
/// dropped, so later sends report the channel as closed.
pub async fn forward_control<W: AsyncWrite + Unpin>(
    mut lines: mpsc::UnboundedReceiver<String>,
    mut writer: W,
) -> io::Result<()> {
    while let Some(line) = lines.recv().await {
        writer.write_all(line.as_bytes()).await?;
        writer.write_all(b"\n").await?;
        writer.flush().await?;
    }
    Ok(())
}

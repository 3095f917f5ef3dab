//! The scraper process: polls one feed (or replays a record file) and
//! writes article records to stdout or a TCP connection.

use std::io::{self, BufRead, BufWriter, Write};
use std::net::TcpStream;
use std::sync::mpsc::{self, RecvTimeoutError};
use std::thread;
use std::time::Duration;

use anyhow::Context;
use streamviz::scraper::{
    parse_control_line, replay, ControlLine, FeedSource, Fetch, FileFetcher, FilterConfig, Poller,
    SourceKind,
};
use tracing::{info, warn};

pub struct HttpFetcher {
    client: reqwest::blocking::Client,
}

impl HttpFetcher {
    pub fn new() -> anyhow::Result<Self> {
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(30))
            .user_agent(concat!("streamviz/", env!("CARGO_PKG_VERSION")))
            .build()?;
        Ok(Self { client })
    }
}

impl Fetch for HttpFetcher {
    fn fetch(&mut self, target: &str) -> streamviz::Result<Vec<u8>> {
        let source = |e: reqwest::Error| streamviz::Error::Source(format!("{target}: {e}"));
        let response = self.client.get(target).send().map_err(source)?;
        let response = response.error_for_status().map_err(source)?;
        Ok(response.bytes().map_err(source)?.to_vec())
    }
}

enum AnyFetcher {
    File(FileFetcher),
    Http(HttpFetcher),
}

impl Fetch for AnyFetcher {
    fn fetch(&mut self, target: &str) -> streamviz::Result<Vec<u8>> {
        match self {
            AnyFetcher::File(f) => f.fetch(target),
            AnyFetcher::Http(f) => f.fetch(target),
        }
    }
}

pub struct ScrapeOptions {
    pub source: FeedSource,
    pub filter: FilterConfig,
    /// `stdout` or `tcp:host:port`.
    pub out: String,
    pub replay_rate: f64,
    /// Poll once and exit instead of looping.
    pub once: bool,
}

fn open_output(target: &str) -> anyhow::Result<Box<dyn Write>> {
    if target == "stdout" {
        return Ok(Box::new(BufWriter::new(io::stdout().lock())));
    }
    let addr = target.strip_prefix("tcp:").ok_or_else(|| {
        crate::config::config_error(format!(
            "--out must be stdout or tcp:host:port, got `{target}`"
        ))
    })?;
    let stream = TcpStream::connect(addr).with_context(|| format!("connecting to {addr}"))?;
    Ok(Box::new(BufWriter::new(stream)))
}

/// Control lines from stdin, read on a background thread.
fn control_lines() -> mpsc::Receiver<ControlLine> {
    let (tx, rx) = mpsc::channel();
    thread::spawn(move || {
        for line in io::stdin().lock().lines() {
            let Ok(line) = line else { break };
            match parse_control_line(&line) {
                Some(control) => {
                    if tx.send(control).is_err() {
                        break;
                    }
                }
                None => warn!(%line, "ignoring unknown control line"),
            }
        }
    });
    rx
}

pub fn scrape(options: ScrapeOptions) -> anyhow::Result<()> {
    options
        .source
        .validate()
        .map_err(|e| crate::config::config_error(e.to_string()))?;
    let mut out = open_output(&options.out)?;

    if options.source.kind == SourceKind::NdjsonFile {
        let stats = replay(
            options.source.location.as_ref(),
            options.replay_rate,
            &mut out,
        )?;
        info!(
            emitted = stats.emitted,
            malformed = stats.malformed,
            "replay finished"
        );
        return Ok(());
    }

    let mut fetcher = if options.source.is_network() {
        AnyFetcher::Http(HttpFetcher::new()?)
    } else {
        AnyFetcher::File(FileFetcher)
    };
    let interval = Duration::from_secs(options.source.poll_interval.max(1));
    let mut poller = Poller::new(options.source, options.filter);
    if options.once {
        poller.poll_and_emit(&mut fetcher, &mut out, chrono::Utc::now())?;
        return Ok(());
    }

    let control = control_lines();
    let mut control_open = true;
    loop {
        let n = poller.poll_and_emit(&mut fetcher, &mut out, chrono::Utc::now())?;
        info!(emitted = n, "poll");
        if !control_open {
            thread::sleep(interval);
            continue;
        }
        match control.recv_timeout(interval) {
            Ok(ControlLine::Query(terms)) => {
                info!(?terms, "new query");
                poller.set_query(terms);
            }
            Err(RecvTimeoutError::Timeout) => {}
            Err(RecvTimeoutError::Disconnected) => control_open = false,
        }
    }
}

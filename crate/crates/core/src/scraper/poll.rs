use std::collections::{HashSet, VecDeque};
use std::io::Write;
use std::path::Path;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use tracing::warn;
use url::Url;

use super::feed::{parse_feed, FeedKind, RawItem};
use super::record::ArticleRecord;
use super::text::{filter_words, strip_html, FilterConfig};
use crate::error::{Error, Result};

pub const DEFAULT_SEEN_CAPACITY: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceKind {
    Rss,
    Atom,
    NdjsonFile,
}

impl SourceKind {
    pub fn feed_kind(self) -> Option<FeedKind> {
        match self {
            SourceKind::Rss => Some(FeedKind::Rss),
            SourceKind::Atom => Some(FeedKind::Atom),
            SourceKind::NdjsonFile => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SourceKind::Rss => "rss",
            SourceKind::Atom => "atom",
            SourceKind::NdjsonFile => "ndjson_file",
        }
    }
}

impl std::fmt::Display for SourceKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for SourceKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rss" => Ok(SourceKind::Rss),
            "atom" => Ok(SourceKind::Atom),
            "ndjson_file" => Ok(SourceKind::NdjsonFile),
            other => Err(Error::Config(format!("unknown source kind `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct FeedSource {
    /// URL or file path.
    pub location: String,
    pub kind: SourceKind,
    /// Seconds between polls.
    pub poll_interval: u64,
    pub query_terms: Vec<String>,
    /// URL parameter that carries the query terms.
    pub query_param: String,
}

impl Default for FeedSource {
    fn default() -> Self {
        Self {
            location: String::new(),
            kind: SourceKind::Rss,
            poll_interval: 60,
            query_terms: Vec::new(),
            query_param: "q".into(),
        }
    }
}

impl FeedSource {
    pub fn is_network(&self) -> bool {
        self.location.starts_with("http://") || self.location.starts_with("https://")
    }

    pub fn validate(&self) -> Result<()> {
        if self.location.is_empty() {
            return Err(Error::Config("source location is empty".into()));
        }
        if self.is_network() {
            Url::parse(&self.location)
                .map_err(|e| Error::Config(format!("bad source url `{}`: {e}", self.location)))?;
            if self.poll_interval < 1 {
                return Err(Error::Config("poll_interval must be at least 1s".into()));
            }
        }
        Ok(())
    }

    /// Location to fetch, with query terms appended for network sources.
    pub fn request_target(&self) -> String {
        if !self.is_network() || self.query_terms.is_empty() {
            return self.location.clone();
        }
        match Url::parse(&self.location) {
            Ok(mut url) => {
                url.query_pairs_mut()
                    .append_pair(&self.query_param, &self.query_terms.join(" "));
                url.into()
            }
            Err(_) => self.location.clone(),
        }
    }
}

/// Retrieves the raw bytes behind a source location.
pub trait Fetch {
    fn fetch(&mut self, target: &str) -> Result<Vec<u8>>;
}

/// Reads local files, accepting an optional `file://` prefix.
#[derive(Debug, Default, Clone, Copy)]
pub struct FileFetcher;

impl Fetch for FileFetcher {
    fn fetch(&mut self, target: &str) -> Result<Vec<u8>> {
        let path = target.strip_prefix("file://").unwrap_or(target);
        std::fs::read(Path::new(path)).map_err(|e| Error::Source(format!("{path}: {e}")))
    }
}

/// Bounded set of ids with first-in-first-out eviction.
#[derive(Debug, Clone)]
pub struct SeenSet {
    capacity: usize,
    order: VecDeque<String>,
    ids: HashSet<String>,
}

impl SeenSet {
    pub fn new(capacity: usize) -> Self {
        Self {
            capacity: capacity.max(1),
            order: VecDeque::new(),
            ids: HashSet::new(),
        }
    }

    pub fn contains(&self, id: &str) -> bool {
        self.ids.contains(id)
    }

    /// Returns `false` if the id was already present.
    pub fn insert(&mut self, id: &str) -> bool {
        if self.ids.contains(id) {
            return false;
        }
        self.ids.insert(id.to_owned());
        self.order.push_back(id.to_owned());
        while self.order.len() > self.capacity {
            if let Some(old) = self.order.pop_front() {
                self.ids.remove(&old);
            }
        }
        true
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }
}

/// Polls one feed source and emits unseen items as records.
#[derive(Debug, Clone)]
pub struct Poller {
    pub source: FeedSource,
    pub filter: FilterConfig,
    seen: SeenSet,
}

impl Poller {
    pub fn new(source: FeedSource, filter: FilterConfig) -> Self {
        Self::with_seen_capacity(source, filter, DEFAULT_SEEN_CAPACITY)
    }

    pub fn with_seen_capacity(source: FeedSource, filter: FilterConfig, capacity: usize) -> Self {
        Self {
            source,
            filter,
            seen: SeenSet::new(capacity),
        }
    }

    pub fn set_query(&mut self, terms: Vec<String>) {
        self.source.query_terms = terms;
    }

    /// Normalizes a raw item; `now` stands in for a missing timestamp.
    pub fn normalize(&self, item: &RawItem, now: DateTime<Utc>) -> ArticleRecord {
        let clean = |s: &str| {
            if self.filter.strip_markup {
                strip_html(s)
            } else {
                s.trim().to_owned()
            }
        };
        let title = Some(clean(&item.title)).filter(|t| !t.is_empty());
        let text = clean(&item.body);
        let words = filter_words(
            &format!("{} {}", title.as_deref().unwrap_or(""), text),
            &self.filter,
        );
        ArticleRecord {
            id: item.id.clone(),
            source: self.source.location.clone(),
            title,
            ts: item.timestamp.unwrap_or(now),
            text,
            words,
        }
    }

    /// Fetches the source once and writes every unseen item as one line.
    ///
    /// Fetch and parse failures are logged and emit nothing, so the caller
    /// simply retries next interval. A failing output is an error.
    pub fn poll_and_emit<F: Fetch, W: Write>(
        &mut self,
        fetcher: &mut F,
        out: &mut W,
        now: DateTime<Utc>,
    ) -> Result<usize> {
        let Some(kind) = self.source.kind.feed_kind() else {
            return Err(Error::Config(
                "ndjson_file sources are replayed, not polled".into(),
            ));
        };
        let target = self.source.request_target();
        let items = match fetcher
            .fetch(&target)
            .and_then(|bytes| parse_feed(&bytes, kind))
        {
            Ok(items) => items,
            Err(e) => {
                warn!(source = %target, error = %e, "poll failed");
                return Ok(0);
            }
        };
        let mut emitted = 0;
        for item in &items {
            if self.seen.contains(&item.id) {
                continue;
            }
            let mut line = self.normalize(item, now).to_line();
            line.push('\n');
            out.write_all(line.as_bytes())
                .map_err(Error::OutputClosed)?;
            self.seen.insert(&item.id);
            emitted += 1;
        }
        out.flush().map_err(Error::OutputClosed)?;
        Ok(emitted)
    }
}

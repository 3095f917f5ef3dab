//! Turning feeds and recorded corpora into filtered article records.
//!
//! The scraper runs as its own process. It polls a feed (or replays a
//! recorded corpus), strips markup, filters words against a stop list and
//! writes one JSON [`ArticleRecord`] per line to its output. Query changes
//! arrive as `QUERY <terms>` control lines on its standard input.

mod control;
mod feed;
mod poll;
mod record;
mod replay;
mod text;

pub use control::{format_query_line, parse_control_line, ControlLine};
pub use feed::{parse_feed, FeedKind, RawItem};
pub use poll::{
    FeedSource, Fetch, FileFetcher, Poller, SeenSet, SourceKind, DEFAULT_SEEN_CAPACITY,
};
pub use record::ArticleRecord;
pub use replay::{replay, replay_from, ReplayStats};
pub use text::{
    default_stoplist, filter_words, parse_stoplist, strip_html, FilterConfig, DEFAULT_STOPLIST,
};

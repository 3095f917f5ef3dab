use chrono::{DateTime, Utc};
use roxmltree::{Document, Node, ParsingOptions};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use tracing::warn;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeedKind {
    Rss,
    Atom,
}

/// One feed entry before normalization.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawItem {
    pub id: String,
    pub title: String,
    pub body: String,
    pub timestamp: Option<DateTime<Utc>>,
    pub link: String,
}

/// Stable identifier for entries without a guid.
fn fallback_id(link: &str, title: &str) -> String {
    let mut hasher = Sha256::new();
    hasher.update(link.as_bytes());
    hasher.update(b"\n");
    hasher.update(title.as_bytes());
    hex::encode(&hasher.finalize()[..16])
}

fn text_of(node: Node) -> String {
    node.descendants()
        .filter(|n| n.is_text())
        .filter_map(|n| n.text())
        .collect::<String>()
        .trim()
        .to_owned()
}

fn child<'a, 'i>(node: Node<'a, 'i>, name: &str) -> Option<Node<'a, 'i>> {
    node.children()
        .find(|c| c.is_element() && c.tag_name().name() == name)
}

fn child_text(node: Node, name: &str) -> Option<String> {
    child(node, name).map(text_of).filter(|t| !t.is_empty())
}

fn parse_rfc2822(s: &str) -> Option<DateTime<Utc>> {
    DateTime::parse_from_rfc2822(s.trim())
        .ok()
        .map(|d| d.with_timezone(&Utc))
}

fn parse_rfc3339(s: &str) -> Option<DateTime<Utc>> {
    DateTime::parse_from_rfc3339(s.trim())
        .ok()
        .map(|d| d.with_timezone(&Utc))
}

fn finish(
    id: Option<String>,
    title: String,
    body: String,
    link: String,
    ts: Option<DateTime<Utc>>,
) -> RawItem {
    let id = id.unwrap_or_else(|| fallback_id(&link, &title));
    RawItem {
        id,
        title,
        body,
        timestamp: ts,
        link,
    }
}

fn rss_item(item: Node) -> std::result::Result<RawItem, String> {
    let title = child_text(item, "title").unwrap_or_default();
    let link = child_text(item, "link").unwrap_or_default();
    let guid = child_text(item, "guid");
    if guid.is_none() && link.is_empty() && title.is_empty() {
        return Err("item has no guid, link or title".into());
    }
    let body = item
        .children()
        .find(|c| c.is_element() && c.tag_name().name() == "encoded")
        .map(text_of)
        .filter(|t| !t.is_empty())
        .or_else(|| child_text(item, "description"))
        .unwrap_or_default();
    let ts = match (child_text(item, "pubDate"), child_text(item, "date")) {
        (Some(d), _) => Some(parse_rfc2822(&d).ok_or(format!("bad pubDate `{d}`"))?),
        (None, Some(d)) => Some(parse_rfc3339(&d).ok_or(format!("bad dc:date `{d}`"))?),
        (None, None) => None,
    };
    Ok(finish(guid, title, body, link, ts))
}

fn atom_link(entry: Node) -> String {
    entry
        .children()
        .filter(|c| c.is_element() && c.tag_name().name() == "link")
        .find(|l| matches!(l.attribute("rel"), None | Some("alternate")))
        .and_then(|l| l.attribute("href"))
        .unwrap_or_default()
        .to_owned()
}

fn atom_entry(entry: Node) -> std::result::Result<RawItem, String> {
    let title = child_text(entry, "title").unwrap_or_default();
    let link = atom_link(entry);
    let id = child_text(entry, "id");
    if id.is_none() && link.is_empty() && title.is_empty() {
        return Err("entry has no id, link or title".into());
    }
    let body = child_text(entry, "content")
        .or_else(|| child_text(entry, "summary"))
        .unwrap_or_default();
    let ts = match child_text(entry, "updated").or_else(|| child_text(entry, "published")) {
        Some(d) => Some(parse_rfc3339(&d).ok_or(format!("bad timestamp `{d}`"))?),
        None => None,
    };
    Ok(finish(id, title, body, link, ts))
}

/// Parses an RSS (2.0 or 1.0) or Atom document into raw items.
///
/// Entries that cannot be identified or carry an unreadable timestamp are
/// skipped with a warning; a document that is not the declared format is an
/// error.
pub fn parse_feed(bytes: &[u8], kind: FeedKind) -> Result<Vec<RawItem>> {
    let text = std::str::from_utf8(bytes).map_err(|e| Error::Feed(format!("not UTF-8: {e}")))?;
    let options = ParsingOptions {
        allow_dtd: true,
        ..ParsingOptions::default()
    };
    let doc =
        Document::parse_with_options(text, options).map_err(|e| Error::Feed(e.to_string()))?;
    let root = doc.root_element();
    let root_name = root.tag_name().name();

    let (entries, parse): (Vec<Node>, fn(Node) -> std::result::Result<RawItem, String>) = match kind
    {
        FeedKind::Rss if root_name == "rss" => {
            let channel = child(root, "channel")
                .ok_or_else(|| Error::Feed("rss document has no channel".into()))?;
            (
                channel
                    .children()
                    .filter(|c| c.is_element() && c.tag_name().name() == "item")
                    .collect(),
                rss_item,
            )
        }
        FeedKind::Rss if root_name == "RDF" => (
            root.children()
                .filter(|c| c.is_element() && c.tag_name().name() == "item")
                .collect(),
            rss_item,
        ),
        FeedKind::Atom if root_name == "feed" => (
            root.children()
                .filter(|c| c.is_element() && c.tag_name().name() == "entry")
                .collect(),
            atom_entry,
        ),
        _ => {
            return Err(Error::Feed(format!(
                "root element <{root_name}> is not a {kind:?} feed"
            )))
        }
    };

    let mut items = Vec::with_capacity(entries.len());
    for (index, entry) in entries.into_iter().enumerate() {
        match parse(entry) {
            Ok(item) => items.push(item),
            Err(reason) => warn!(index, %reason, "skipping malformed feed entry"),
        }
    }
    Ok(items)
}

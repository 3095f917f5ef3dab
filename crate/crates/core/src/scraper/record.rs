use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::analyzer::Article;
use crate::error::{Error, Result};

/// Wire form of an article: one compact JSON object per line.
///
/// Field order and the `ts` format (`YYYY-MM-DDTHH:MM:SSZ`) are part of the
/// contract between scraper and session.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArticleRecord {
    pub id: String,
    pub source: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub title: Option<String>,
    #[serde(with = "utc_seconds")]
    pub ts: DateTime<Utc>,
    pub text: String,
    pub words: Vec<String>,
}

mod utc_seconds {
    use chrono::{DateTime, Utc};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(ts: &DateTime<Utc>, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(&ts.format("%Y-%m-%dT%H:%M:%SZ"))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<DateTime<Utc>, D::Error> {
        let raw = String::deserialize(d)?;
        DateTime::parse_from_rfc3339(&raw)
            .map(|t| t.with_timezone(&Utc))
            .map_err(serde::de::Error::custom)
    }
}

impl ArticleRecord {
    /// Parses one line of the wire format.
    pub fn from_line(line: &str) -> Result<Self> {
        let record: ArticleRecord = serde_json::from_str(line.trim_end_matches(['\r', '\n']))
            .map_err(|e| Error::MalformedArticle(e.to_string()))?;
        if record.id.is_empty() {
            return Err(Error::MalformedArticle("empty id".into()));
        }
        Ok(record)
    }

    /// Serialized line without the trailing newline.
    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("records always serialize")
    }

    pub fn into_article(self) -> Article {
        Article {
            id: self.id,
            source: self.source,
            title: self.title,
            timestamp: self.ts,
            text: self.text,
            words: self.words,
        }
    }
}

impl From<Article> for ArticleRecord {
    fn from(a: Article) -> Self {
        Self {
            id: a.id,
            source: a.source,
            title: a.title,
            ts: a.timestamp,
            text: a.text,
            words: a.words,
        }
    }
}

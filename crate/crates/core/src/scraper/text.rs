use std::collections::{BTreeSet, HashSet};

use crate::error::{Error, Result};

/// Committed default stop list, one lowercase word per line.
pub const DEFAULT_STOPLIST: &str = include_str!("../../data/stoplist.txt");

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FilterConfig {
    pub stoplist: BTreeSet<String>,
    pub min_len: usize,
    pub max_len: usize,
    pub strip_markup: bool,
}

impl Default for FilterConfig {
    fn default() -> Self {
        Self {
            stoplist: default_stoplist(),
            min_len: 3,
            max_len: 20,
            strip_markup: true,
        }
    }
}

impl FilterConfig {
    pub fn validate(&self) -> Result<()> {
        if self.min_len < 1 || self.min_len > self.max_len {
            return Err(Error::Config(format!(
                "word lengths must satisfy 1 <= min_len <= max_len, got {} and {}",
                self.min_len, self.max_len
            )));
        }
        Ok(())
    }

    /// Whether a lowercased token passes the length and stop-list rules.
    pub fn accepts(&self, word: &str) -> bool {
        let len = word.chars().count();
        len >= self.min_len && len <= self.max_len && !self.stoplist.contains(word)
    }
}

/// Parses a stop-list file: one word per line, `#` starts a comment line.
pub fn parse_stoplist(text: &str) -> BTreeSet<String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_lowercase)
        .collect()
}

pub fn default_stoplist() -> BTreeSet<String> {
    parse_stoplist(DEFAULT_STOPLIST)
}

fn decode_entity(name: &str) -> Option<char> {
    match name {
        "amp" => Some('&'),
        "lt" => Some('<'),
        "gt" => Some('>'),
        "quot" => Some('"'),
        "apos" => Some('\''),
        "nbsp" => Some(' '),
        _ => {
            let num = name.strip_prefix('#')?;
            let code = match num.strip_prefix(['x', 'X']) {
                Some(hex) => u32::from_str_radix(hex, 16).ok()?,
                None => num.parse().ok()?,
            };
            char::from_u32(code)
        }
    }
}

/// Removes markup tags, decodes common character entities and collapses
/// whitespace. An unterminated tag swallows the rest of the text.
pub fn strip_html(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut rest = text;
    while let Some(pos) = rest.find(['<', '&']) {
        out.push_str(&rest[..pos]);
        let tail = &rest[pos..];
        if tail.starts_with('<') {
            out.push(' ');
            rest = match tail.find('>') {
                Some(end) => &tail[end + 1..],
                None => "",
            };
        } else {
            let decoded = tail[1..]
                .find(';')
                .filter(|&end| end <= 10)
                .and_then(|end| decode_entity(&tail[1..end + 1]).map(|c| (c, end + 2)));
            match decoded {
                Some((c, consumed)) => {
                    out.push(c);
                    rest = &tail[consumed..];
                }
                None => {
                    out.push('&');
                    rest = &tail[1..];
                }
            }
        }
    }
    out.push_str(rest);
    out.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Lowercased words of `text` that pass `config`, first occurrences only.
pub fn filter_words(text: &str, config: &FilterConfig) -> Vec<String> {
    let mut seen = HashSet::new();
    text.to_lowercase()
        .split(|c: char| !c.is_alphabetic())
        .filter(|t| !t.is_empty() && config.accepts(t))
        .map(str::to_owned)
        .filter(|w| seen.insert(w.clone()))
        .collect()
}

//! Sliding article window with document frequency and co-occurrence.

use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::euler::CooccurrenceTable;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Article {
    pub id: String,
    pub source: String,
    pub title: Option<String>,
    pub timestamp: DateTime<Utc>,
    pub text: String,
    /// Filtered, lowercased, deduplicated words.
    pub words: Vec<String>,
}

impl Article {
    pub fn validate(&self) -> Result<()> {
        if self.id.is_empty() {
            return Err(Error::MalformedArticle("empty id".into()));
        }
        Ok(())
    }

    pub fn contains(&self, word: &str) -> bool {
        self.words.iter().any(|w| w == word)
    }

    fn dedup_words(&mut self) {
        let mut seen = HashSet::with_capacity(self.words.len());
        self.words.retain(|w| seen.insert(w.clone()));
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct AnalyzerConfig {
    /// Window capacity in articles.
    pub window: usize,
    pub f_min: u32,
    pub n_max: usize,
}

impl Default for AnalyzerConfig {
    fn default() -> Self {
        Self {
            window: 200,
            f_min: 2,
            n_max: 60,
        }
    }
}

impl AnalyzerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.window == 0 {
            return Err(Error::Config("analyzer.window must be at least 1".into()));
        }
        if self.f_min == 0 {
            return Err(Error::Config("analyzer.f_min must be at least 1".into()));
        }
        if self.n_max == 0 {
            return Err(Error::Config("analyzer.n_max must be at least 1".into()));
        }
        Ok(())
    }
}

/// First-in-first-out window of the most recent articles.
#[derive(Debug, Clone)]
pub struct Window {
    capacity: usize,
    articles: VecDeque<Article>,
    ids: HashSet<String>,
}

impl Window {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0, "window capacity must be positive");
        Self {
            capacity,
            articles: VecDeque::with_capacity(capacity),
            ids: HashSet::new(),
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.articles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.articles.is_empty()
    }

    /// Oldest first.
    pub fn articles(&self) -> impl DoubleEndedIterator<Item = &Article> {
        self.articles.iter()
    }

    pub fn clear(&mut self) {
        self.articles.clear();
        self.ids.clear();
    }

    /// Appends an article, evicting the oldest beyond capacity. Returns
    /// `false` when an article with the same id is already in the window.
    pub fn ingest(&mut self, mut article: Article) -> Result<bool> {
        article.validate()?;
        if self.ids.contains(&article.id) {
            return Ok(false);
        }
        article.dedup_words();
        self.ids.insert(article.id.clone());
        self.articles.push_back(article);
        while self.articles.len() > self.capacity {
            if let Some(old) = self.articles.pop_front() {
                self.ids.remove(&old.id);
            }
        }
        Ok(true)
    }

    /// Most recently ingested article containing `word`.
    pub fn latest_with(&self, word: &str) -> Option<&Article> {
        self.articles.iter().rev().find(|a| a.contains(word))
    }
}

/// Number of window articles containing each word.
pub fn frequencies(window: &Window) -> BTreeMap<String, u32> {
    let mut freq = BTreeMap::new();
    for article in window.articles() {
        for word in &article.words {
            *freq.entry(word.clone()).or_insert(0) += 1;
        }
    }
    freq
}

/// Number of window articles containing both words, for every pair drawn
/// from `vocabulary`.
pub fn cooccurrence(window: &Window, vocabulary: &[String]) -> CooccurrenceTable {
    let index: HashMap<&str, usize> = vocabulary
        .iter()
        .enumerate()
        .map(|(i, w)| (w.as_str(), i))
        .collect();
    let mut counts: HashMap<(usize, usize), u32> = HashMap::new();
    let mut present = Vec::new();
    for article in window.articles() {
        present.clear();
        present.extend(
            article
                .words
                .iter()
                .filter_map(|w| index.get(w.as_str()).copied()),
        );
        present.sort_unstable();
        present.dedup();
        for (a, &i) in present.iter().enumerate() {
            for &j in &present[a + 1..] {
                *counts.entry((i, j)).or_insert(0) += 1;
            }
        }
    }
    let mut table = CooccurrenceTable::new();
    for ((i, j), c) in counts {
        table.insert(&vocabulary[i], &vocabulary[j], c);
    }
    table
}

/// Words with `f >= f_min`, most frequent first, ties broken
/// lexicographically, at most `n_max` of them.
pub fn prune_and_select(freq: &BTreeMap<String, u32>, f_min: u32, n_max: usize) -> Vec<String> {
    let mut kept: Vec<(&String, u32)> = freq
        .iter()
        .filter(|(_, &f)| f >= f_min)
        .map(|(w, &f)| (w, f))
        .collect();
    kept.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    kept.into_iter()
        .take(n_max)
        .map(|(w, _)| w.clone())
        .collect()
}

/// Selected vocabulary with its frequencies and co-occurrences.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AnalysisSnapshot {
    pub words: Vec<String>,
    pub freq: BTreeMap<String, u32>,
    pub cooc: CooccurrenceTable,
    pub window_size: usize,
}

impl AnalysisSnapshot {
    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

pub fn snapshot(window: &Window, f_min: u32, n_max: usize) -> AnalysisSnapshot {
    let all = frequencies(window);
    let words = prune_and_select(&all, f_min, n_max);
    let freq = words.iter().map(|w| (w.clone(), all[w])).collect();
    let cooc = cooccurrence(window, &words);
    AnalysisSnapshot {
        words,
        freq,
        cooc,
        window_size: window.len(),
    }
}

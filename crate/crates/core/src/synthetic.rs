//! Seeded generator for topic-structured test corpora.

use chrono::{DateTime, Duration, TimeZone, Utc};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::scraper::ArticleRecord;

#[derive(Debug, Clone, PartialEq)]
pub struct TopicCorpus {
    /// One vocabulary per topic. Topics should not share words.
    pub topics: Vec<Vec<String>>,
    pub articles: usize,
    /// Words drawn from the topic per article, clamped to the vocabulary size.
    pub words_per_article: usize,
    pub seed: u64,
    /// Prefix for generated ids.
    pub id_prefix: String,
    pub start: DateTime<Utc>,
}

impl TopicCorpus {
    /// `topics` vocabularies of `words` each, named `t{topic}w{word}` spelled
    /// with letters only so they survive the word filter.
    pub fn disjoint(topics: usize, words: usize, articles: usize, seed: u64) -> Self {
        let topics = (0..topics)
            .map(|t| {
                (0..words)
                    .map(|w| format!("topic{}word{}", letters(t), letters(w)))
                    .collect()
            })
            .collect();
        Self {
            topics,
            articles,
            words_per_article: 4,
            seed,
            id_prefix: "syn".into(),
            start: Utc.with_ymd_and_hms(2009, 3, 1, 0, 0, 0).unwrap(),
        }
    }

    /// Articles cycle through the topics in order; each takes a random
    /// subset of its topic's words.
    pub fn generate(&self) -> Vec<ArticleRecord> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        (0..self.articles)
            .map(|i| {
                let vocab = &self.topics[i % self.topics.len()];
                let k = self.words_per_article.min(vocab.len());
                let mut words: Vec<String> = vocab.choose_multiple(&mut rng, k).cloned().collect();
                // stable but shuffled order
                if words.len() > 1 {
                    let pivot = rng.random_range(0..words.len());
                    words.rotate_left(pivot);
                }
                ArticleRecord {
                    id: format!("{}{i}", self.id_prefix),
                    source: "synthetic".into(),
                    title: Some(format!("Synthetic {i}")),
                    ts: self.start + Duration::minutes(i as i64),
                    text: words.join(" "),
                    words,
                }
            })
            .collect()
    }

    pub fn to_ndjson(&self) -> String {
        self.generate().iter().map(|r| r.to_line() + "\n").collect()
    }
}

/// 0 -> "a", 25 -> "z", 26 -> "ba", ...
fn letters(mut n: usize) -> String {
    let mut out = Vec::new();
    loop {
        out.push(b'a' + (n % 26) as u8);
        n /= 26;
        if n == 0 {
            break;
        }
    }
    out.reverse();
    String::from_utf8(out).expect("ascii")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scraper::{filter_words, FilterConfig};

    #[test]
    fn generated_words_pass_the_filter() {
        let corpus = TopicCorpus::disjoint(3, 8, 12, 1);
        let config = FilterConfig::default();
        for record in corpus.generate() {
            assert_eq!(filter_words(&record.text, &config), record.words);
        }
    }

    #[test]
    fn topics_alternate_and_stay_disjoint() {
        let corpus = TopicCorpus::disjoint(2, 8, 6, 3);
        for (i, record) in corpus.generate().iter().enumerate() {
            assert_eq!(record.words.len(), 4);
            let topic = &corpus.topics[i % 2];
            assert!(record.words.iter().all(|w| topic.contains(w)));
        }
    }

    #[test]
    fn same_seed_same_corpus() {
        let a = TopicCorpus::disjoint(2, 8, 20, 7).to_ndjson();
        assert_eq!(a, TopicCorpus::disjoint(2, 8, 20, 7).to_ndjson());
        assert_ne!(a, TopicCorpus::disjoint(2, 8, 20, 8).to_ndjson());
        assert_eq!(letters(0), "a");
        assert_eq!(letters(27), "bb");
    }
}

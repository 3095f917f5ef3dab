use std::collections::BTreeMap;

use chrono::DateTime;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use streamviz::analyzer::{cooccurrence, frequencies, snapshot, Article, Window};

fn article(id: usize, words: Vec<String>) -> Article {
    Article {
        id: format!("a{id}"),
        source: "synthetic".into(),
        title: None,
        timestamp: DateTime::UNIX_EPOCH,
        text: words.join(" "),
        words,
    }
}

fn random_corpus(rng: &mut ChaCha8Rng, articles: usize, vocab: usize) -> Vec<Vec<String>> {
    (0..articles)
        .map(|_| {
            let len = rng.random_range(0..12);
            (0..len)
                .map(|_| format!("w{}", rng.random_range(0..vocab)))
                .collect()
        })
        .collect()
}

/// Counts by scanning the raw word lists; repeated words in one article count once.
fn brute_force(docs: &[Vec<String>]) -> (BTreeMap<String, u32>, BTreeMap<(String, String), u32>) {
    let mut vocab: Vec<String> = docs.iter().flatten().cloned().collect();
    vocab.sort();
    vocab.dedup();
    let mut freq = BTreeMap::new();
    for w in &vocab {
        let f = docs.iter().filter(|d| d.contains(w)).count() as u32;
        freq.insert(w.clone(), f);
    }
    let mut cooc = BTreeMap::new();
    for a in &vocab {
        for b in &vocab {
            if a < b {
                let c = docs
                    .iter()
                    .filter(|d| d.contains(a) && d.contains(b))
                    .count() as u32;
                if c > 0 {
                    cooc.insert((a.clone(), b.clone()), c);
                }
            }
        }
    }
    (freq, cooc)
}

#[test]
fn hundred_articles_match_double_loop() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let docs = random_corpus(&mut rng, 100, 50);
    let mut window = Window::new(100);
    for (i, d) in docs.iter().enumerate() {
        window.ingest(article(i, d.clone())).unwrap();
    }
    let (freq, cooc) = brute_force(&docs);
    assert_eq!(frequencies(&window), freq);

    let vocab: Vec<String> = freq.keys().cloned().collect();
    let table = cooccurrence(&window, &vocab);
    let got: BTreeMap<(String, String), u32> = table
        .iter()
        .map(|(a, b, c)| {
            let (a, b) = if a < b { (a, b) } else { (b, a) };
            ((a.to_owned(), b.to_owned()), c)
        })
        .collect();
    assert_eq!(got, cooc);
}

#[test]
fn eviction_matches_oracle_on_tail() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let docs = random_corpus(&mut rng, 80, 20);
    let mut window = Window::new(30);
    for (i, d) in docs.iter().enumerate() {
        window.ingest(article(i, d.clone())).unwrap();
    }
    let (freq, _) = brute_force(&docs[50..]);
    assert_eq!(frequencies(&window), freq);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn cooccurrence_never_exceeds_frequencies(seed in any::<u64>(), n in 0usize..40, vocab in 1usize..15) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let docs = random_corpus(&mut rng, n, vocab);
        let mut window = Window::new(40);
        for (i, d) in docs.into_iter().enumerate() {
            window.ingest(article(i, d)).unwrap();
        }
        let snap = snapshot(&window, 1, 100);
        for (a, b, c) in snap.cooc.iter() {
            prop_assert!(c <= snap.freq[a].min(snap.freq[b]));
        }
        for w in &snap.words {
            prop_assert!(snap.freq[w] as usize <= window.len());
        }
    }

    #[test]
    fn selection_respects_threshold_and_limit(seed in any::<u64>(), f_min in 1u32..5, n_max in 1usize..10) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let docs = random_corpus(&mut rng, 30, 25);
        let mut window = Window::new(30);
        for (i, d) in docs.into_iter().enumerate() {
            window.ingest(article(i, d)).unwrap();
        }
        let all = frequencies(&window);
        let snap = snapshot(&window, f_min, n_max);
        prop_assert!(snap.words.len() <= n_max);
        for w in &snap.words {
            prop_assert!(all[w] >= f_min);
        }
        // no unselected word outranks a selected one
        if let Some(last) = snap.words.last() {
            let floor = (all[last], last.clone());
            for (w, &f) in &all {
                if f >= f_min && !snap.words.contains(w) {
                    prop_assert!(f < floor.0 || (f == floor.0 && *w > floor.1));
                }
            }
        }
    }
}

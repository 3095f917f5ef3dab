//! Radii and ideal distances that approximate area-proportional overlaps.
//!
//! A word's circle is sized by its frequency `f`. For a pair of words the
//! fraction of each circle covered by the other should match `c / f`, the
//! share of that word's articles that also contain its partner. Instead of
//! solving for exact lens areas we use the linear relation
//! `c / f_i = overlap / r_i`, average the overlap implied by each side and
//! place the centers `r_i + r_j - overlap` apart. Pairs whose averaged
//! overlap vanishes are spread out towards `d_max` as their co-occurrence
//! drops to zero.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::analyzer::AnalysisSnapshot;
use crate::error::{Error, Result};
use crate::layout::DistanceMatrix;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WordStat {
    pub word: String,
    pub frequency: u32,
}

impl WordStat {
    pub fn new(word: impl Into<String>, frequency: u32) -> Self {
        Self {
            word: word.into(),
            frequency,
        }
    }
}

/// Symmetric word-pair counts. Absent pairs count zero; self pairs are never
/// stored.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CooccurrenceTable {
    counts: BTreeMap<(String, String), u32>,
}

fn pair_key(a: &str, b: &str) -> (String, String) {
    if a <= b {
        (a.to_owned(), b.to_owned())
    } else {
        (b.to_owned(), a.to_owned())
    }
}

impl CooccurrenceTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Sets the count for an unordered pair. Self pairs and zero counts are
    /// dropped.
    pub fn insert(&mut self, a: &str, b: &str, count: u32) {
        if a == b {
            return;
        }
        let key = pair_key(a, b);
        if count == 0 {
            self.counts.remove(&key);
        } else {
            self.counts.insert(key, count);
        }
    }

    pub fn get(&self, a: &str, b: &str) -> u32 {
        if a == b {
            return 0;
        }
        self.counts.get(&pair_key(a, b)).copied().unwrap_or(0)
    }

    pub fn contains(&self, a: &str, b: &str) -> bool {
        self.get(a, b) > 0
    }

    /// Nonzero pairs in lexicographic order, each with `a < b`.
    pub fn iter(&self) -> impl Iterator<Item = (&str, &str, u32)> {
        self.counts
            .iter()
            .map(|((a, b), &c)| (a.as_str(), b.as_str(), c))
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EulerParams {
    pub r_min: f64,
    pub r_max: f64,
    /// Distance for completely unrelated words.
    pub d_max: f64,
    /// Averaged overlap at or below which a pair counts as weakly related.
    pub epsilon_overlap: f64,
}

impl Default for EulerParams {
    fn default() -> Self {
        Self {
            r_min: 8.0,
            r_max: 40.0,
            // half the diagonal of the default 1000 x 800 viewport
            d_max: 0.5 * 1000f64.hypot(800.0),
            epsilon_overlap: 0.0,
        }
    }
}

impl EulerParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.r_min > 0.0 && self.r_min <= self.r_max && self.r_max.is_finite()) {
            return Err(Error::Config(format!(
                "radii must satisfy 0 < r_min <= r_max, got r_min {} r_max {}",
                self.r_min, self.r_max
            )));
        }
        if !(self.d_max > 2.0 * self.r_max && self.d_max.is_finite()) {
            return Err(Error::Config(format!(
                "d_max {} must exceed twice r_max ({})",
                self.d_max,
                2.0 * self.r_max
            )));
        }
        if !(self.epsilon_overlap >= 0.0 && self.epsilon_overlap.is_finite()) {
            return Err(Error::Config(format!(
                "epsilon_overlap must be >= 0, got {}",
                self.epsilon_overlap
            )));
        }
        Ok(())
    }
}

/// Circle radius for a word seen in `f` of the articles, where the most
/// frequent word has `f_max`. Area grows roughly with frequency.
pub fn radius_of(f: u32, f_max: u32, params: &EulerParams) -> Result<f64> {
    if f_max == 0 {
        return Err(Error::InvalidInput("f_max must be at least 1".into()));
    }
    if f > f_max {
        return Err(Error::InvalidInput(format!(
            "frequency {f} exceeds f_max {f_max}"
        )));
    }
    let share = f64::from(f) / f64::from(f_max);
    Ok(params.r_min + (params.r_max - params.r_min) * share.sqrt())
}

/// Overlap extent implied by one side of the pair: `r * c / f`.
pub fn overlap_from(c: u32, f: u32, r: f64) -> Result<f64> {
    if f == 0 {
        return Err(Error::InvalidInput("frequency must be at least 1".into()));
    }
    if c > f {
        return Err(Error::InvalidInput(format!(
            "co-occurrence {c} exceeds frequency {f}"
        )));
    }
    Ok(r * f64::from(c) / f64::from(f))
}

/// Ideal center distance for a pair, with `c` treated as a real number.
///
/// The strong branch is `r_i + r_j - c * s` where `s` is the averaged
/// overlap per co-occurrence. Below the crossover `c* = max(eps / s, 1)` the
/// distance falls linearly from `d_max` at `c = 0` to the strong-branch value
/// at `c*`, which equals the tangent distance `r_i + r_j - eps` whenever
/// `eps / s >= 1`.
pub fn ideal_distance_at(
    f_i: u32,
    f_j: u32,
    c: f64,
    r_i: f64,
    r_j: f64,
    params: &EulerParams,
) -> f64 {
    let per_count = 0.5 * (r_i / f64::from(f_i) + r_j / f64::from(f_j));
    let strong = |c: f64| r_i + r_j - c * per_count;
    let crossover = (params.epsilon_overlap / per_count).max(1.0);
    if c >= crossover {
        strong(c)
    } else {
        let anchor = strong(crossover);
        params.d_max - (params.d_max - anchor) * (c / crossover)
    }
}

pub fn ideal_distance(
    stat_i: &WordStat,
    stat_j: &WordStat,
    c: u32,
    r_i: f64,
    r_j: f64,
    params: &EulerParams,
) -> Result<f64> {
    if stat_i.frequency == 0 || stat_j.frequency == 0 {
        return Err(Error::InvalidInput(
            "word frequencies must be at least 1".into(),
        ));
    }
    if c > stat_i.frequency.min(stat_j.frequency) {
        return Err(Error::InvalidInput(format!(
            "co-occurrence {c} of `{}` and `{}` exceeds a frequency",
            stat_i.word, stat_j.word
        )));
    }
    if !(r_i > 0.0 && r_j > 0.0) {
        return Err(Error::InvalidInput("radii must be positive".into()));
    }
    Ok(ideal_distance_at(
        stat_i.frequency,
        stat_j.frequency,
        f64::from(c),
        r_i,
        r_j,
        params,
    ))
}

/// Radii (in snapshot word order) and the ideal distance matrix.
pub fn build_ideal_matrix(
    snapshot: &AnalysisSnapshot,
    params: &EulerParams,
) -> Result<(Vec<f64>, DistanceMatrix)> {
    params.validate()?;
    let stats = snapshot
        .words
        .iter()
        .map(|w| {
            let f = snapshot.freq.get(w).copied().ok_or_else(|| {
                Error::InvalidInput(format!("selected word `{w}` has no frequency"))
            })?;
            Ok(WordStat::new(w.clone(), f))
        })
        .collect::<Result<Vec<_>>>()?;
    let f_max = stats.iter().map(|s| s.frequency).max().unwrap_or(0);
    let radii = stats
        .iter()
        .map(|s| radius_of(s.frequency, f_max, params))
        .collect::<Result<Vec<_>>>()?;
    let mut matrix = DistanceMatrix::zeros(stats.len());
    for i in 0..stats.len() {
        for j in (i + 1)..stats.len() {
            let c = snapshot.cooc.get(&stats[i].word, &stats[j].word);
            let d = ideal_distance(&stats[i], &stats[j], c, radii[i], radii[j], params)?;
            matrix.set(i, j, d)?;
        }
    }
    Ok((radii, matrix))
}

/// Intersection area of two circles whose centers are `d` apart.
pub fn lens_area(r1: f64, r2: f64, d: f64) -> f64 {
    if d >= r1 + r2 {
        return 0.0;
    }
    if d <= (r1 - r2).abs() {
        let r = r1.min(r2);
        return PI * r * r;
    }
    let (r1s, r2s, ds) = (r1 * r1, r2 * r2, d * d);
    let a1 = ((ds + r1s - r2s) / (2.0 * d * r1)).clamp(-1.0, 1.0).acos();
    let a2 = ((ds + r2s - r1s) / (2.0 * d * r2)).clamp(-1.0, 1.0).acos();
    let kite = 0.5
        * ((-d + r1 + r2) * (d + r1 - r2) * (d - r1 + r2) * (d + r1 + r2))
            .max(0.0)
            .sqrt();
    r1s * a1 + r2s * a2 - kite
}

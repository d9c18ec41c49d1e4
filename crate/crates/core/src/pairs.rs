//! Windowed word pairs and G² collocation scoring.
//!
//! A pair event is two distinct in-vocabulary tokens at most `window`
//! positions apart. Pairs are unordered; [`PairKey`] stores the two words
//! alphabetically. Marginals and the event total used for the 2×2
//! contingency tables are taken over the same event space, so every table
//! is self-consistent.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{IndexPhrase, TokenSeq};
use crate::{Error, Result, Scalar};

/// Alphabetically ordered pair of distinct words.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PairKey(String, String);

impl PairKey {
    /// `None` for a self-pair.
    pub fn new(a: &str, b: &str) -> Option<Self> {
        match a.cmp(b) {
            Ordering::Less => Some(PairKey(a.to_string(), b.to_string())),
            Ordering::Greater => Some(PairKey(b.to_string(), a.to_string())),
            Ordering::Equal => None,
        }
    }

    pub fn first(&self) -> &str {
        &self.0
    }

    pub fn second(&self) -> &str {
        &self.1
    }

    pub fn contains(&self, word: &str) -> bool {
        self.0 == word || self.1 == word
    }
}

impl fmt::Display for PairKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.0, self.1)
    }
}

pub type PairCounts = BTreeMap<PairKey, u64>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairConfig {
    window: usize,
    vocabulary: HashSet<String>,
}

impl PairConfig {
    pub fn new(window: usize, vocabulary: HashSet<String>) -> Result<Self> {
        if window == 0 {
            return Err(Error::Config("pair window must be at least 1".into()));
        }
        Ok(Self { window, vocabulary })
    }

    /// Vocabulary made of every word of every index phrase.
    pub fn from_phrases(window: usize, phrases: &[IndexPhrase]) -> Result<Self> {
        let vocabulary = phrases.iter().flat_map(|p| p.tokens.iter().cloned()).collect();
        Self::new(window, vocabulary)
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn vocabulary(&self) -> &HashSet<String> {
        &self.vocabulary
    }
}

/// Counts pair events in one stemmed token stream: every position pair
/// `(p, q)` with `0 < q - p <= window` whose tokens are distinct vocabulary
/// words adds one to their pair.
pub fn extract_pairs(transcript: &TokenSeq, cfg: &PairConfig) -> PairCounts {
    // Intern vocabulary hits so the inner loop works on integers.
    let mut ids: HashMap<&str, u32> = HashMap::new();
    let mut words: Vec<&str> = Vec::new();
    let seq: Vec<Option<u32>> = transcript
        .iter()
        .map(|tok| {
            cfg.vocabulary.contains(tok).then(|| {
                *ids.entry(tok).or_insert_with(|| {
                    words.push(tok);
                    words.len() as u32 - 1
                })
            })
        })
        .collect();

    let mut counts: HashMap<(u32, u32), u64> = HashMap::new();
    for (p, a) in seq.iter().enumerate() {
        let Some(a) = *a else { continue };
        let end = (p + cfg.window).min(seq.len() - 1);
        for b in seq[p + 1..=end].iter().flatten() {
            if *b != a {
                *counts.entry((a.min(*b), a.max(*b))).or_insert(0) += 1;
            }
        }
    }
    counts
        .into_iter()
        .filter_map(|((a, b), n)| Some((PairKey::new(words[a as usize], words[b as usize])?, n)))
        .collect()
}

/// Course-wide pair statistics.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairTable {
    per_transcript: Vec<PairCounts>,
    totals: PairCounts,
    marginals: BTreeMap<String, u64>,
    n_events: u64,
}

impl PairTable {
    pub fn build(transcripts: &[TokenSeq], cfg: &PairConfig) -> Self {
        let per_transcript = transcripts.par_iter().map(|t| extract_pairs(t, cfg)).collect();
        Self::from_counts(per_transcript)
    }

    /// Aggregates per-transcript counts. Addition is associative, so the
    /// inputs may come from any number of workers.
    pub fn from_counts(per_transcript: Vec<PairCounts>) -> Self {
        let mut totals = PairCounts::new();
        for counts in &per_transcript {
            for (key, n) in counts {
                *totals.entry(key.clone()).or_insert(0) += n;
            }
        }
        let mut marginals = BTreeMap::new();
        let mut n_events = 0;
        for (key, &n) in &totals {
            *marginals.entry(key.first().to_string()).or_insert(0) += n;
            *marginals.entry(key.second().to_string()).or_insert(0) += n;
            n_events += n;
        }
        PairTable {
            per_transcript,
            totals,
            marginals,
            n_events,
        }
    }

    pub fn per_transcript(&self) -> &[PairCounts] {
        &self.per_transcript
    }

    pub fn totals(&self) -> &PairCounts {
        &self.totals
    }

    pub fn n_events(&self) -> u64 {
        self.n_events
    }

    pub fn marginal(&self, word: &str) -> u64 {
        self.marginals.get(word).copied().unwrap_or(0)
    }

    pub fn count(&self, key: &PairKey) -> u64 {
        self.totals.get(key).copied().unwrap_or(0)
    }

    /// Transcripts in which the pair occurs at least once.
    pub fn doc_freq(&self, key: &PairKey) -> usize {
        self.per_transcript.iter().filter(|c| c.contains_key(key)).count()
    }

    /// `[k11, k12, k21, k22]`: events with both words, with the first word
    /// only, with the second only, and with neither.
    pub fn contingency(&self, key: &PairKey) -> [u64; 4] {
        let k11 = self.count(key);
        let k12 = self.marginal(key.first()) - k11;
        let k21 = self.marginal(key.second()) - k11;
        [k11, k12, k21, self.n_events - k11 - k12 - k21]
    }

    pub fn g2<T: Scalar>(&self, key: &PairKey) -> Result<T> {
        let [a, b, c, d] = self.contingency(key);
        g2(a, b, c, d)
    }
}

/// Log-likelihood ratio of a 2×2 contingency table:
/// `2 Σ k ln(k / E)` with `E = row·col / N`. Empty cells contribute 0 and
/// the result is clamped at 0.
pub fn g2<T: Scalar>(k11: u64, k12: u64, k21: u64, k22: u64) -> Result<T> {
    let n = k11 + k12 + k21 + k22;
    if n == 0 {
        return Err(Error::EmptyContingency);
    }
    let rows = [k11 + k12, k21 + k22];
    let cols = [k11 + k21, k12 + k22];
    let cells = [(k11, 0, 0), (k12, 0, 1), (k21, 1, 0), (k22, 1, 1)];
    let total = T::from_count(n);
    let mut sum = T::zero();
    for (k, r, c) in cells {
        if k == 0 {
            continue;
        }
        let expected = T::from_count(rows[r]) * T::from_count(cols[c]) / total;
        let observed = T::from_count(k);
        sum = sum + observed * (observed / expected).ln();
    }
    Ok((T::lit(2.0) * sum).max(T::zero()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollocationScore<T> {
    pub key: PairKey,
    pub count: u64,
    pub g2: T,
    /// Not already covered by a multi-word index phrase containing both
    /// words, so worth adding to the visual index.
    pub suggest_for_index: bool,
}

/// Cut-off for [`rank_collocations`]; both limits may apply together.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RankLimit {
    pub top_k: Option<usize>,
    pub min_g2: Option<f64>,
}

/// Pairs by decreasing G², ties broken by pair key.
pub fn rank_collocations<T: Scalar>(
    table: &PairTable,
    phrases: &[IndexPhrase],
    limit: RankLimit,
) -> Vec<CollocationScore<T>> {
    let multi_word: Vec<&IndexPhrase> = phrases.iter().filter(|p| p.len() > 1).collect();
    let covered = |key: &PairKey| {
        multi_word.iter().any(|p| {
            p.tokens.iter().any(|t| t == key.first()) && p.tokens.iter().any(|t| t == key.second())
        })
    };
    let mut scored: Vec<CollocationScore<T>> = table
        .totals
        .iter()
        .map(|(key, &count)| CollocationScore {
            key: key.clone(),
            count,
            // non-empty: the pair itself contributes an event
            g2: table.g2(key).unwrap_or_else(|_| T::zero()),
            suggest_for_index: !covered(key),
        })
        .filter(|s| limit.min_g2.is_none_or(|m| s.g2 >= T::lit(m)))
        .collect();
    scored.sort_by(|a, b| {
        b.g2.partial_cmp(&a.g2)
            .unwrap_or(Ordering::Equal)
            .then_with(|| a.key.cmp(&b.key))
    });
    if let Some(k) = limit.top_k {
        scored.truncate(k);
    }
    scored
}

/// Row of the pairs JSON export.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairExport {
    pub w1: String,
    pub w2: String,
    pub count: u64,
    pub g2: f64,
}

impl<T: Scalar> From<&CollocationScore<T>> for PairExport {
    fn from(s: &CollocationScore<T>) -> Self {
        PairExport {
            w1: s.key.first().to_string(),
            w2: s.key.second().to_string(),
            count: s.count,
            g2: s.g2.to_f64().unwrap_or(f64::NAN),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn seq(words: &[&str]) -> TokenSeq {
        TokenSeq {
            tokens: words.iter().map(|w| w.to_string()).collect(),
            source_positions: (0..words.len()).collect(),
        }
    }

    fn vocab(words: &[&str]) -> HashSet<String> {
        words.iter().map(|w| w.to_string()).collect()
    }

    fn key(a: &str, b: &str) -> PairKey {
        PairKey::new(a, b).unwrap()
    }

    #[test]
    fn window_counting() {
        let cfg = PairConfig::new(10, vocab(&["clock", "cpi"])).unwrap();
        let counts = extract_pairs(&seq(&["clock", "x", "x", "x", "cpi"]), &cfg);
        assert_eq!(counts.get(&key("clock", "cpi")), Some(&1));

        let mut far = vec!["x"; 12];
        far[0] = "clock";
        far[11] = "cpi";
        assert!(extract_pairs(&seq(&far), &cfg).is_empty());
        far[11] = "x";
        far[10] = "cpi";
        assert_eq!(extract_pairs(&seq(&far), &cfg).len(), 1);
    }

    #[test]
    fn unordered_and_no_self_pairs() {
        let cfg = PairConfig::new(10, vocab(&["clock", "cpi"])).unwrap();
        let a = extract_pairs(&seq(&["cpi", "clock"]), &cfg);
        let b = extract_pairs(&seq(&["clock", "cpi"]), &cfg);
        assert_eq!(a, b);
        assert!(extract_pairs(&seq(&["clock", "clock"]), &cfg).is_empty());
        assert!(PairKey::new("a", "a").is_none());
    }

    #[test]
    fn overlapping_windows_count_each_event() {
        let cfg = PairConfig::new(10, vocab(&["a", "b"])).unwrap();
        let counts = extract_pairs(&seq(&["a", "b", "b"]), &cfg);
        assert_eq!(counts[&key("a", "b")], 2);
    }

    #[test]
    fn zero_window_rejected() {
        assert!(PairConfig::new(0, vocab(&["a"])).is_err());
    }

    #[test]
    fn g2_values() {
        assert_eq!(g2::<f64>(25, 25, 25, 25).unwrap(), 0.0);
        assert!(g2::<f64>(1, 9, 9, 81).unwrap().abs() < 1e-12);
        let v: f64 = g2(10, 0, 0, 10).unwrap();
        assert!((v - 40.0 * 2f64.ln()).abs() < 1e-9);
        assert!(matches!(g2::<f64>(0, 0, 0, 0), Err(Error::EmptyContingency)));
        let single: f32 = g2(10, 0, 0, 10).unwrap();
        assert!((single - 27.725_887).abs() < 1e-4);
    }

    #[test]
    fn contingency_is_consistent() {
        let cfg = PairConfig::new(2, vocab(&["a", "b", "c"])).unwrap();
        let t = PairTable::build(&[seq(&["a", "b", "c", "a", "x", "b"])], &cfg);
        for k in t.totals().keys() {
            let [k11, k12, k21, k22] = t.contingency(k);
            assert_eq!(k11 + k12 + k21 + k22, t.n_events());
            assert!(t.marginal(k.first()) >= k11);
        }
    }

    #[test]
    fn ranking_order_and_flags() {
        let counts = PairCounts::from([(key("a", "b"), 9), (key("c", "d"), 1), (key("a", "c"), 1)]);
        let table = PairTable::from_counts(vec![counts]);
        let phrase = IndexPhrase {
            tokens: vec!["a".into(), "b".into()],
            source_line: "a b".into(),
            synthetic: false,
        };
        let ranked = rank_collocations::<f64>(&table, &[phrase], RankLimit::default());
        assert_eq!(ranked.len(), 3);
        assert!(ranked.windows(2).all(|w| w[0].g2 >= w[1].g2));
        let ab = ranked.iter().find(|s| s.key == key("a", "b")).unwrap();
        assert!(!ab.suggest_for_index);
        assert!(ranked.iter().filter(|s| s.key != key("a", "b")).all(|s| s.suggest_for_index));

        let top = rank_collocations::<f64>(&table, &[], RankLimit { top_k: Some(1), min_g2: None });
        assert_eq!(top.len(), 1);
    }

    #[test]
    fn single_pair_table() {
        let table = PairTable::from_counts(vec![PairCounts::from([(key("x", "y"), 3)])]);
        let ranked = rank_collocations::<f64>(&table, &[], RankLimit::default());
        assert_eq!(ranked.len(), 1);
        assert_eq!(ranked[0].g2, 0.0);
    }

    /// `2 (Σ k ln k − Σ r ln r − Σ c ln c + N ln N)`, an algebraically
    /// independent route to the same statistic.
    fn entropy_form(k: [u64; 4]) -> f64 {
        let xlx = |x: u64| if x == 0 { 0.0 } else { x as f64 * (x as f64).ln() };
        let n = k.iter().sum::<u64>();
        let cells: f64 = k.iter().map(|&x| xlx(x)).sum();
        let rows = xlx(k[0] + k[1]) + xlx(k[2] + k[3]);
        let cols = xlx(k[0] + k[2]) + xlx(k[1] + k[3]);
        (2.0 * (cells - rows - cols + xlx(n))).max(0.0)
    }

    proptest! {
        #[test]
        fn g2_matches_entropy_form(k in prop::array::uniform4(0u64..500)) {
            prop_assume!(k.iter().sum::<u64>() > 0);
            let ours: f64 = g2(k[0], k[1], k[2], k[3]).unwrap();
            let theirs = entropy_form(k);
            prop_assert!((ours - theirs).abs() <= 1e-9 * theirs.max(1.0), "{ours} vs {theirs}");
            prop_assert!(ours >= 0.0);
        }

        #[test]
        fn g2_transpose_symmetric(k in prop::array::uniform4(0u64..200)) {
            prop_assume!(k.iter().sum::<u64>() > 0);
            let a: f64 = g2(k[0], k[1], k[2], k[3]).unwrap();
            let b: f64 = g2(k[0], k[2], k[1], k[3]).unwrap();
            prop_assert!((a - b).abs() <= 1e-9 * a.max(1.0));
        }

        #[test]
        fn event_bound(words in prop::collection::vec(0u8..5, 0..80), window in 1usize..12) {
            let toks: Vec<String> = words.iter().map(|w| format!("w{w}")).collect();
            let t = TokenSeq { source_positions: (0..toks.len()).collect(), tokens: toks.clone() };
            let cfg = PairConfig::new(window, ["w0", "w1", "w2", "w3"].iter().map(|s| s.to_string()).collect()).unwrap();
            let counts = extract_pairs(&t, &cfg);
            let total: u64 = counts.values().sum();
            prop_assert!(total <= (window * toks.len()) as u64);
            // brute force over position pairs
            let mut brute = PairCounts::new();
            for p in 0..toks.len() {
                for q in p + 1..toks.len().min(p + window + 1) {
                    if cfg.vocabulary().contains(&toks[p]) && cfg.vocabulary().contains(&toks[q]) {
                        if let Some(k) = PairKey::new(&toks[p], &toks[q]) {
                            *brute.entry(k).or_insert(0) += 1;
                        }
                    }
                }
            }
            prop_assert_eq!(counts, brute);
        }
    }
}

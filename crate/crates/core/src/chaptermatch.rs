//! Matching lecture transcripts to textbook chapters.
//!
//! For transcript `i` and chapter `j` the score sums, over every feature
//! present in both, the log of the feature's count in the chapter:
//!
//! ```text
//! score(i, j) = Σ_k ln tf(k, j)      for tf(k, i) > 0 and tf(k, j) > 0
//! ```
//!
//! Features are index phrases, windowed word pairs, high-G² pairs, or the
//! union of phrases and pairs. Features with a transcript document
//! frequency above the zoom value are dropped before scoring.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::{IndexPhrase, TokenSeq};
use crate::indexer::{match_phrases, MatchMode};
use crate::pairs::{extract_pairs, PairConfig, PairKey, PairTable};
use crate::{Error, Result, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureMode {
    Phrases,
    Pairs,
    G2pairs,
    PhrasesAndPairs,
}

impl FeatureMode {
    pub const ALL: [FeatureMode; 4] = [
        FeatureMode::Phrases,
        FeatureMode::Pairs,
        FeatureMode::G2pairs,
        FeatureMode::PhrasesAndPairs,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FeatureMode::Phrases => "phrases",
            FeatureMode::Pairs => "pairs",
            FeatureMode::G2pairs => "g2pairs",
            FeatureMode::PhrasesAndPairs => "phrases_and_pairs",
        }
    }

    fn uses_phrases(self) -> bool {
        matches!(self, FeatureMode::Phrases | FeatureMode::PhrasesAndPairs)
    }
}

impl fmt::Display for FeatureMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FeatureMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "phrases" => Ok(FeatureMode::Phrases),
            "pairs" => Ok(FeatureMode::Pairs),
            "g2pairs" | "g2" => Ok(FeatureMode::G2pairs),
            "phrases_and_pairs" | "combined" => Ok(FeatureMode::PhrasesAndPairs),
            other => Err(Error::Param(format!(
                "unknown feature mode {other:?} (expected phrases, pairs, g2pairs or phrases_and_pairs)"
            ))),
        }
    }
}

/// What a feature contributes to the score.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CountRule {
    /// ln of the chapter count, gated on presence in the transcript.
    #[default]
    ChapterLog,
    /// ln of the smaller of the transcript and chapter counts.
    Min,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ScoreOptions {
    pub count_rule: CountRule,
    /// Use ln(1 + count) so single chapter mentions still count.
    pub smoothing: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FeatureKey {
    Phrase(usize),
    Pair(PairKey),
}

pub type FeatureCounts = BTreeMap<FeatureKey, u64>;

/// Everything needed to turn a stemmed document into feature counts.
#[derive(Debug, Clone)]
pub struct FeatureSpace {
    phrases: Vec<IndexPhrase>,
    match_mode: MatchMode,
    pair_cfg: PairConfig,
    collocations: HashSet<PairKey>,
}

impl FeatureSpace {
    /// `collocations` is the pair subset used in [`FeatureMode::G2pairs`].
    pub fn new(
        phrases: Vec<IndexPhrase>,
        match_mode: MatchMode,
        pair_cfg: PairConfig,
        collocations: HashSet<PairKey>,
    ) -> Self {
        Self {
            phrases,
            match_mode,
            pair_cfg,
            collocations,
        }
    }

    /// Collocations are the pairs whose course-level G² reaches `g2_min`.
    pub fn with_g2_threshold(
        phrases: Vec<IndexPhrase>,
        match_mode: MatchMode,
        pair_cfg: PairConfig,
        transcript_pairs: &PairTable,
        g2_min: f64,
    ) -> Self {
        let collocations = transcript_pairs
            .totals()
            .keys()
            .filter(|k| transcript_pairs.g2::<f64>(k).is_ok_and(|g| g >= g2_min))
            .cloned()
            .collect();
        Self::new(phrases, match_mode, pair_cfg, collocations)
    }

    pub fn collocations(&self) -> &HashSet<PairKey> {
        &self.collocations
    }

    /// Feature counts of one document under `mode`. Phrase and pair keys
    /// never collide, so the combined mode is a plain union.
    pub fn features(&self, doc: &TokenSeq, mode: FeatureMode) -> FeatureCounts {
        let mut out = FeatureCounts::new();
        if mode.uses_phrases() {
            for (id, occ) in match_phrases(doc, &self.phrases, self.match_mode).iter().enumerate() {
                if occ.count() > 0 {
                    out.insert(FeatureKey::Phrase(id), occ.count() as u64);
                }
            }
        }
        if mode != FeatureMode::Phrases {
            let g2_only = mode == FeatureMode::G2pairs;
            for (key, n) in extract_pairs(doc, &self.pair_cfg) {
                if !g2_only || self.collocations.contains(&key) {
                    out.insert(FeatureKey::Pair(key), n);
                }
            }
        }
        out
    }
}

/// Chapter-side counts; the same pipeline as transcripts.
pub fn chapter_features(chapter: &TokenSeq, mode: FeatureMode, space: &FeatureSpace) -> FeatureCounts {
    space.features(chapter, mode)
}

/// Drops transcript features that occur in more than `zoom` transcripts.
pub fn filter_by_zoom(transcripts: &[FeatureCounts], zoom: usize) -> Vec<FeatureCounts> {
    let mut doc_freq: HashMap<&FeatureKey, usize> = HashMap::new();
    for counts in transcripts {
        for key in counts.keys() {
            *doc_freq.entry(key).or_insert(0) += 1;
        }
    }
    transcripts
        .iter()
        .map(|counts| {
            counts
                .iter()
                .filter(|(k, _)| doc_freq[k] <= zoom)
                .map(|(k, &n)| (k.clone(), n))
                .collect()
        })
        .collect()
}

/// Raw score table, `scores[transcript][chapter]`.
pub fn score_table<T: Scalar>(
    transcripts: &[FeatureCounts],
    chapters: &[FeatureCounts],
    opts: ScoreOptions,
) -> Vec<Vec<T>> {
    let contribution = |tf_i: u64, tf_j: u64| {
        let c = match opts.count_rule {
            CountRule::ChapterLog => tf_j,
            CountRule::Min => tf_i.min(tf_j),
        };
        let c = T::from_count(c);
        if opts.smoothing {
            c.ln_1p()
        } else {
            c.ln()
        }
    };
    transcripts
        .iter()
        .map(|t| {
            chapters
                .iter()
                .map(|ch| {
                    t.iter()
                        .filter(|(_, &tf_i)| tf_i > 0)
                        .filter_map(|(k, &tf_i)| {
                            ch.get(k).filter(|&&tf_j| tf_j > 0).map(|&tf_j| contribution(tf_i, tf_j))
                        })
                        .fold(T::zero(), |acc, x| acc + x)
                })
                .collect()
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreMatrix<T> {
    pub mode: FeatureMode,
    pub zoom: usize,
    pub lecture_ids: Vec<u32>,
    pub chapter_ids: Vec<u32>,
    /// `scores[transcript][chapter]`
    pub scores: Vec<Vec<T>>,
}

impl<T: Scalar> ScoreMatrix<T> {
    pub fn new(
        mode: FeatureMode,
        zoom: usize,
        lecture_ids: Vec<u32>,
        chapter_ids: Vec<u32>,
        transcripts: &[FeatureCounts],
        chapters: &[FeatureCounts],
        opts: ScoreOptions,
    ) -> Self {
        let filtered = filter_by_zoom(transcripts, zoom);
        ScoreMatrix {
            mode,
            zoom,
            lecture_ids,
            chapter_ids,
            scores: score_table(&filtered, chapters, opts),
        }
    }

    /// Best chapter id for every lecture, with the no-signal flag.
    pub fn assignments(&self) -> Vec<(u32, bool)> {
        self.scores
            .iter()
            .map(|row| {
                let (idx, no_signal) = best_chapter(row);
                (self.chapter_ids[idx], no_signal)
            })
            .collect()
    }
}

/// Index of the highest score, lowest index on ties. The flag is set when
/// the row carries no signal (all zeros).
pub fn best_chapter<T: Scalar>(row: &[T]) -> (usize, bool) {
    assert!(!row.is_empty(), "score row must not be empty");
    let mut best = 0;
    for (j, &s) in row.iter().enumerate().skip(1) {
        if s > row[best] {
            best = j;
        }
    }
    let no_signal = row.iter().all(|s| s.is_zero());
    (best, no_signal)
}

/// Valid chapters per lecture. An empty set means the lecture has no
/// corresponding chapter and is left out of accuracy.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroundTruth(pub BTreeMap<u32, BTreeSet<u32>>);

impl GroundTruth {
    /// Parses lines like `lecture03: 3`, `lecture04: 3,4` or `lecture05: -`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let bad = |why: &str| Error::GroundTruth(format!("line {}: {why}: {raw:?}", n + 1));
            let (lhs, rhs) = line.split_once(':').ok_or_else(|| bad("missing ':'"))?;
            let lecture: u32 = lhs
                .trim()
                .strip_prefix("lecture")
                .and_then(|d| d.parse().ok())
                .ok_or_else(|| bad("expected lectureNN"))?;
            let rhs = rhs.trim();
            let chapters = if rhs == "-" {
                BTreeSet::new()
            } else {
                rhs.split(',')
                    .map(|c| c.trim().parse::<u32>().map_err(|_| bad("bad chapter number")))
                    .collect::<Result<_>>()?
            };
            if map.insert(lecture, chapters).is_some() {
                return Err(bad("duplicate lecture"));
            }
        }
        Ok(GroundTruth(map))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    /// Every referenced chapter must exist.
    pub fn validate(&self, chapter_ids: &[u32]) -> Result<()> {
        for (lecture, set) in &self.0 {
            if let Some(bad) = set.iter().find(|c| !chapter_ids.contains(c)) {
                return Err(Error::GroundTruth(format!(
                    "lecture {lecture} refers to unknown chapter {bad}"
                )));
            }
        }
        Ok(())
    }

    pub fn valid(&self, lecture: u32) -> Option<&BTreeSet<u32>> {
        self.0.get(&lecture).filter(|s| !s.is_empty())
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (lecture, set) in &self.0 {
            let rhs = if set.is_empty() {
                "-".to_string()
            } else {
                set.iter().map(u32::to_string).collect::<Vec<_>>().join(",")
            };
            out.push_str(&format!("lecture{lecture:02}: {rhs}\n"));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assignment {
    pub lecture: u32,
    pub chapter: u32,
    pub no_signal: bool,
    /// `None` when the lecture has no ground truth.
    pub correct: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchReport<T> {
    pub assignments: Vec<Assignment>,
    pub evaluable: usize,
    pub correct: usize,
    pub accuracy: T,
    /// `(zoom, accuracy)`; filled by [`ChapterMatcher::report`].
    pub zoom_curve: Vec<(usize, T)>,
}

/// Scores the argmax assignment of every lecture against `truth`.
pub fn evaluate<T: Scalar>(matrix: &ScoreMatrix<T>, truth: &GroundTruth) -> Result<MatchReport<T>> {
    let assignments: Vec<Assignment> = matrix
        .assignments()
        .into_iter()
        .zip(&matrix.lecture_ids)
        .map(|((chapter, no_signal), &lecture)| Assignment {
            lecture,
            chapter,
            no_signal,
            correct: truth.valid(lecture).map(|set| set.contains(&chapter)),
        })
        .collect();
    let evaluable = assignments.iter().filter(|a| a.correct.is_some()).count();
    if evaluable == 0 {
        return Err(Error::NoEvaluableLectures);
    }
    let correct = assignments.iter().filter(|a| a.correct == Some(true)).count();
    Ok(MatchReport {
        assignments,
        evaluable,
        correct,
        accuracy: T::from_count(correct as u64) / T::from_count(evaluable as u64),
        zoom_curve: Vec::new(),
    })
}

/// Precomputed transcript and chapter features for every mode.
#[derive(Debug, Clone)]
pub struct ChapterMatcher {
    lecture_ids: Vec<u32>,
    chapter_ids: Vec<u32>,
    transcripts: BTreeMap<FeatureMode, Vec<FeatureCounts>>,
    chapters: BTreeMap<FeatureMode, Vec<FeatureCounts>>,
    opts: ScoreOptions,
}

impl ChapterMatcher {
    pub fn new(
        space: &FeatureSpace,
        transcripts: &[TokenSeq],
        lecture_ids: Vec<u32>,
        chapters: &[TokenSeq],
        chapter_ids: Vec<u32>,
        opts: ScoreOptions,
    ) -> Result<Self> {
        if chapters.is_empty() {
            return Err(Error::NoChapters);
        }
        use rayon::prelude::*;
        let per_mode = |docs: &[TokenSeq]| -> BTreeMap<FeatureMode, Vec<FeatureCounts>> {
            FeatureMode::ALL
                .iter()
                .map(|&m| (m, docs.par_iter().map(|d| space.features(d, m)).collect()))
                .collect()
        };
        Ok(Self {
            transcripts: per_mode(transcripts),
            chapters: per_mode(chapters),
            lecture_ids,
            chapter_ids,
            opts,
        })
    }

    pub fn chapter_ids(&self) -> &[u32] {
        &self.chapter_ids
    }

    pub fn n_transcripts(&self) -> usize {
        self.lecture_ids.len()
    }

    pub fn matrix<T: Scalar>(&self, mode: FeatureMode, zoom: usize) -> ScoreMatrix<T> {
        ScoreMatrix::new(
            mode,
            zoom,
            self.lecture_ids.clone(),
            self.chapter_ids.clone(),
            &self.transcripts[&mode],
            &self.chapters[&mode],
            self.opts,
        )
    }

    /// Accuracy for each zoom value.
    pub fn sweep<T: Scalar>(
        &self,
        mode: FeatureMode,
        zooms: impl IntoIterator<Item = usize>,
        truth: &GroundTruth,
    ) -> Result<Vec<(usize, T)>> {
        zooms
            .into_iter()
            .map(|z| Ok((z, evaluate(&self.matrix::<T>(mode, z), truth)?.accuracy)))
            .collect()
    }

    /// Report at `zoom` with the accuracy curve over `sweep`.
    pub fn report<T: Scalar>(
        &self,
        mode: FeatureMode,
        zoom: usize,
        sweep: impl IntoIterator<Item = usize>,
        truth: &GroundTruth,
    ) -> Result<MatchReport<T>> {
        let mut report = evaluate(&self.matrix::<T>(mode, zoom), truth)?;
        report.zoom_curve = self.sweep(mode, sweep, truth)?;
        Ok(report)
    }
}

/// JSON form of a score matrix with its assignments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchExport {
    pub mode: FeatureMode,
    pub zoom: usize,
    pub lecture_ids: Vec<u32>,
    pub chapter_ids: Vec<u32>,
    pub scores: Vec<Vec<f64>>,
    pub assignments: Vec<Assignment>,
    pub accuracy: Option<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub zoom_curve: Vec<(usize, f64)>,
}

impl MatchExport {
    pub fn new(matrix: &ScoreMatrix<f64>, truth: Option<&GroundTruth>, zoom_curve: Vec<(usize, f64)>) -> Self {
        let report = truth.and_then(|t| evaluate(matrix, t).ok());
        let assignments = match &report {
            Some(r) => r.assignments.clone(),
            None => matrix
                .assignments()
                .into_iter()
                .zip(&matrix.lecture_ids)
                .map(|((chapter, no_signal), &lecture)| Assignment {
                    lecture,
                    chapter,
                    no_signal,
                    correct: None,
                })
                .collect(),
        };
        MatchExport {
            mode: matrix.mode,
            zoom: matrix.zoom,
            lecture_ids: matrix.lecture_ids.clone(),
            chapter_ids: matrix.chapter_ids.clone(),
            scores: matrix.scores.clone(),
            assignments,
            accuracy: report.map(|r| r.accuracy),
            zoom_curve,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn phrase_counts(pairs: &[(usize, u64)]) -> FeatureCounts {
        pairs.iter().map(|&(k, n)| (FeatureKey::Phrase(k), n)).collect()
    }

    #[test]
    fn worked_example() {
        let transcript = phrase_counts(&[(1, 1), (2, 1)]);
        let a = phrase_counts(&[(1, 3)]);
        let b = phrase_counts(&[(1, 2), (2, 2)]);
        let s = score_table::<f64>(&[transcript], &[a, b], ScoreOptions::default());
        assert!((s[0][0] - 3f64.ln()).abs() < 1e-12);
        assert!((s[0][1] - 2.0 * 2f64.ln()).abs() < 1e-12);
        assert_eq!(best_chapter(&s[0]), (1, false));
    }

    #[test]
    fn singletons_and_no_overlap() {
        let t = phrase_counts(&[(1, 4), (2, 1)]);
        let ones = phrase_counts(&[(1, 1), (2, 1)]);
        let other = phrase_counts(&[(9, 5)]);
        let s = score_table::<f64>(&[t], &[ones, other], ScoreOptions::default());
        assert_eq!(s[0], [0.0, 0.0]);
        let smooth = ScoreOptions { smoothing: true, ..Default::default() };
        let t = phrase_counts(&[(1, 4)]);
        let s = score_table::<f64>(&[t], &[phrase_counts(&[(1, 1)])], smooth);
        assert!((s[0][0] - 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn min_rule() {
        let t = phrase_counts(&[(1, 2)]);
        let ch = phrase_counts(&[(1, 5)]);
        let opts = ScoreOptions { count_rule: CountRule::Min, smoothing: false };
        let s = score_table::<f64>(&[t], &[ch], opts);
        assert!((s[0][0] - 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn argmax_ties() {
        assert_eq!(best_chapter(&[0.0, 0.0, 0.0]), (0, true));
        assert_eq!(best_chapter(&[5.0, 5.0, 3.0]), (0, false));
        assert_eq!(best_chapter(&[1.0986, 1.3863]), (1, false));
    }

    #[test]
    fn zoom_filter_drops_common_features() {
        let t1 = phrase_counts(&[(1, 1), (2, 1)]);
        let t2 = phrase_counts(&[(1, 1)]);
        let filtered = filter_by_zoom(&[t1, t2], 1);
        assert_eq!(filtered[0], phrase_counts(&[(2, 1)]));
        assert!(filtered[1].is_empty());
    }

    #[test]
    fn ground_truth_parsing() {
        let gt = GroundTruth::parse("lecture01: 3\nlecture02: 3,4\nlecture03: -\n\n").unwrap();
        assert_eq!(gt.valid(2).unwrap().len(), 2);
        assert!(gt.valid(3).is_none());
        assert!(gt.validate(&[3, 4]).is_ok());
        assert!(gt.validate(&[3]).is_err());
        assert_eq!(GroundTruth::parse(&gt.to_text()).unwrap(), gt);
        assert!(GroundTruth::parse("lecture1 3").is_err());
        assert!(GroundTruth::parse("lecture01: x").is_err());
    }

    fn matrix(scores: Vec<Vec<f64>>) -> ScoreMatrix<f64> {
        let n = scores.len() as u32;
        let m = scores[0].len() as u32;
        ScoreMatrix {
            mode: FeatureMode::Phrases,
            zoom: 1,
            lecture_ids: (1..=n).collect(),
            chapter_ids: (1..=m).collect(),
            scores,
        }
    }

    #[test]
    fn accuracy() {
        let gt = GroundTruth::parse("lecture01: 1\nlecture02: 2").unwrap();
        let r = evaluate(&matrix(vec![vec![2.0, 1.0], vec![0.0, 3.0]]), &gt).unwrap();
        assert_eq!(r.accuracy, 1.0);

        let gt = GroundTruth::parse("lecture01: 1\nlecture02: 2\nlecture03: 1\nlecture04: 2\nlecture05: -").unwrap();
        let m = matrix(vec![
            vec![2.0, 1.0],
            vec![0.0, 3.0],
            vec![4.0, 1.0],
            vec![4.0, 1.0],
            vec![0.0, 1.0],
        ]);
        let r = evaluate(&m, &gt).unwrap();
        assert_eq!((r.correct, r.evaluable), (3, 4));
        assert_eq!(r.accuracy, 0.75);

        let none = GroundTruth::parse("lecture01: -").unwrap();
        assert!(matches!(evaluate(&m, &none), Err(Error::NoEvaluableLectures)));
    }

    #[test]
    fn pair_features_count_windowed_events() {
        let vocab: HashSet<String> = ["clock", "cpi"].iter().map(|s| s.to_string()).collect();
        let space = FeatureSpace::new(vec![], MatchMode::Independent, PairConfig::new(10, vocab).unwrap(), HashSet::new());
        let doc = crate::corpus::prepare_tokens("clock and cpi then later the clock with cpi", true);
        let f = chapter_features(&doc, FeatureMode::Pairs, &space);
        let key = FeatureKey::Pair(PairKey::new("clock", "cpi").unwrap());
        // brute force: positions of clock {0,6}, cpi {2,8}; pairs within 10
        let brute = [(0, 2), (0, 8), (6, 2), (6, 8)].iter().filter(|(a, b): &&(i32, i32)| (a - b).abs() <= 10).count();
        assert_eq!(f[&key], brute as u64);
        assert!(chapter_features(&doc, FeatureMode::G2pairs, &space).is_empty());
    }

    #[test]
    fn combined_is_disjoint_union() {
        let phrases = vec![IndexPhrase { tokens: vec!["clock".into()], source_line: "clock".into(), synthetic: false }];
        let vocab: HashSet<String> = ["clock", "cpi"].iter().map(|s| s.to_string()).collect();
        let space = FeatureSpace::new(phrases, MatchMode::Independent, PairConfig::new(10, vocab).unwrap(), HashSet::new());
        let doc = crate::corpus::prepare_tokens("clock cpi clock", true);
        let p = space.features(&doc, FeatureMode::Phrases);
        let q = space.features(&doc, FeatureMode::Pairs);
        let both = space.features(&doc, FeatureMode::PhrasesAndPairs);
        assert_eq!(both.len(), p.len() + q.len());
    }

    #[test]
    fn mode_names() {
        for m in FeatureMode::ALL {
            assert_eq!(m.as_str().parse::<FeatureMode>().unwrap(), m);
        }
        assert_eq!("combined".parse::<FeatureMode>().unwrap(), FeatureMode::PhrasesAndPairs);
        assert!("bogus".parse::<FeatureMode>().is_err());
    }

    /// Direct triple loop over the feature universe.
    fn brute_scores(t: &[Vec<u64>], c: &[Vec<u64>]) -> Vec<Vec<f64>> {
        t.iter()
            .map(|ti| {
                c.iter()
                    .map(|cj| {
                        let mut s = 0.0;
                        for k in 0..ti.len() {
                            if ti[k] > 0 && cj[k] > 0 {
                                s += (cj[k] as f64).ln();
                            }
                        }
                        s
                    })
                    .collect()
            })
            .collect()
    }

    fn to_counts(dense: &[u64]) -> FeatureCounts {
        dense.iter().enumerate().filter(|(_, &n)| n > 0).map(|(k, &n)| (FeatureKey::Phrase(k), n)).collect()
    }

    proptest! {
        #[test]
        fn matches_brute_force(
            t in prop::collection::vec(prop::collection::vec(0u64..5, 5), 1..4),
            c in prop::collection::vec(prop::collection::vec(0u64..5, 5), 1..4),
        ) {
            let ours = score_table::<f64>(
                &t.iter().map(|r| to_counts(r)).collect::<Vec<_>>(),
                &c.iter().map(|r| to_counts(r)).collect::<Vec<_>>(),
                ScoreOptions::default(),
            );
            let brute = brute_scores(&t, &c);
            for (a, b) in ours.iter().flatten().zip(brute.iter().flatten()) {
                prop_assert!((a - b).abs() <= 1e-12);
                prop_assert!(*a >= 0.0 && a.is_finite());
            }
        }

        #[test]
        fn doubling_adds_ln2_per_shared_feature(
            t in prop::collection::vec(0u64..4, 5),
            c in prop::collection::vec(0u64..4, 5),
        ) {
            let doubled: Vec<u64> = c.iter().map(|n| n * 2).collect();
            let base = score_table::<f64>(&[to_counts(&t)], &[to_counts(&c)], ScoreOptions::default())[0][0];
            let dbl = score_table::<f64>(&[to_counts(&t)], &[to_counts(&doubled)], ScoreOptions::default())[0][0];
            let shared = t.iter().zip(&c).filter(|(a, b)| **a > 0 && **b > 0).count() as f64;
            prop_assert!((dbl - base - shared * 2f64.ln()).abs() < 1e-9);
        }

        #[test]
        fn absent_feature_does_not_change_row(
            t in prop::collection::vec(0u64..4, 5),
            c in prop::collection::vec(prop::collection::vec(0u64..4, 6), 1..4),
        ) {
            let mut t = t;
            t.push(0);
            let chapters: Vec<_> = c.iter().map(|r| to_counts(r)).collect();
            let trimmed: Vec<_> = c.iter().map(|r| to_counts(&r[..5])).collect();
            let a = score_table::<f64>(&[to_counts(&t)], &chapters, ScoreOptions::default());
            let b = score_table::<f64>(&[to_counts(&t)], &trimmed, ScoreOptions::default());
            prop_assert_eq!(a, b);
        }

        #[test]
        fn argmax_permutation_equivariant(row in prop::collection::vec(0u32..6, 1..6), seed in 0usize..100) {
            let row: Vec<f64> = row.into_iter().map(f64::from).collect();
            let n = row.len();
            let perm: Vec<usize> = (0..n).map(|i| (i * 7 + seed) % n).collect();
            prop_assume!({ let mut p = perm.clone(); p.sort(); p.dedup(); p.len() == n });
            let permuted: Vec<f64> = perm.iter().map(|&i| row[i]).collect();
            let (best, _) = best_chapter(&row);
            let (pbest, _) = best_chapter(&permuted);
            // the chosen column carries the maximum; with a unique maximum
            // it is exactly the permuted image
            prop_assert_eq!(permuted[pbest], row[best]);
            if row.iter().filter(|&&x| x == row[best]).count() == 1 {
                prop_assert_eq!(perm[pbest], best);
            }
        }
    }
}

//! One immutable snapshot of a fully analyzed corpus.
//!
//! Built once from a [`RawCorpus`]; every query is a pure function of the
//! bundle and its arguments, so the CLI and the HTTP service share it.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::chaptermatch::{ChapterMatcher, FeatureMode, FeatureSpace, GroundTruth, MatchExport, ScoreOptions};
use crate::corpus::{self, normalize_index, prepare_tokens, IndexPhrase, NormalizeOptions, TokenSeq};
use crate::indexer::{course_stats, CourseStats, OccurrenceTable, PhraseKind};
use crate::indexmap::{index_map, IndexMapExport, ViewFilter};
use crate::pairs::{rank_collocations, CollocationScore, PairConfig, PairExport, PairTable, RankLimit};
use crate::similarity::{build_graph, distance_matrix, mds_embed, SimilarityGraph};
use crate::{Config, Error, Fraction, RawCorpus, Result};

pub const GROUND_TRUTH_FILE: &str = "groundtruth.txt";

/// Normalized phrases, stemmed transcripts and their occurrence table.
pub fn build_occurrences(corpus: &RawCorpus, config: &Config) -> (Vec<IndexPhrase>, Vec<TokenSeq>, OccurrenceTable) {
    let opts = NormalizeOptions {
        stem: config.stem,
        strip_interior_stopwords: config.strip_interior_stopwords,
    };
    let phrases = normalize_index(&corpus.index_lines, &corpus.stopwords, opts);
    let transcripts: Vec<TokenSeq> = corpus
        .transcripts
        .iter()
        .map(|t| prepare_tokens(&t.text, config.stem))
        .collect();
    let table = OccurrenceTable::build(phrases.clone(), &transcripts, corpus.lecture_ids(), config.match_mode);
    (phrases, transcripts, table)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bounds {
    pub min: usize,
    pub max: usize,
    pub default: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChapterInfo {
    pub id: u32,
    pub label: String,
}

/// Course summary and slider bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Meta {
    pub n_transcripts: usize,
    pub n_phrases: usize,
    pub lecture_ids: Vec<u32>,
    pub chapters: Vec<ChapterInfo>,
    pub zoom: Bounds,
    pub focus: Bounds,
    pub contrast: Bounds,
    pub modes: Vec<FeatureMode>,
    pub default_mode: FeatureMode,
    pub has_ground_truth: bool,
    pub theme_fraction: String,
    pub t_strong: f64,
    pub t_weak: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhraseInfo {
    pub id: usize,
    pub text: String,
    pub tokens: Vec<String>,
    pub source_line: String,
    pub synthetic: bool,
    pub doc_freq: usize,
    pub total_count: usize,
    pub kind: PhraseKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarityExport {
    pub phrases: Vec<usize>,
    #[serde(flatten)]
    pub graph: SimilarityGraph<f64>,
}

#[derive(Debug, Clone)]
pub struct AnalysisBundle {
    config: Config,
    fraction: Fraction,
    transcripts: Vec<TokenSeq>,
    word_counts: Vec<usize>,
    table: OccurrenceTable,
    pairs: PairTable,
    matcher: Option<ChapterMatcher>,
    chapters: Vec<ChapterInfo>,
    truth: Option<GroundTruth>,
    stats: CourseStats,
}

impl AnalysisBundle {
    pub fn build(corpus: RawCorpus, config: &Config, truth: Option<GroundTruth>) -> Result<Self> {
        config.validate()?;
        corpus.validate()?;
        let fraction = config.theme_fraction()?;
        let (phrases, transcripts, table) = build_occurrences(&corpus, config);
        let word_counts: Vec<usize> = transcripts.iter().map(TokenSeq::len).collect();
        let stats = course_stats(&table, &word_counts);

        let pair_cfg = PairConfig::from_phrases(config.window, &phrases)?;
        let pairs = PairTable::build(&transcripts, &pair_cfg);

        let chapter_ids = corpus.chapter_ids();
        if let Some(t) = &truth {
            t.validate(&chapter_ids)?;
        }
        let matcher = if corpus.chapters.is_empty() {
            None
        } else {
            let space = FeatureSpace::with_g2_threshold(phrases, config.match_mode, pair_cfg, &pairs, config.g2_min);
            let chapter_tokens: Vec<TokenSeq> = corpus
                .chapters
                .iter()
                .map(|c| prepare_tokens(&c.text, config.stem))
                .collect();
            let opts = ScoreOptions {
                count_rule: config.count_rule,
                smoothing: config.smoothing,
            };
            Some(ChapterMatcher::new(
                &space,
                &transcripts,
                corpus.lecture_ids(),
                &chapter_tokens,
                chapter_ids,
                opts,
            )?)
        };
        let chapters = corpus
            .chapters
            .iter()
            .map(|c| ChapterInfo {
                id: c.chapter_id,
                label: c.label.clone(),
            })
            .collect();

        Ok(Self {
            config: config.clone(),
            fraction,
            transcripts,
            word_counts,
            table,
            pairs,
            matcher,
            chapters,
            truth,
            stats,
        })
    }

    /// Loads the corpus at `root`, picking up `groundtruth.txt` when present.
    pub fn load(root: &Path, config: &Config) -> Result<Self> {
        let corpus = corpus::load_corpus(root, config)?;
        let gt = root.join(GROUND_TRUTH_FILE);
        let truth = if gt.is_file() { Some(GroundTruth::load(&gt)?) } else { None };
        Self::build(corpus, config, truth)
    }

    pub fn config(&self) -> &Config {
        &self.config
    }

    pub fn table(&self) -> &OccurrenceTable {
        &self.table
    }

    pub fn pairs(&self) -> &PairTable {
        &self.pairs
    }

    pub fn transcripts(&self) -> &[TokenSeq] {
        &self.transcripts
    }

    pub fn word_counts(&self) -> &[usize] {
        &self.word_counts
    }

    pub fn stats(&self) -> &CourseStats {
        &self.stats
    }

    pub fn truth(&self) -> Option<&GroundTruth> {
        self.truth.as_ref()
    }

    pub fn matcher(&self) -> Option<&ChapterMatcher> {
        self.matcher.as_ref()
    }

    fn n(&self) -> usize {
        self.table.n_transcripts()
    }

    pub fn meta(&self) -> Meta {
        let n = self.n();
        let max_count = (0..self.table.n_phrases())
            .flat_map(|p| (0..n).map(move |t| (p, t)))
            .map(|(p, t)| self.table.count(p, t))
            .max()
            .unwrap_or(0)
            .max(1);
        let max_len = self.table.phrases().iter().map(IndexPhrase::len).max().unwrap_or(1);
        let c = &self.config;
        Meta {
            n_transcripts: n,
            n_phrases: self.table.n_phrases(),
            lecture_ids: self.table.lecture_ids().to_vec(),
            chapters: self.chapters.clone(),
            zoom: Bounds {
                min: 1,
                max: n,
                default: c.zoom.clamp(1, n),
            },
            focus: Bounds {
                min: 1,
                max: max_count,
                default: c.focus.clamp(1, max_count),
            },
            contrast: Bounds {
                min: 1,
                max: max_len,
                default: c.contrast.clamp(1, max_len),
            },
            modes: FeatureMode::ALL.to_vec(),
            default_mode: FeatureMode::PhrasesAndPairs,
            has_ground_truth: self.truth.is_some(),
            theme_fraction: self.fraction.to_string(),
            t_strong: c.t_strong,
            t_weak: c.t_weak,
        }
    }

    /// Filter with defaults from the config, clamped to the course size.
    pub fn default_filter(&self) -> ViewFilter {
        ViewFilter {
            zoom: self.config.zoom.clamp(1, self.n().max(1)),
            focus: self.config.focus,
            contrast: self.config.contrast,
        }
    }

    pub fn phrases(&self) -> Vec<PhraseInfo> {
        self.table
            .phrases()
            .iter()
            .enumerate()
            .map(|(id, p)| PhraseInfo {
                id,
                text: p.text(),
                tokens: p.tokens.clone(),
                source_line: p.source_line.clone(),
                synthetic: p.synthetic,
                doc_freq: self.table.doc_freq(id),
                total_count: self.table.total_count(id),
                kind: self.table.kind(id, self.fraction),
            })
            .collect()
    }

    pub fn index_map(&self, filter: ViewFilter) -> Result<IndexMapExport> {
        let layout = index_map::<f64>(&self.table, filter)?;
        Ok(IndexMapExport::new(&self.table, &layout))
    }

    /// Score matrix for one mode and zoom. With ground truth the export
    /// carries accuracy and the accuracy curve over every zoom.
    pub fn chapter_match(&self, mode: FeatureMode, zoom: usize) -> Result<MatchExport> {
        let matcher = self.matcher.as_ref().ok_or(Error::NoChapters)?;
        let n = self.n();
        if zoom < 1 || zoom > n {
            return Err(Error::Filter(format!("zoom must be in [1, {n}], got {zoom}")));
        }
        let matrix = matcher.matrix::<f64>(mode, zoom);
        let curve = match &self.truth {
            Some(t) => matcher.sweep::<f64>(mode, 1..=n, t)?,
            None => Vec::new(),
        };
        Ok(MatchExport::new(&matrix, self.truth.as_ref(), curve))
    }

    /// Maps phrase ids or phrase texts to ids. Texts are normalized the
    /// same way as index lines before lookup.
    pub fn resolve_selection<S: AsRef<str>>(&self, items: &[S]) -> Result<Vec<usize>> {
        let mut ids = Vec::new();
        let mut unknown = Vec::new();
        for item in items {
            let raw = item.as_ref().trim();
            if raw.is_empty() {
                continue;
            }
            let found = match raw.parse::<usize>() {
                Ok(id) if id < self.table.n_phrases() => Some(id),
                Ok(_) => None,
                Err(_) => {
                    let tokens: Vec<String> = prepare_tokens(raw, self.config.stem).tokens;
                    self.table.find(&tokens)
                }
            };
            match found {
                Some(id) if !ids.contains(&id) => ids.push(id),
                Some(_) => {}
                None => unknown.push(raw.to_string()),
            }
        }
        if !unknown.is_empty() {
            return Err(Error::UnknownPhrases(unknown));
        }
        if ids.is_empty() {
            return Err(Error::EmptySelection);
        }
        ids.sort_unstable();
        Ok(ids)
    }

    pub fn similarity(&self, selection: &[usize]) -> Result<SimilarityExport> {
        let d = distance_matrix::<f64>(selection, &self.table, 1)?;
        let emb = mds_embed(&d)?;
        let graph = build_graph(&emb, &d, self.table.lecture_ids(), self.config.t_strong, self.config.t_weak)?;
        Ok(SimilarityExport {
            phrases: selection.to_vec(),
            graph,
        })
    }

    pub fn collocations(&self, limit: RankLimit) -> Vec<CollocationScore<f64>> {
        rank_collocations(&self.pairs, self.table.phrases(), limit)
    }

    pub fn collocation_export(&self, limit: RankLimit) -> Vec<PairExport> {
        self.collocations(limit).iter().map(PairExport::from).collect()
    }
}

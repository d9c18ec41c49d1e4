//! Synthetic courses with known chapter/lecture ground truth.
//!
//! Each chapter draws from its own content vocabulary; adjacent chapters
//! share a fraction of their words. Lectures are sampled from their
//! chapter's distribution and then degraded by a substitution-only error
//! model to mimic low-accuracy speech recognition.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::AnalysisBundle;
use crate::chaptermatch::{FeatureMode, GroundTruth};
use crate::corpus::{Chapter, IndexLine, StopWords, Transcript, CHAPTER_DIR, INDEX_FILE, TRANSCRIPT_DIR};
use crate::{Config, Error, RawCorpus, Result};

const CONTENT_CONSONANTS: &[u8] = b"bdfgklmnprtv";
const CONTENT_VOWELS: &[u8] = b"aou";
const NOISE_CONSONANTS: &[u8] = b"bcdfghjklmnprtvwz";
const NOISE_VOWELS: &[u8] = b"aeiou";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthParams {
    pub n_chapters: usize,
    /// Content words per chapter.
    pub chapter_vocab_size: usize,
    /// Share of a chapter's vocabulary also used by the next chapter.
    pub shared_vocab_fraction: f64,
    pub lecture_length_tokens: usize,
    pub chapter_length_tokens: usize,
    /// Share of generated tokens that are content rather than stop words.
    pub content_fraction: f64,
    /// Share of a lecture's content drawn from its own chapter; the rest
    /// comes from randomly chosen other chapters.
    pub lecture_focus: f64,
    /// Zipf exponent of word frequencies inside a chapter.
    pub zipf_exponent: f64,
    /// Course-wide words used by every chapter.
    pub theme_vocab_size: usize,
    pub wer: f64,
    pub noise_vocab_size: usize,
    /// Draw substitutions from the content vocabulary instead of a
    /// disjoint noise list.
    pub confusable: bool,
    pub seed: u64,
}

impl Default for SynthParams {
    fn default() -> Self {
        Self {
            n_chapters: 10,
            chapter_vocab_size: 60,
            shared_vocab_fraction: 0.2,
            lecture_length_tokens: 6000,
            chapter_length_tokens: 3000,
            content_fraction: 0.15,
            lecture_focus: 0.5,
            zipf_exponent: 1.0,
            theme_vocab_size: 8,
            wer: 0.75,
            noise_vocab_size: 5000,
            confusable: false,
            seed: 0,
        }
    }
}

impl SynthParams {
    pub fn validate(&self) -> Result<()> {
        let unit = |name: &str, v: f64| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(Error::Param(format!("{name} must be in [0, 1], got {v}")))
            }
        };
        unit("wer", self.wer)?;
        unit("shared_vocab_fraction", self.shared_vocab_fraction)?;
        unit("content_fraction", self.content_fraction)?;
        unit("lecture_focus", self.lecture_focus)?;
        if !(self.zipf_exponent >= 0.0 && self.zipf_exponent.is_finite()) {
            return Err(Error::Param(format!("zipf_exponent must be >= 0, got {}", self.zipf_exponent)));
        }
        for (name, v) in [
            ("n_chapters", self.n_chapters),
            ("chapter_vocab_size", self.chapter_vocab_size),
            ("lecture_length_tokens", self.lecture_length_tokens),
            ("chapter_length_tokens", self.chapter_length_tokens),
            ("noise_vocab_size", self.noise_vocab_size),
        ] {
            if v == 0 {
                return Err(Error::Param(format!("{name} must be positive")));
            }
        }
        if self.chapter_vocab_size < 2 {
            return Err(Error::Param("chapter_vocab_size must be at least 2".into()));
        }
        Ok(())
    }

    /// Words shared between adjacent chapters.
    pub fn shared_words(&self) -> usize {
        ((self.shared_vocab_fraction * self.chapter_vocab_size as f64).round() as usize).min(self.chapter_vocab_size - 1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthCourse {
    pub corpus: RawCorpus,
    pub truth: GroundTruth,
    /// Content vocabulary of each chapter.
    pub vocabularies: Vec<Vec<String>>,
    pub noise: Vec<String>,
}

impl SynthCourse {
    /// Writes a corpus directory readable by [`crate::corpus::load_corpus`].
    pub fn write(&self, dir: &Path) -> Result<()> {
        let io = |p: &Path| {
            let p = p.to_path_buf();
            move |e| Error::Io { path: p, source: e }
        };
        let tdir = dir.join(TRANSCRIPT_DIR);
        let cdir = dir.join(CHAPTER_DIR);
        fs::create_dir_all(&tdir).map_err(io(&tdir))?;
        fs::create_dir_all(&cdir).map_err(io(&cdir))?;
        for t in &self.corpus.transcripts {
            let path = tdir.join(format!("lecture{:02}.txt", t.lecture_id));
            fs::write(&path, &t.text).map_err(io(&path))?;
        }
        for c in &self.corpus.chapters {
            let path = cdir.join(format!("chapter{:02}.txt", c.chapter_id));
            fs::write(&path, format!("# {}\n{}", c.label, c.text)).map_err(io(&path))?;
        }
        let index: String = self
            .corpus
            .index_lines
            .iter()
            .map(|l| format!("{}{}\n", " ".repeat(l.indent_level), l.text))
            .collect();
        let path = dir.join(INDEX_FILE);
        fs::write(&path, index).map_err(io(&path))?;
        let path = dir.join(crate::analysis::GROUND_TRUTH_FILE);
        fs::write(&path, self.truth.to_text()).map_err(io(&path))?;
        Ok(())
    }
}

fn pick(rng: &mut ChaCha8Rng, set: &[u8]) -> char {
    set[rng.gen_range(0..set.len())] as char
}

/// `count` distinct CVCVC words that are stable under stemming and not stop
/// words.
fn content_words(rng: &mut ChaCha8Rng, count: usize, stopwords: &StopWords) -> Vec<String> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let w: String = (0..5)
            .map(|i| pick(rng, if i % 2 == 0 { CONTENT_CONSONANTS } else { CONTENT_VOWELS }))
            .collect();
        if !stopwords.contains(&w) && seen.insert(w.clone()) {
            out.push(w);
        }
    }
    out
}

/// Six-letter CVCVCV words; disjoint from content words by length.
fn noise_words(rng: &mut ChaCha8Rng, count: usize) -> Vec<String> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let w: String = (0..6)
            .map(|i| pick(rng, if i % 2 == 0 { NOISE_CONSONANTS } else { NOISE_VOWELS }))
            .collect();
        if seen.insert(w.clone()) {
            out.push(w);
        }
    }
    out
}

struct ChapterModel {
    words: Vec<String>,
    /// Zipf weights over `words`, in a random rank order.
    weights: WeightedIndex<f64>,
    bigrams: Vec<(String, String)>,
}

impl ChapterModel {
    fn new(rng: &mut ChaCha8Rng, words: &[String], exponent: f64) -> Self {
        let mut ranks: Vec<usize> = (1..=words.len()).collect();
        ranks.shuffle(rng);
        let weights = WeightedIndex::new(ranks.iter().map(|&r| (r as f64).powf(-exponent))).expect("positive weights");
        let n_bigrams = (words.len() / 4).max(1);
        let mut seen = BTreeSet::new();
        let mut bigrams = Vec::new();
        while bigrams.len() < n_bigrams {
            let a = words.choose(rng).expect("non-empty");
            let b = words.choose(rng).expect("non-empty");
            if a != b && seen.insert((a.clone(), b.clone())) {
                bigrams.push((a.clone(), b.clone()));
            }
        }
        ChapterModel {
            words: words.to_vec(),
            weights,
            bigrams,
        }
    }

    fn push_content(&self, rng: &mut ChaCha8Rng, theme: &[String], out: &mut Vec<String>) {
        let r: f64 = rng.gen();
        if r < 0.2 && !self.bigrams.is_empty() {
            let (a, b) = self.bigrams.choose(rng).expect("non-empty");
            out.push(a.clone());
            out.push(b.clone());
        } else if r < 0.3 && !theme.is_empty() {
            out.push(theme.choose(rng).expect("non-empty").clone());
        } else {
            out.push(self.words[self.weights.sample(rng)].clone());
        }
    }
}

/// Token stream for one document of chapter `own`: content words (single
/// words, index bigrams, theme words) padded with stop words. With
/// probability `1 - focus` a content draw uses another chapter's model.
#[allow(clippy::too_many_arguments)]
fn sample_text(
    rng: &mut ChaCha8Rng,
    models: &[ChapterModel],
    own: usize,
    focus: f64,
    theme: &[String],
    fill: &[&str],
    len: usize,
    content: f64,
) -> Vec<String> {
    let mut out = Vec::with_capacity(len + 1);
    while out.len() < len {
        if rng.gen_bool(content) {
            let mut source = own;
            if models.len() > 1 && !rng.gen_bool(focus) {
                source = rng.gen_range(0..models.len() - 1);
                if source >= own {
                    source += 1;
                }
            }
            models[source].push_content(rng, theme, &mut out);
        } else {
            out.push(fill.choose(rng).expect("non-empty").to_string());
        }
    }
    out.truncate(len);
    out
}

fn to_text(tokens: &[String]) -> String {
    let mut s = String::new();
    for line in tokens.chunks(20) {
        s.push_str(&line.join(" "));
        s.push('\n');
    }
    s
}

/// Clean course: chapters, one lecture per chapter, an index and ground
/// truth mapping lecture k to chapter k. Deterministic in `params`.
pub fn generate_synthetic_course(params: &SynthParams) -> Result<SynthCourse> {
    generate(params, false)
}

fn generate(params: &SynthParams, degrade: bool) -> Result<SynthCourse> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let stopwords = StopWords::default();
    let fill: Vec<&str> = stopwords.iter().filter(|w| w.chars().all(|c| c.is_ascii_lowercase())).collect();

    let v = params.chapter_vocab_size;
    let s = params.shared_words();
    let stride = v - s;
    let n_content = stride * (params.n_chapters - 1) + v;
    let pool = content_words(&mut rng, n_content + params.theme_vocab_size, &stopwords);
    let (content, theme) = pool.split_at(n_content);
    let vocabularies: Vec<Vec<String>> = (0..params.n_chapters)
        .map(|c| content[c * stride..c * stride + v].to_vec())
        .collect();

    let models: Vec<ChapterModel> = vocabularies
        .iter()
        .map(|words| ChapterModel::new(&mut rng, words, params.zipf_exponent))
        .collect();

    let chapters: Vec<Chapter> = (0..models.len())
        .map(|c| {
            let tokens = sample_text(
                &mut rng,
                &models,
                c,
                1.0,
                theme,
                &fill,
                params.chapter_length_tokens,
                params.content_fraction,
            );
            Chapter {
                chapter_id: c as u32 + 1,
                label: format!("Chapter {}", c + 1),
                text: to_text(&tokens),
            }
        })
        .collect();

    let noise = if params.confusable {
        content.to_vec()
    } else {
        noise_words(&mut rng, params.noise_vocab_size)
    };
    let mut transcripts = Vec::with_capacity(params.n_chapters);
    for c in 0..models.len() {
        let clean = sample_text(
            &mut rng,
            &models,
            c,
            params.lecture_focus,
            theme,
            &fill,
            params.lecture_length_tokens,
            params.content_fraction,
        );
        let degrade_seed: u64 = rng.gen();
        let tokens = if degrade {
            degrade_transcript(&clean, params.wer, &noise, degrade_seed)
        } else {
            clean
        };
        transcripts.push(Transcript {
            lecture_id: c as u32 + 1,
            text: to_text(&tokens),
        });
    }

    let index_lines = index_lines(&mut rng, &pool, &models);
    let truth = GroundTruth(
        (1..=params.n_chapters as u32)
            .map(|k| (k, BTreeSet::from([k])))
            .collect(),
    );
    Ok(SynthCourse {
        corpus: RawCorpus {
            transcripts,
            chapters,
            index_lines,
            stopwords,
        },
        truth,
        vocabularies,
        noise,
    })
}

/// Alphabetical index of every content and theme word, with bigram
/// sub-entries, page locators and occasional plural forms.
fn index_lines(rng: &mut ChaCha8Rng, words: &[String], models: &[ChapterModel]) -> Vec<IndexLine> {
    let mut subs: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for (a, b) in models.iter().flat_map(|m| &m.bigrams) {
        subs.entry(a).or_default().push(b);
    }
    let mut sorted: Vec<&String> = words.iter().collect();
    sorted.sort();
    let mut lines = Vec::new();
    for w in sorted {
        let plural = if rng.gen_bool(0.2) { "s" } else { "" };
        let page = rng.gen_range(1..900);
        lines.push(format!("{w}{plural}, {page}"));
        if let Some(bs) = subs.get_mut(w.as_str()) {
            bs.sort();
            bs.dedup();
            for b in bs {
                let page = rng.gen_range(1..900);
                let mut line = format!("    {w} {b}, {page}");
                if rng.gen_bool(0.3) {
                    let _ = write!(line, "-{}", page + rng.gen_range(1..5));
                }
                lines.push(line);
            }
        }
    }
    lines.iter().map(|l| IndexLine::parse(l, false)).collect()
}

/// Replaces each token with a random noise token with probability `wer`.
/// Token count is preserved.
pub fn degrade_transcript(tokens: &[String], wer: f64, noise: &[String], seed: u64) -> Vec<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let wer = wer.clamp(0.0, 1.0);
    tokens
        .iter()
        .map(|t| {
            if !noise.is_empty() && rng.gen_bool(wer) {
                noise.choose(&mut rng).expect("non-empty").clone()
            } else {
                t.clone()
            }
        })
        .collect()
}

/// Course with degraded lectures, as fed to the benchmark.
pub fn generate_degraded_course(params: &SynthParams) -> Result<SynthCourse> {
    generate(params, true)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub mode: FeatureMode,
    pub zoom: usize,
    pub mean_accuracy: f64,
    pub min_accuracy: f64,
    pub max_accuracy: f64,
    pub seeds: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
    /// `per_seed[seed_index][mode][zoom_index]`
    pub per_seed: Vec<BTreeMap<FeatureMode, Vec<f64>>>,
}

impl BenchReport {
    pub fn row(&self, mode: FeatureMode, zoom: usize) -> Option<&BenchRow> {
        self.rows.iter().find(|r| r.mode == mode && r.zoom == zoom)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("mode,zoom,mean_accuracy,min_accuracy,max_accuracy,seeds\n");
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{},{},{:.6},{:.6},{:.6},{}",
                r.mode, r.zoom, r.mean_accuracy, r.min_accuracy, r.max_accuracy, r.seeds
            );
        }
        s
    }
}

/// Accuracy per (mode, zoom), averaged over `seeds`. Each seed generates
/// and degrades its own course; seeds run in parallel.
pub fn run_matching_benchmark(
    params: &SynthParams,
    modes: &[FeatureMode],
    zooms: &[usize],
    seeds: &[u64],
    config: &Config,
) -> Result<BenchReport> {
    if seeds.is_empty() || modes.is_empty() || zooms.is_empty() {
        return Err(Error::Param("benchmark needs at least one seed, mode and zoom".into()));
    }
    let per_seed: Vec<BTreeMap<FeatureMode, Vec<f64>>> = seeds
        .par_iter()
        .map(|&seed| {
            let p = SynthParams { seed, ..params.clone() };
            let course = generate_degraded_course(&p)?;
            let bundle = AnalysisBundle::build(course.corpus, config, Some(course.truth.clone()))?;
            let matcher = bundle.matcher().ok_or(Error::NoChapters)?;
            modes
                .iter()
                .map(|&m| {
                    let curve = matcher.sweep::<f64>(m, zooms.iter().copied(), &course.truth)?;
                    Ok((m, curve.into_iter().map(|(_, a)| a).collect()))
                })
                .collect()
        })
        .collect::<Result<_>>()?;

    let mut rows = Vec::new();
    for &mode in modes {
        for (zi, &zoom) in zooms.iter().enumerate() {
            let accs: Vec<f64> = per_seed.iter().map(|s| s[&mode][zi]).collect();
            rows.push(BenchRow {
                mode,
                zoom,
                mean_accuracy: accs.iter().sum::<f64>() / accs.len() as f64,
                min_accuracy: accs.iter().copied().fold(f64::INFINITY, f64::min),
                max_accuracy: accs.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                seeds: accs.len(),
            });
        }
    }
    Ok(BenchReport { rows, per_seed })
}

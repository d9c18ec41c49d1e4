//! Corpus ingestion and text normalization.

mod index;
mod stem;
mod stopwords;
mod tokenize;

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

pub use index::{normalize_index, normalize_phrase, IndexLine, IndexPhrase, NormalizeOptions};
pub use stem::stem_word;
pub use stopwords::{trim_stopwords, StopWords};
pub use tokenize::{tokenize, TokenSeq};

use crate::{Config, Error, Result};

pub const INDEX_FILE: &str = "index.txt";
pub const EXTRA_INDEX_FILE: &str = "index.extra.txt";
pub const STOPWORDS_FILE: &str = "stopwords.txt";
pub const TRANSCRIPT_DIR: &str = "transcripts";
pub const CHAPTER_DIR: &str = "chapters";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transcript {
    pub lecture_id: u32,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Chapter {
    pub chapter_id: u32,
    pub label: String,
    pub text: String,
}

/// Everything read from a corpus directory, before any analysis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawCorpus {
    pub transcripts: Vec<Transcript>,
    pub chapters: Vec<Chapter>,
    pub index_lines: Vec<IndexLine>,
    pub stopwords: StopWords,
}

impl RawCorpus {
    /// Checks lecture numbering (1..=n) and chapter ordering.
    pub fn validate(&self) -> Result<()> {
        let ids: Vec<u32> = self.transcripts.iter().map(|t| t.lecture_id).collect();
        if ids.is_empty() {
            return Err(Error::NoTranscripts(PathBuf::new()));
        }
        if ids.iter().enumerate().any(|(i, &id)| id as usize != i + 1) {
            return Err(Error::LectureNumbering(ids));
        }
        let chapter_ids: Vec<u32> = self.chapters.iter().map(|c| c.chapter_id).collect();
        if chapter_ids.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::ChapterNumbering(chapter_ids));
        }
        Ok(())
    }

    pub fn lecture_ids(&self) -> Vec<u32> {
        self.transcripts.iter().map(|t| t.lecture_id).collect()
    }

    pub fn chapter_ids(&self) -> Vec<u32> {
        self.chapters.iter().map(|c| c.chapter_id).collect()
    }
}

/// Tokenizes and (optionally) stems a document.
pub fn prepare_tokens(text: &str, stem: bool) -> TokenSeq {
    let raw = tokenize(text);
    if stem {
        raw.map_tokens(stem_word)
    } else {
        raw
    }
}

static LECTURE_FILE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^lecture(\d+)\.txt$").expect("valid regex"));
static CHAPTER_FILE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^chapter(\d+)\.txt$").expect("valid regex"));

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Numbered files in `dir` whose names match `pattern`, sorted by number.
fn numbered_files(dir: &Path, pattern: &Regex) -> Result<Vec<(u32, PathBuf)>> {
    if !dir.is_dir() {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        let name = entry.file_name();
        let Some(caps) = name.to_str().and_then(|n| pattern.captures(n)) else {
            continue;
        };
        let Ok(number) = caps[1].parse::<u32>() else {
            continue;
        };
        out.push((number, entry.path()));
    }
    out.sort();
    Ok(out)
}

/// Reads a corpus directory.
///
/// Transcripts come from `transcripts/lectureNN.txt` (or `lectureNN.txt` at
/// the root when there is no `transcripts/` directory) and chapters likewise
/// from `chapters/chapterNN.txt`. `index.txt` is required. A chapter file
/// whose first line starts with `# ` uses that line as its label.
pub fn load_corpus(root: &Path, config: &Config) -> Result<RawCorpus> {
    let index_path = root.join(INDEX_FILE);
    if !index_path.is_file() {
        return Err(Error::MissingIndex(index_path));
    }
    let mut index_lines: Vec<IndexLine> = read(&index_path)?
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| IndexLine::parse(l, false))
        .collect();
    let extra_path = root.join(EXTRA_INDEX_FILE);
    if extra_path.is_file() {
        index_lines.extend(
            read(&extra_path)?
                .lines()
                .filter(|l| !l.trim().is_empty())
                .map(|l| IndexLine::parse(l, true)),
        );
    }

    let transcripts = load_transcripts(root)?;

    let chapter_dir = subdir_or_root(root, CHAPTER_DIR);
    let chapters = numbered_files(&chapter_dir, &CHAPTER_FILE)?
        .into_iter()
        .map(|(chapter_id, path)| {
            let text = read(&path)?;
            Ok(split_label(chapter_id, text))
        })
        .collect::<Result<Vec<_>>>()?;

    let stopwords = if let Some(path) = &config.stopwords_file {
        StopWords::load(&resolve(root, path))?
    } else if root.join(STOPWORDS_FILE).is_file() {
        StopWords::load(&root.join(STOPWORDS_FILE))?
    } else {
        StopWords::default()
    };

    let corpus = RawCorpus {
        transcripts,
        chapters,
        index_lines,
        stopwords,
    };
    corpus.validate().map_err(|e| match e {
        Error::NoTranscripts(_) => Error::NoTranscripts(root.to_path_buf()),
        other => other,
    })?;
    Ok(corpus)
}

/// `lectureNN.txt` files under `dir/transcripts/`, or under `dir` itself
/// when there is no such subdirectory.
pub fn load_transcripts(dir: &Path) -> Result<Vec<Transcript>> {
    let transcript_dir = subdir_or_root(dir, TRANSCRIPT_DIR);
    let transcripts = numbered_files(&transcript_dir, &LECTURE_FILE)?
        .into_iter()
        .map(|(lecture_id, path)| Ok(Transcript { lecture_id, text: read(&path)? }))
        .collect::<Result<Vec<_>>>()?;
    if transcripts.is_empty() {
        return Err(Error::NoTranscripts(transcript_dir));
    }
    Ok(transcripts)
}

fn subdir_or_root(root: &Path, name: &str) -> PathBuf {
    let sub = root.join(name);
    if sub.is_dir() {
        sub
    } else {
        root.to_path_buf()
    }
}

fn resolve(root: &Path, path: &Path) -> PathBuf {
    if path.is_absolute() {
        path.to_path_buf()
    } else {
        root.join(path)
    }
}

fn split_label(chapter_id: u32, text: String) -> Chapter {
    if let Some(rest) = text.strip_prefix("# ") {
        let (label, body) = rest.split_once('\n').unwrap_or((rest, ""));
        return Chapter {
            chapter_id,
            label: label.trim().to_string(),
            text: body.to_string(),
        };
    }
    Chapter {
        chapter_id,
        label: format!("Chapter {chapter_id}"),
        text,
    }
}

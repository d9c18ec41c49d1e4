//! Locating index phrases in transcripts.
//!
//! The [`OccurrenceTable`] is the central index of a course: for every
//! normalized phrase and every transcript it records where the phrase's
//! tokens appear contiguously.

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{IndexPhrase, TokenSeq};
use crate::{Error, Fraction, Result};

/// How overlapping phrase matches are counted.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatchMode {
    /// Every phrase is matched on its own; "tree" also counts inside
    /// "binary tree".
    #[default]
    Independent,
    /// Left to right, the longest phrase starting at a position wins and
    /// consumes its tokens.
    Longest,
}

/// Token offsets of one phrase in one transcript. The count is the number
/// of offsets.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Occurrence {
    pub positions: Vec<usize>,
}

impl Occurrence {
    pub fn count(&self) -> usize {
        self.positions.len()
    }
}

/// Theme phrases run through a large share of the course, topic phrases
/// characterize individual lectures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhraseKind {
    Theme,
    Topic,
}

/// Theme iff `doc_freq >= fraction * n_transcripts`, compared exactly.
pub fn classify_phrase(doc_freq: usize, n_transcripts: usize, fraction: Fraction) -> PhraseKind {
    let lhs = doc_freq as u64 * u64::from(*fraction.denom());
    let rhs = u64::from(*fraction.numer()) * n_transcripts as u64;
    if lhs >= rhs {
        PhraseKind::Theme
    } else {
        PhraseKind::Topic
    }
}

/// Finds every phrase in one stemmed transcript. The result is parallel to
/// `phrases`.
pub fn match_phrases(transcript: &TokenSeq, phrases: &[IndexPhrase], mode: MatchMode) -> Vec<Occurrence> {
    let mut by_first: HashMap<&str, Vec<usize>> = HashMap::new();
    for (id, p) in phrases.iter().enumerate() {
        if let Some(first) = p.tokens.first() {
            by_first.entry(first.as_str()).or_default().push(id);
        }
    }
    let tokens = &transcript.tokens;
    let matches_at = |start: usize, id: usize| {
        let want = &phrases[id].tokens;
        tokens.len() - start >= want.len() && tokens[start..start + want.len()] == want[..]
    };

    let mut out = vec![Occurrence::default(); phrases.len()];
    let mut start = 0;
    while start < tokens.len() {
        let Some(candidates) = by_first.get(tokens[start].as_str()) else {
            start += 1;
            continue;
        };
        match mode {
            MatchMode::Independent => {
                for &id in candidates {
                    if matches_at(start, id) {
                        out[id].positions.push(start);
                    }
                }
                start += 1;
            }
            MatchMode::Longest => {
                let best = candidates
                    .iter()
                    .copied()
                    .filter(|&id| matches_at(start, id))
                    .max_by(|&a, &b| phrases[a].len().cmp(&phrases[b].len()).then(b.cmp(&a)));
                match best {
                    Some(id) => {
                        out[id].positions.push(start);
                        start += phrases[id].len();
                    }
                    None => start += 1,
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OccurrenceTable {
    phrases: Vec<IndexPhrase>,
    lecture_ids: Vec<u32>,
    /// `records[phrase][transcript]`
    records: Vec<Vec<Occurrence>>,
}

impl OccurrenceTable {
    /// Matches `phrases` in every transcript, in parallel.
    pub fn build(
        phrases: Vec<IndexPhrase>,
        transcripts: &[TokenSeq],
        lecture_ids: Vec<u32>,
        mode: MatchMode,
    ) -> Self {
        assert_eq!(transcripts.len(), lecture_ids.len());
        let per_transcript: Vec<Vec<Occurrence>> = transcripts
            .par_iter()
            .map(|t| match_phrases(t, &phrases, mode))
            .collect();
        Self::from_columns(phrases, lecture_ids, per_transcript)
    }

    /// Assembles a table from per-transcript match results.
    pub fn from_columns(
        phrases: Vec<IndexPhrase>,
        lecture_ids: Vec<u32>,
        per_transcript: Vec<Vec<Occurrence>>,
    ) -> Self {
        let mut records = vec![Vec::with_capacity(per_transcript.len()); phrases.len()];
        for column in per_transcript {
            assert_eq!(column.len(), phrases.len());
            for (row, occ) in records.iter_mut().zip(column) {
                row.push(occ);
            }
        }
        OccurrenceTable {
            phrases,
            lecture_ids,
            records,
        }
    }

    pub fn n_phrases(&self) -> usize {
        self.phrases.len()
    }

    pub fn n_transcripts(&self) -> usize {
        self.lecture_ids.len()
    }

    pub fn lecture_ids(&self) -> &[u32] {
        &self.lecture_ids
    }

    pub fn phrases(&self) -> &[IndexPhrase] {
        &self.phrases
    }

    pub fn phrase(&self, id: usize) -> &IndexPhrase {
        &self.phrases[id]
    }

    pub fn occurrence(&self, phrase: usize, transcript: usize) -> &Occurrence {
        &self.records[phrase][transcript]
    }

    pub fn count(&self, phrase: usize, transcript: usize) -> usize {
        self.records[phrase][transcript].count()
    }

    /// Number of transcripts containing the phrase at least once.
    pub fn doc_freq(&self, phrase: usize) -> usize {
        self.records[phrase].iter().filter(|o| o.count() > 0).count()
    }

    pub fn total_count(&self, phrase: usize) -> usize {
        self.records[phrase].iter().map(Occurrence::count).sum()
    }

    pub fn kind(&self, phrase: usize, fraction: Fraction) -> PhraseKind {
        classify_phrase(self.doc_freq(phrase), self.n_transcripts(), fraction)
    }

    /// Looks a phrase up by its token sequence.
    pub fn find(&self, tokens: &[String]) -> Option<usize> {
        self.phrases.iter().position(|p| p.tokens == tokens)
    }

    pub fn to_export(&self) -> OccurrenceExport {
        let phrases = self
            .phrases
            .iter()
            .enumerate()
            .map(|(id, p)| PhraseRecord {
                id,
                tokens: p.tokens.clone(),
                synthetic: p.synthetic,
            })
            .collect();
        let mut occurrences = Vec::new();
        for (phrase_id, row) in self.records.iter().enumerate() {
            for (t, occ) in row.iter().enumerate() {
                if occ.count() > 0 {
                    occurrences.push(OccurrenceRecord {
                        phrase_id,
                        lecture_id: self.lecture_ids[t],
                        count: occ.count(),
                        positions: occ.positions.clone(),
                    });
                }
            }
        }
        OccurrenceExport {
            phrases,
            occurrences,
            n_transcripts: self.n_transcripts(),
        }
    }

    /// Rebuilds a table from its export; lectures are numbered 1..=n.
    pub fn from_export(export: &OccurrenceExport) -> Result<Self> {
        let n = export.n_transcripts;
        let phrases: Vec<IndexPhrase> = export
            .phrases
            .iter()
            .map(|p| IndexPhrase {
                tokens: p.tokens.clone(),
                source_line: p.tokens.join(" "),
                synthetic: p.synthetic,
            })
            .collect();
        let mut records = vec![vec![Occurrence::default(); n]; phrases.len()];
        for rec in &export.occurrences {
            let t = (rec.lecture_id as usize)
                .checked_sub(1)
                .filter(|&t| t < n)
                .ok_or_else(|| Error::Param(format!("lecture {} out of range", rec.lecture_id)))?;
            let row = records
                .get_mut(rec.phrase_id)
                .ok_or_else(|| Error::Param(format!("phrase {} out of range", rec.phrase_id)))?;
            if rec.count != rec.positions.len() {
                return Err(Error::Param(format!(
                    "phrase {} lecture {}: count {} disagrees with {} positions",
                    rec.phrase_id,
                    rec.lecture_id,
                    rec.count,
                    rec.positions.len()
                )));
            }
            row[t].positions = rec.positions.clone();
        }
        Ok(OccurrenceTable {
            phrases,
            lecture_ids: (1..=n as u32).collect(),
            records,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhraseRecord {
    pub id: usize,
    pub tokens: Vec<String>,
    pub synthetic: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OccurrenceRecord {
    pub phrase_id: usize,
    pub lecture_id: u32,
    pub count: usize,
    pub positions: Vec<usize>,
}

/// JSON form of an [`OccurrenceTable`]; only non-zero records are listed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OccurrenceExport {
    pub phrases: Vec<PhraseRecord>,
    pub occurrences: Vec<OccurrenceRecord>,
    pub n_transcripts: usize,
}

/// Combines tables computed from different transcriptions of the same
/// lectures (e.g. two voice trainings).
///
/// The phrase registry becomes the union (by token sequence, first table's
/// order first). Each (phrase, lecture) cell takes the largest count among
/// the variants, with that variant's positions; ties go to the earlier
/// table. Counts are not summed since the variants transcribe the same
/// speech.
pub fn merge_variants(tables: &[OccurrenceTable]) -> Result<OccurrenceTable> {
    let first = tables
        .first()
        .ok_or_else(|| Error::Param("merge needs at least one table".into()))?;
    for t in &tables[1..] {
        if t.lecture_ids != first.lecture_ids {
            return Err(Error::MismatchedLectures(first.n_transcripts(), t.n_transcripts()));
        }
    }
    let n = first.n_transcripts();
    let mut phrases: Vec<IndexPhrase> = Vec::new();
    let mut slot: HashMap<Vec<String>, usize> = HashMap::new();
    let mut records: Vec<Vec<Occurrence>> = Vec::new();
    for table in tables {
        for (pid, phrase) in table.phrases.iter().enumerate() {
            let id = *slot.entry(phrase.tokens.clone()).or_insert_with(|| {
                phrases.push(phrase.clone());
                records.push(vec![Occurrence::default(); n]);
                phrases.len() - 1
            });
            for (merged, occ) in records[id].iter_mut().zip(&table.records[pid]) {
                if occ.count() > merged.count() {
                    *merged = occ.clone();
                }
            }
        }
    }
    Ok(OccurrenceTable {
        phrases,
        lecture_ids: first.lecture_ids.clone(),
        records,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LectureStats {
    pub lecture_id: u32,
    pub words: usize,
    /// Phrase occurrences, every occurrence counted.
    pub identified: usize,
    /// Distinct phrases present.
    pub unique: usize,
}

/// Occurrences of phrases of one word length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LengthShare {
    pub length: usize,
    pub occurrences: usize,
    pub share: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CourseStats {
    pub lectures: Vec<LectureStats>,
    pub avg_words: f64,
    pub avg_identified: f64,
    pub avg_unique: f64,
    /// Phrases found anywhere in the course.
    pub course_unique: usize,
    /// doc_freq -> number of phrases with that doc_freq (doc_freq >= 1).
    pub dispersion: BTreeMap<usize, usize>,
    pub length_breakdown: Vec<LengthShare>,
}

/// Per-lecture and course-level phrase statistics. `word_counts` holds the
/// token count of each transcript, in table order.
pub fn course_stats(table: &OccurrenceTable, word_counts: &[usize]) -> CourseStats {
    assert_eq!(word_counts.len(), table.n_transcripts());
    let lectures: Vec<LectureStats> = (0..table.n_transcripts())
        .map(|t| {
            let counts = (0..table.n_phrases()).map(|p| table.count(p, t));
            let (identified, unique) = counts.fold((0, 0), |(sum, uniq), c| (sum + c, uniq + usize::from(c > 0)));
            LectureStats {
                lecture_id: table.lecture_ids[t],
                words: word_counts[t],
                identified,
                unique,
            }
        })
        .collect();

    let mut dispersion = BTreeMap::new();
    let mut by_length: BTreeMap<usize, usize> = BTreeMap::new();
    for p in 0..table.n_phrases() {
        let df = table.doc_freq(p);
        if df > 0 {
            *dispersion.entry(df).or_insert(0) += 1;
            *by_length.entry(table.phrase(p).len()).or_insert(0) += table.total_count(p);
        }
    }
    let total_occ: usize = by_length.values().sum();
    let length_breakdown = by_length
        .into_iter()
        .map(|(length, occurrences)| LengthShare {
            length,
            occurrences,
            share: if total_occ == 0 { 0.0 } else { occurrences as f64 / total_occ as f64 },
        })
        .collect();

    let n = lectures.len().max(1) as f64;
    let avg = |f: fn(&LectureStats) -> usize| lectures.iter().map(f).sum::<usize>() as f64 / n;
    CourseStats {
        avg_words: avg(|l| l.words),
        avg_identified: avg(|l| l.identified),
        avg_unique: avg(|l| l.unique),
        course_unique: dispersion.values().sum(),
        dispersion,
        length_breakdown,
        lectures,
    }
}

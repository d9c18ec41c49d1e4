use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("index file required: {0} not found")]
    MissingIndex(PathBuf),

    #[error("no transcripts found under {0}")]
    NoTranscripts(PathBuf),

    #[error("lecture numbering must be contiguous from 1, found {0:?}")]
    LectureNumbering(Vec<u32>),

    #[error("chapter numbering must be strictly increasing, found {0:?}")]
    ChapterNumbering(Vec<u32>),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid view filter: {0}")]
    Filter(String),

    #[error("contingency table is empty")]
    EmptyContingency,

    #[error("occurrence tables cover different lecture sets ({0} vs {1} transcripts)")]
    MismatchedLectures(usize, usize),

    #[error("no lecture has a ground-truth chapter to evaluate against")]
    NoEvaluableLectures,

    #[error("ground truth: {0}")]
    GroundTruth(String),

    #[error("phrase selection is empty")]
    EmptySelection,

    #[error("unknown phrases in selection: {}", .0.join(", "))]
    UnknownPhrases(Vec<String>),

    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },

    #[error("invalid thresholds: strong {strong} exceeds weak {weak}")]
    Thresholds { strong: f64, weak: f64 },

    #[error("chapter matching unavailable: corpus has no chapters")]
    NoChapters,

    #[error("invalid parameter: {0}")]
    Param(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

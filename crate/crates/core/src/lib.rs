//! Course transcript analytics.
//!
//! Low-accuracy lecture transcripts are filtered through a textbook index to
//! recover meaningful phrases, which then drive three views over a course:
//! a transcript index map, a chapter/transcript match matrix and a lecture
//! similarity embedding.
//!
//! Numeric routines are generic over the scalar type (anything implementing
//! [`Scalar`]); the aliases at the crate root fix the scalar to `f64`.

pub mod analysis;
pub mod chaptermatch;
pub mod config;
pub mod corpus;
mod error;
pub mod indexer;
pub mod indexmap;
pub mod pairs;
mod scalar;
pub mod similarity;
pub mod synthlab;

pub use config::Config;
pub use corpus::{IndexPhrase, RawCorpus, TokenSeq};
pub use error::{Error, Result};
pub use indexer::{OccurrenceTable, PhraseKind};
pub use pairs::{PairKey, PairTable};
pub use scalar::Scalar;

/// Exact fraction used for the theme/topic threshold.
pub type Fraction = num_rational::Ratio<u32>;

pub type ScoreMatrix = chaptermatch::ScoreMatrix<f64>;
pub type MatchReport = chaptermatch::MatchReport<f64>;
pub type DistanceMatrix = similarity::DistanceMatrix<f64>;
pub type Embedding2D = similarity::Embedding2D<f64>;
pub type SimilarityGraph = similarity::SimilarityGraph<f64>;
pub type GridLayout = indexmap::GridLayout<f64>;
pub type CollocationScore = pairs::CollocationScore<f64>;
pub type AnalysisBundle = analysis::AnalysisBundle;

pub type Embedding2DF32 = similarity::Embedding2D<f32>;
pub type DistanceMatrixF32 = similarity::DistanceMatrix<f32>;

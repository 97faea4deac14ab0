//! Evaluation toolkit for cross-lingual AMR parsing.
//!
//! * [`penman`]: Penman parsing, serialization and corpus files.
//! * [`triples`]: graph to triple-bag conversion.
//! * [`smatch`] and [`s2match`]: alignment-based scoring, binary and graded.
//! * [`subscores`]: the fine-grained aspect breakdown.
//! * [`mt_quality`]: corpus BLEU and sentence-embedding cosine.
//! * [`consistency`]: scoring a system's outputs across languages.
//!
//! Scores are generic over [`Scalar`]. Binary Smatch is usually computed
//! in [`Exact`] rational arithmetic; graded scores use `f64`.

pub mod consistency;
pub mod generate;
mod matching;
pub mod mt_quality;
pub mod penman;
pub mod s2match;
pub mod scalar;
pub mod smatch;
pub mod subscores;
pub mod triples;

pub use consistency::{
    breakdown_consistency, consistency_matrix, ConsistencyError, ConsistencyMatrix, LanguageOutputs,
};
pub use mt_quality::{corpus_bleu, embedding_cosine_report, tokenize, CosineReport, SentencePair};
pub use penman::{parse_penman, read_corpus, serialize_penman, write_corpus, AmrGraph, CorpusEntry};
pub use s2match::{concept_similarity, load_embeddings, s2match_score, EmbeddingTable, S2Config, S2Match};
pub use scalar::{FloatScalar, Scalar};
pub use smatch::{
    brute_force_score, corpus_score, smatch_score, Alignment, MatchResult, PairScorer, ScoreError,
    SearchConfig, Smatch,
};
pub use subscores::{aspect_view, breakdown, Aspect, BreakdownReport};
pub use triples::{to_triples, Triple, TripleKind, TripleSet};

/// Exact rational score type.
pub type Exact = num_rational::Ratio<i64>;

/// Binary Smatch result in exact arithmetic.
pub type ExactMatch = MatchResult<Exact>;
/// Graded (or floating-point) result.
pub type GradedMatch = MatchResult<f64>;
pub type Embeddings = EmbeddingTable<f64>;
pub type ExactBreakdown = BreakdownReport<Exact>;
pub type GradedBreakdown = BreakdownReport<f64>;

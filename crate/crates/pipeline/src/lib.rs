//! `translate+parse`: machine-translate sentences to English with an
//! external translator, then parse the translations with an external
//! English AMR parser.
//!
//! Backends are reached over a line protocol on a subprocess's standard
//! streams or over HTTP JSON. Results are cached on disk, keyed by the
//! backend identity and the input text.

mod adapter;
mod cache;
mod error;
mod run;

pub use adapter::{split_blocks, Adapter, AdapterKind, AdapterSpec, Stage};
pub use cache::{Cache, CacheEntry};
pub use error::PipelineError;
pub use run::{
    parse_corpus, read_sentences, parse_sentences, run_pipeline, translate_corpus, write_outputs,
    provenance_path, PipelineRecord, PipelineRun, RunStats, SourceSentence, StageStats,
};

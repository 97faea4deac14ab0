//! AMR graphs in Penman notation.
//!
//! Parsing normalizes inverse roles (`:ARG0-of`) to forward edges, turns
//! bare variable references into re-entrant edges and keeps constants
//! verbatim. Serialization walks the graph from its root and introduces
//! every variable once.

mod corpus;
mod graph;
mod parse;
mod serialize;

pub use corpus::{
    parse_corpus_str, read_corpus, write_corpus, write_corpus_string, CorpusEntry, CorpusError,
    CorpusFailure, CorpusOutcome,
};
pub use graph::{AmrGraph, Attribute, ConstKind, Constant, Edge, GraphError};
pub use parse::{parse_penman, ParseError, ParseErrorKind};
pub use serialize::{serialize_penman, serialize_penman_compact};

/// Splits an inverse role (`ARG0-of`) into its forward form.
///
/// `consist-of` and `prep-X-of` are genuine roles and stay as written,
/// unless doubled (`consist-of-of`), which is the inverse of the verbatim
/// role.
pub fn invert_role(role: &str) -> Option<&str> {
    let lower = role.to_ascii_lowercase();
    if !lower.ends_with("-of") || lower.len() <= 3 {
        return None;
    }
    let doubled = lower.ends_with("-of-of");
    if !doubled && (lower == "consist-of" || (lower.starts_with("prep-") && lower.len() > 8)) {
        return None;
    }
    Some(&role[..role.len() - 3])
}

/// Inverse surface form of a stored forward role.
pub(crate) fn inverse_surface(role: &str) -> String {
    format!("{role}-of")
}

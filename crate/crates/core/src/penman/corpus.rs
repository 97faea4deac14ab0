use std::collections::HashSet;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use thiserror::Error;

use super::graph::AmrGraph;
use super::parse::{parse_penman, ParseError};
use super::serialize::serialize_penman;

/// One AMR block of a corpus file.
#[derive(Debug, Clone, PartialEq)]
pub struct CorpusEntry {
    pub id: String,
    pub sentence: Option<String>,
    pub graph: AmrGraph,
}

/// A block whose graph failed to parse.
#[derive(Debug, Clone, PartialEq)]
pub struct CorpusFailure {
    pub id: String,
    /// 1-based line of the block's first line.
    pub line: usize,
    pub error: ParseError,
}

#[derive(Debug, Clone, Default)]
pub struct CorpusOutcome {
    pub entries: Vec<CorpusEntry>,
    pub failures: Vec<CorpusFailure>,
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("entry `{id}` (line {line}): {source}")]
    Parse {
        id: String,
        line: usize,
        #[source]
        source: ParseError,
    },
    #[error("duplicate entry id `{0}`")]
    DuplicateId(String),
}

struct Block {
    line: usize,
    id: Option<String>,
    sentence: Option<String>,
    body: String,
}

fn blocks(text: &str) -> Vec<Block> {
    let mut out = Vec::new();
    let mut cur: Option<Block> = None;
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            if let Some(b) = cur.take() {
                out.push(b);
            }
            continue;
        }
        let b = cur.get_or_insert_with(|| Block {
            line: i + 1,
            id: None,
            sentence: None,
            body: String::new(),
        });
        let trimmed = line.trim_start();
        if let Some(comment) = trimmed.strip_prefix('#') {
            let comment = comment.trim_start();
            if let Some(rest) = comment.strip_prefix("::id") {
                if let Some(tok) = rest.split_whitespace().next() {
                    b.id = Some(tok.to_string());
                }
            } else if let Some(rest) = comment.strip_prefix("::snt") {
                if rest.is_empty() || rest.starts_with(char::is_whitespace) {
                    b.sentence = Some(rest.trim().to_string());
                }
            }
        } else {
            b.body.push_str(line);
            b.body.push('\n');
        }
    }
    out.extend(cur);
    out
}

/// Parses corpus text. In strict mode the first unparseable block aborts;
/// otherwise failing blocks are collected and skipped.
pub fn parse_corpus_str(text: &str, strict: bool) -> Result<CorpusOutcome, CorpusError> {
    let mut outcome = CorpusOutcome::default();
    let mut seen = HashSet::new();
    for block in blocks(text) {
        if block.body.trim().is_empty() {
            continue;
        }
        let id = block.id.unwrap_or_else(|| format!("line:{}", block.line));
        if !seen.insert(id.clone()) {
            return Err(CorpusError::DuplicateId(id));
        }
        match parse_penman(&block.body) {
            Ok(graph) => outcome.entries.push(CorpusEntry {
                id,
                sentence: block.sentence,
                graph,
            }),
            Err(source) if strict => {
                return Err(CorpusError::Parse {
                    id,
                    line: block.line,
                    source,
                })
            }
            Err(error) => outcome.failures.push(CorpusFailure {
                id,
                line: block.line,
                error,
            }),
        }
    }
    Ok(outcome)
}

pub fn read_corpus(path: impl AsRef<Path>, strict: bool) -> Result<CorpusOutcome, CorpusError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_corpus_str(&text, strict)
}

/// Renders entries in corpus block format.
pub fn write_corpus_string(entries: &[CorpusEntry]) -> String {
    let mut out = String::new();
    for e in entries {
        out.push_str("# ::id ");
        out.push_str(&e.id);
        out.push('\n');
        if let Some(snt) = &e.sentence {
            out.push_str("# ::snt ");
            out.push_str(&snt.replace('\n', " "));
            out.push('\n');
        }
        out.push_str(&serialize_penman(&e.graph));
        out.push_str("\n\n");
    }
    out
}

pub fn write_corpus(entries: &[CorpusEntry], path: impl AsRef<Path>) -> Result<(), CorpusError> {
    let path = path.as_ref();
    fs::write(path, write_corpus_string(entries)).map_err(|source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    })
}

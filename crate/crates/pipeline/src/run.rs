use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use xamr::penman::{parse_penman, serialize_penman, write_corpus_string, AmrGraph, CorpusEntry};

use crate::adapter::{Adapter, Stage};
use crate::cache::Cache;
use crate::error::PipelineError;

/// One input line: `id<TAB>sentence`, or a bare sentence that gets the
/// id `s<N>` (1-based position among non-blank lines).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceSentence {
    pub id: String,
    pub text: String,
}

pub fn parse_sentences(text: &str) -> Vec<SourceSentence> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .enumerate()
        .map(|(i, line)| match line.split_once('\t') {
            Some((id, snt)) if !id.trim().is_empty() => SourceSentence {
                id: id.trim().to_string(),
                text: snt.trim().to_string(),
            },
            _ => SourceSentence {
                id: format!("s{}", i + 1),
                text: line.trim().to_string(),
            },
        })
        .collect()
}

pub fn read_sentences(path: impl AsRef<Path>) -> Result<Vec<SourceSentence>, PipelineError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| PipelineError::io(path, e))?;
    Ok(parse_sentences(&text))
}

fn one_line(s: &str) -> String {
    s.replace("\r\n", " ").replace(['\n', '\r'], " ")
}

fn checked_batch(
    adapter: &Adapter,
    batch: usize,
    inputs: &[String],
    stage: Stage,
) -> Result<Vec<String>, PipelineError> {
    let out = adapter.invoke(batch, inputs, stage)?;
    if out.len() != inputs.len() {
        return Err(PipelineError::CountMismatch {
            batch,
            expected: inputs.len(),
            found: out.len(),
        });
    }
    Ok(out)
}

/// Runs `inputs` through `adapter` in batches of the configured size.
/// Output order and count match the input.
fn run_batches(adapter: &Adapter, inputs: &[String], stage: Stage) -> Result<Vec<String>, PipelineError> {
    let mut out = Vec::with_capacity(inputs.len());
    for (batch, chunk) in inputs.chunks(adapter.spec().batch_size).enumerate() {
        out.extend(checked_batch(adapter, batch, chunk, stage)?);
    }
    Ok(out)
}

pub fn translate_corpus(sentences: &[String], adapter: &Adapter) -> Result<Vec<String>, PipelineError> {
    let inputs: Vec<String> = sentences.iter().map(|s| one_line(s)).collect();
    run_batches(adapter, &inputs, Stage::Translate)
}

fn parse_block(block: &str, batch: usize, index: usize) -> Result<AmrGraph, PipelineError> {
    parse_penman(block).map_err(|source| PipelineError::Parse { batch, index, source })
}

/// Parses English sentences through `adapter`. Errors carry the batch
/// and the 0-based block index within the whole input.
pub fn parse_corpus(sentences: &[String], adapter: &Adapter) -> Result<Vec<AmrGraph>, PipelineError> {
    let inputs: Vec<String> = sentences.iter().map(|s| one_line(s)).collect();
    let size = adapter.spec().batch_size;
    let mut graphs = Vec::with_capacity(inputs.len());
    for (batch, chunk) in inputs.chunks(size).enumerate() {
        for (j, block) in checked_batch(adapter, batch, chunk, Stage::Parse)?.iter().enumerate() {
            graphs.push(parse_block(block, batch, batch * size + j)?);
        }
    }
    Ok(graphs)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineRecord {
    pub id: String,
    pub source_sentence: String,
    pub source_language: String,
    pub translated_sentence: String,
    pub graph: AmrGraph,
    pub created_unix_ms: u128,
    /// Identity strings of the adapters, versions included.
    pub translator: String,
    pub parser: String,
}

#[derive(Serialize)]
struct RecordJson<'a> {
    id: &'a str,
    source_sentence: &'a str,
    source_language: &'a str,
    translated_sentence: &'a str,
    graph: String,
    created_unix_ms: u128,
    translator: &'a str,
    parser: &'a str,
}

impl PipelineRecord {
    fn to_json(&self) -> RecordJson<'_> {
        RecordJson {
            id: &self.id,
            source_sentence: &self.source_sentence,
            source_language: &self.source_language,
            translated_sentence: &self.translated_sentence,
            graph: serialize_penman(&self.graph),
            created_unix_ms: self.created_unix_ms,
            translator: &self.translator,
            parser: &self.parser,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct StageStats {
    pub invocations: usize,
    pub hits: usize,
    pub misses: usize,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct RunStats {
    pub translate: StageStats,
    pub parse: StageStats,
}

impl RunStats {
    pub fn invocations(&self) -> usize {
        self.translate.invocations + self.parse.invocations
    }
}

#[derive(Debug, Clone)]
pub struct PipelineRun {
    pub records: Vec<PipelineRecord>,
    pub stats: RunStats,
}

/// Resolves every input through the cache, sends only the misses to the
/// adapter (in batches) and stores the new outputs.
fn cached_stage(
    inputs: &[String],
    adapter: &Adapter,
    stage: Stage,
    cache: Option<&Cache>,
    stats: &mut StageStats,
) -> Result<Vec<String>, PipelineError> {
    let identity = adapter.identity();
    let mut outputs: Vec<Option<String>> = vec![None; inputs.len()];
    let mut pending = Vec::new();
    for (i, input) in inputs.iter().enumerate() {
        let hit = match cache {
            Some(c) => c.get(stage, &identity, input)?,
            None => None,
        };
        if let Some(c) = cache {
            let tag = if hit.is_some() { "hit" } else { "miss" };
            c.log(&format!("{tag} {} {}", stage.name(), Cache::key(&identity, input)))?;
        }
        match hit {
            Some(out) => {
                stats.hits += 1;
                outputs[i] = Some(out);
            }
            None => {
                stats.misses += 1;
                pending.push(i);
            }
        }
    }
    for (batch, chunk) in pending.chunks(adapter.spec().batch_size).enumerate() {
        let batch_inputs: Vec<String> = chunk.iter().map(|&i| inputs[i].clone()).collect();
        if let Some(c) = cache {
            c.log(&format!("invoke {} batch {batch} size {}", stage.name(), chunk.len()))?;
        }
        stats.invocations += 1;
        let out = checked_batch(adapter, batch, &batch_inputs, stage)?;
        if stage == Stage::Parse {
            // a malformed block must not be cached
            for (j, block) in out.iter().enumerate() {
                parse_block(block, batch, chunk[j])?;
            }
        }
        for (&i, o) in chunk.iter().zip(out) {
            if let Some(c) = cache {
                c.put(stage, &identity, &inputs[i], &o)?;
            }
            outputs[i] = Some(o);
        }
    }
    Ok(outputs.into_iter().map(|o| o.expect("every input resolved")).collect())
}

fn now_ms() -> u128 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis())
        .unwrap_or(0)
}

/// Translate, then parse. With a cache, a re-run over unchanged inputs
/// and adapters makes no adapter calls.
pub fn run_pipeline(
    inputs: &[SourceSentence],
    language: &str,
    translator: &Adapter,
    parser: &Adapter,
    cache: Option<&Cache>,
) -> Result<PipelineRun, PipelineError> {
    let mut stats = RunStats::default();
    let sources: Vec<String> = inputs.iter().map(|s| one_line(&s.text)).collect();
    let translated = cached_stage(&sources, translator, Stage::Translate, cache, &mut stats.translate)?;
    let english: Vec<String> = translated.iter().map(|s| one_line(s)).collect();
    let blocks = cached_stage(&english, parser, Stage::Parse, cache, &mut stats.parse)?;
    let translator_id = translator.identity();
    let parser_id = parser.identity();
    let mut records = Vec::with_capacity(inputs.len());
    for (i, ((src, en), block)) in inputs.iter().zip(english).zip(&blocks).enumerate() {
        records.push(PipelineRecord {
            id: src.id.clone(),
            source_sentence: src.text.clone(),
            source_language: language.to_string(),
            translated_sentence: en,
            graph: parse_block(block, 0, i)?,
            created_unix_ms: now_ms(),
            translator: translator_id.clone(),
            parser: parser_id.clone(),
        });
    }
    Ok(PipelineRun { records, stats })
}

pub fn provenance_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_os_string();
    name.push(".provenance.json");
    PathBuf::from(name)
}

/// Writes the predicted graphs as an AMR corpus at `out` (the `::snt`
/// line holds the translation) and the records as `<out>.provenance.json`.
/// Returns the sidecar path.
pub fn write_outputs(records: &[PipelineRecord], out: &Path) -> Result<PathBuf, PipelineError> {
    let entries: Vec<CorpusEntry> = records
        .iter()
        .map(|r| CorpusEntry {
            id: r.id.clone(),
            sentence: Some(r.translated_sentence.clone()),
            graph: r.graph.clone(),
        })
        .collect();
    fs::write(out, write_corpus_string(&entries)).map_err(|e| PipelineError::io(out, e))?;
    let sidecar = provenance_path(out);
    let json: Vec<RecordJson<'_>> = records.iter().map(PipelineRecord::to_json).collect();
    let mut text = serde_json::to_string_pretty(&json).expect("records serialize");
    text.push('\n');
    fs::write(&sidecar, text).map_err(|e| PipelineError::io(&sidecar, e))?;
    Ok(sidecar)
}

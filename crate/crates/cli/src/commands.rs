use std::fmt;
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::Args;
use serde::Serialize;
use xamr::consistency::breakdown_consistency;
use xamr::mt_quality::{pair_lines, BleuStats, SentenceEmbeddings};
use xamr::penman::{parse_corpus_str, CorpusEntry};
use xamr::s2match::InvalidTau;
use xamr::subscores::corpus_breakdown;
use xamr::{
    consistency_matrix, corpus_score, embedding_cosine_report, load_embeddings, read_corpus, smatch::corpus_score_with,
    to_triples, Aspect, ConsistencyMatrix, Embeddings, Exact, LanguageOutputs, PairScorer, S2Config, S2Match, Scalar,
    SearchConfig, Smatch, TripleSet,
};
use xamr_pipeline::{read_sentences, run_pipeline, write_outputs, Adapter, AdapterSpec, Cache};

use crate::report::{self, pct, ScoreReport};
use crate::{GradedArgs, Metric, ReportFormat, SearchArgs};

#[derive(Debug)]
pub struct Failure {
    code: u8,
    message: String,
    /// Report printed to standard output before the diagnostic.
    pub output: Option<String>,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: 1,
            message: message.into(),
            output: None,
        }
    }

    fn data(message: impl fmt::Display) -> Self {
        Self {
            code: 2,
            message: message.to_string(),
            output: None,
        }
    }

    pub fn code(&self) -> u8 {
        self.code
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

type Outcome = Result<String, Failure>;

pub fn parse_input(s: &str) -> Result<(String, PathBuf), String> {
    match s.split_once('=') {
        Some((lang, file)) if !lang.trim().is_empty() && !file.trim().is_empty() => {
            Ok((lang.trim().to_string(), PathBuf::from(file.trim())))
        }
        _ => Err(format!("expected LANG=FILE, got `{s}`")),
    }
}

fn search_config(a: &SearchArgs) -> SearchConfig {
    SearchConfig::default().with_restarts(a.restarts).with_seed(a.seed)
}

fn load_entries(path: &Path) -> Result<Vec<CorpusEntry>, Failure> {
    read_corpus(path, true)
        .map(|c| c.entries)
        .map_err(|e| Failure::data(format!("{}: {e}", path.display())))
}

fn load_triples(path: &Path) -> Result<Vec<TripleSet>, Failure> {
    Ok(load_entries(path)?.iter().map(|e| to_triples(&e.graph)).collect())
}

struct Graded {
    table: Embeddings,
    config: S2Config<f64>,
}

fn graded(g: &GradedArgs, search: &SearchArgs) -> Result<Option<Graded>, Failure> {
    let Some(path) = &g.embeddings else {
        return Ok(None);
    };
    let mut config = S2Config::new(g.tau, search_config(search))
        .map_err(|InvalidTau| Failure::usage(format!("--tau must lie in [0, 1], got {}", g.tau)))?;
    config.grade_top = !g.binary_top;
    let table = load_embeddings(path).map_err(|e| Failure::data(format!("{}: {e}", path.display())))?;
    Ok(Some(Graded { table, config }))
}

fn render_score(r: &ScoreReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Text => r.text(),
        ReportFormat::Json => report::json(r),
        ReportFormat::Csv => r.csv(),
    }
}

pub fn score(gold: &Path, pred: &Path, search: &SearchArgs, format: ReportFormat) -> Outcome {
    let g = load_triples(gold)?;
    let p = load_triples(pred)?;
    let r = corpus_score::<Exact>(&g, &p, &search_config(search)).map_err(Failure::data)?;
    Ok(render_score(&ScoreReport::new("smatch", g.len(), &r, None), format))
}

pub fn s2score(gold: &Path, pred: &Path, search: &SearchArgs, g: &GradedArgs, format: ReportFormat) -> Outcome {
    let graded = graded(g, search)?.ok_or_else(|| Failure::usage("s2score requires --embeddings"))?;
    let gs = load_triples(gold)?;
    let ps = load_triples(pred)?;
    let scorer = S2Match::new(&graded.table, graded.config);
    let r = corpus_score_with(&scorer, &gs, &ps).map_err(Failure::data)?;
    Ok(render_score(&ScoreReport::new("s2match", gs.len(), &r, Some(g.tau)), format))
}

fn render_breakdown<S: Scalar>(overall: &'static str, r: &xamr::BreakdownReport<S>, format: ReportFormat) -> String {
    match format {
        ReportFormat::Text => report::breakdown_text(overall, r),
        ReportFormat::Json => report::breakdown_json(r),
        ReportFormat::Csv => report::breakdown_csv(r),
    }
}

pub fn breakdown(gold: &Path, pred: &Path, search: &SearchArgs, g: &GradedArgs, format: ReportFormat) -> Outcome {
    let graded = graded(g, search)?;
    let gs = load_triples(gold)?;
    let ps = load_triples(pred)?;
    Ok(match graded {
        Some(gr) => {
            let scorer = S2Match::new(&gr.table, gr.config);
            let r = corpus_breakdown(&gs, &ps, &scorer).map_err(Failure::data)?;
            render_breakdown("S2MATCH", &r, format)
        }
        None => {
            let r = corpus_breakdown::<Exact, _>(&gs, &ps, &Smatch::new(search_config(search))).map_err(Failure::data)?;
            render_breakdown("SMATCH", &r, format)
        }
    })
}

#[derive(Serialize)]
struct ConsistencyReport {
    metric: &'static str,
    languages: Vec<String>,
    pairs: Vec<report::PairCell>,
    f1_matrix: Vec<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    aspects: Option<serde_json::Map<String, serde_json::Value>>,
}

fn f1_matrix<S: Scalar>(m: &ConsistencyMatrix<S>) -> Vec<Vec<f64>> {
    m.cells
        .iter()
        .map(|row| row.iter().map(|c| c.f1.as_f64()).collect())
        .collect()
}

fn render_consistency<S: Scalar, P: PairScorer<S> + ?Sized>(
    outputs: &[LanguageOutputs],
    scorer: &P,
    metric: &'static str,
    label: &'static str,
    aspects: bool,
    format: ReportFormat,
) -> Outcome {
    let m = consistency_matrix(outputs, scorer).map_err(Failure::data)?;
    let per_aspect: Vec<(Aspect, ConsistencyMatrix<S>)> = if aspects {
        breakdown_consistency(outputs, scorer).map_err(Failure::data)?
    } else {
        Vec::new()
    };
    let mut rows = vec![(metric, label, &m)];
    rows.extend(per_aspect.iter().map(|(a, am)| (a.key(), a.label(), am)));
    Ok(match format {
        ReportFormat::Text => {
            let mut header = vec!["Metric".to_string()];
            header.extend(m.pairs().map(|(x, y)| report::pair_label(&m.languages[x], &m.languages[y])));
            let body: Vec<Vec<String>> = rows
                .iter()
                .map(|(_, label, mm)| {
                    let mut row = vec![label.to_string()];
                    row.extend(mm.pairs().map(|(x, y)| pct(mm.get(x, y).f1.as_f64())));
                    row
                })
                .collect();
            report::table(&header, &body)
        }
        ReportFormat::Json => {
            let aspects = aspects.then(|| {
                per_aspect
                    .iter()
                    .map(|(a, am)| {
                        (
                            a.key().to_string(),
                            serde_json::to_value(report::pair_cells(am)).expect("cells serialize"),
                        )
                    })
                    .collect()
            });
            report::json(&ConsistencyReport {
                metric,
                languages: m.languages.clone(),
                pairs: report::pair_cells(&m),
                f1_matrix: f1_matrix(&m),
                aspects,
            })
        }
        ReportFormat::Csv => {
            let body: Vec<Vec<String>> = rows
                .iter()
                .flat_map(|(key, _, mm)| {
                    report::pair_cells(mm).into_iter().map(move |c| {
                        vec![
                            key.to_string(),
                            c.x,
                            c.y,
                            c.precision.to_string(),
                            c.recall.to_string(),
                            c.f1.to_string(),
                        ]
                    })
                })
                .collect();
            report::csv(&["metric", "x", "y", "precision", "recall", "f1"], &body)
        }
    })
}

pub fn consistency(
    inputs: &[(String, PathBuf)],
    metric: Metric,
    aspects: bool,
    search: &SearchArgs,
    g: &GradedArgs,
    format: ReportFormat,
) -> Outcome {
    let graded = match metric {
        Metric::Smatch => None,
        Metric::S2match => {
            Some(graded(g, search)?.ok_or_else(|| Failure::usage("--metric s2match requires --embeddings"))?)
        }
    };
    let outputs = inputs
        .iter()
        .map(|(lang, path)| Ok(LanguageOutputs::new(lang.clone(), load_entries(path)?)))
        .collect::<Result<Vec<_>, Failure>>()?;
    match graded {
        Some(gr) => render_consistency(
            &outputs,
            &S2Match::new(&gr.table, gr.config),
            "s2match",
            "S2MATCH",
            aspects,
            format,
        ),
        None => render_consistency::<Exact, _>(
            &outputs,
            &Smatch::new(search_config(search)),
            "smatch",
            "SMATCH",
            aspects,
            format,
        ),
    }
}

fn read_text(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::data(format!("{}: {e}", path.display())))
}

#[derive(Serialize)]
struct BleuReport {
    bleu: f64,
    brevity_penalty: f64,
    precisions: Vec<Option<f64>>,
    hyp_len: usize,
    ref_len: usize,
    max_n: usize,
    sentences: usize,
}

pub fn bleu(hyp: &Path, reference: &Path, max_n: usize, format: ReportFormat) -> Outcome {
    let pairs = pair_lines(&read_text(hyp)?, &read_text(reference)?).map_err(Failure::data)?;
    let bleu = xamr::corpus_bleu(&pairs, max_n).map_err(Failure::data)?;
    let stats = BleuStats::collect(&pairs, max_n);
    let r = BleuReport {
        bleu,
        brevity_penalty: stats.brevity_penalty(),
        precisions: stats
            .matches
            .iter()
            .zip(&stats.totals)
            .map(|(&m, &t)| (t > 0).then(|| m as f64 / t as f64))
            .collect(),
        hyp_len: stats.hyp_len,
        ref_len: stats.ref_len,
        max_n,
        sentences: pairs.len(),
    };
    Ok(match format {
        ReportFormat::Text => report::table(
            &["".to_string(), "score".to_string()],
            &[
                vec!["BLEU".into(), format!("{:.3}", r.bleu)],
                vec!["BP".into(), format!("{:.3}", r.brevity_penalty)],
            ],
        ),
        ReportFormat::Json => report::json(&r),
        ReportFormat::Csv => report::csv(
            &["bleu", "brevity_penalty", "hyp_len", "ref_len", "max_n", "sentences"],
            &[vec![
                r.bleu.to_string(),
                r.brevity_penalty.to_string(),
                r.hyp_len.to_string(),
                r.ref_len.to_string(),
                r.max_n.to_string(),
                r.sentences.to_string(),
            ]],
        ),
    })
}

#[derive(Serialize)]
struct EmbsimReport {
    mean: f64,
    stdev: f64,
    count: usize,
}

pub fn embsim(hyp: &Path, reference: &Path, format: ReportFormat) -> Outcome {
    let load = |p: &Path| SentenceEmbeddings::load(p).map_err(|e| Failure::data(format!("{}: {e}", p.display())));
    let c = embedding_cosine_report(&load(hyp)?, &load(reference)?).map_err(Failure::data)?;
    let r = EmbsimReport {
        mean: c.mean,
        stdev: c.stdev,
        count: c.count,
    };
    Ok(match format {
        ReportFormat::Text => report::table(
            &["".to_string(), "mean".to_string(), "sd".to_string()],
            &[vec!["cosine sim.".into(), format!("{:.3}", r.mean), format!("{:.3}", r.stdev)]],
        ),
        ReportFormat::Json => report::json(&r),
        ReportFormat::Csv => report::csv(
            &["mean", "stdev", "count"],
            &[vec![r.mean.to_string(), r.stdev.to_string(), r.count.to_string()]],
        ),
    })
}

#[derive(Debug, Clone, Args)]
pub struct PipelineArgs {
    /// Source sentences, one per line, optionally `id<TAB>sentence`.
    #[arg(long)]
    input: PathBuf,
    /// Source language tag; substituted for `{lang}` in commands.
    #[arg(long, default_value = "und")]
    lang: String,
    #[arg(long, required_unless_present = "translate_url", conflicts_with = "translate_url")]
    translate_cmd: Option<String>,
    /// HTTP endpoint used instead of a translation command.
    #[arg(long)]
    translate_url: Option<String>,
    #[arg(long, required_unless_present = "parse_url", conflicts_with = "parse_url")]
    parse_cmd: Option<String>,
    /// HTTP endpoint used instead of a parser command.
    #[arg(long)]
    parse_url: Option<String>,
    #[arg(long)]
    translator_version: Option<String>,
    #[arg(long)]
    parser_version: Option<String>,
    /// Predicted AMR corpus; provenance goes to `<out>.provenance.json`.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, env = "XAMR_CACHE")]
    cache: Option<PathBuf>,
    #[arg(long, default_value_t = 32, value_parser = clap::value_parser!(u32).range(1..))]
    batch_size: u32,
    /// Per-batch timeout in seconds.
    #[arg(long, default_value_t = 600)]
    timeout: u64,
}

fn adapter_spec(cmd: &Option<String>, url: &Option<String>, version: &Option<String>, a: &PipelineArgs) -> AdapterSpec {
    let mut spec = match (cmd, url) {
        (Some(c), _) => AdapterSpec::subprocess(c.clone()),
        (None, Some(u)) => AdapterSpec::http(u.clone()),
        (None, None) => unreachable!("clap requires one of the two"),
    }
    .with_batch_size(a.batch_size as usize)
    .with_timeout(Duration::from_secs(a.timeout));
    if let Some(v) = version {
        spec = spec.with_version(v.clone());
    }
    spec
}

#[derive(Serialize)]
struct PipelineReport {
    records: usize,
    out: String,
    provenance: String,
    stats: xamr_pipeline::RunStats,
}

pub fn pipeline(a: &PipelineArgs, format: ReportFormat) -> Outcome {
    let usage = |e: xamr_pipeline::PipelineError| Failure::usage(e.to_string());
    let translator = Adapter::new(adapter_spec(&a.translate_cmd, &a.translate_url, &a.translator_version, a))
        .map_err(usage)?
        .with_language(a.lang.clone());
    let parser = Adapter::new(adapter_spec(&a.parse_cmd, &a.parse_url, &a.parser_version, a))
        .map_err(usage)?
        .with_language(a.lang.clone());
    let cache = a
        .cache
        .as_ref()
        .map(Cache::open)
        .transpose()
        .map_err(Failure::data)?;
    let sentences = read_sentences(&a.input).map_err(Failure::data)?;
    let run = run_pipeline(&sentences, &a.lang, &translator, &parser, cache.as_ref()).map_err(Failure::data)?;
    let sidecar = write_outputs(&run.records, &a.out).map_err(Failure::data)?;
    let r = PipelineReport {
        records: run.records.len(),
        out: a.out.display().to_string(),
        provenance: sidecar.display().to_string(),
        stats: run.stats,
    };
    Ok(match format {
        ReportFormat::Text => {
            let (t, p) = (r.stats.translate, r.stats.parse);
            format!(
                "{} records written to {}\nprovenance: {}\ntranslate: {} invocations, {} cached, {} new\nparse: {} invocations, {} cached, {} new\n",
                r.records, r.out, r.provenance, t.invocations, t.hits, t.misses, p.invocations, p.hits, p.misses
            )
        }
        ReportFormat::Json => report::json(&r),
        ReportFormat::Csv => report::csv(
            &["records", "translate_invocations", "parse_invocations", "translate_hits", "parse_hits"],
            &[vec![
                r.records.to_string(),
                r.stats.translate.invocations.to_string(),
                r.stats.parse.invocations.to_string(),
                r.stats.translate.hits.to_string(),
                r.stats.parse.hits.to_string(),
            ]],
        ),
    })
}

#[derive(Serialize)]
struct Invalid {
    id: String,
    line: usize,
    error: String,
}

#[derive(Serialize)]
struct ValidateReport {
    entries: usize,
    valid: usize,
    invalid: Vec<Invalid>,
}

pub fn validate(file: &Path, format: ReportFormat) -> Outcome {
    let text = read_text(file)?;
    let outcome = parse_corpus_str(&text, false).map_err(|e| Failure::data(format!("{}: {e}", file.display())))?;
    let r = ValidateReport {
        entries: outcome.entries.len() + outcome.failures.len(),
        valid: outcome.entries.len(),
        invalid: outcome
            .failures
            .iter()
            .map(|f| Invalid {
                id: f.id.clone(),
                line: f.line,
                error: f.error.to_string(),
            })
            .collect(),
    };
    let out = match format {
        ReportFormat::Text => {
            let mut s = String::new();
            for i in &r.invalid {
                s.push_str(&format!("{} (line {}): {}\n", i.id, i.line, i.error));
            }
            s.push_str(&format!("{} entries, {} valid, {} invalid\n", r.entries, r.valid, r.invalid.len()));
            s
        }
        ReportFormat::Json => report::json(&r),
        ReportFormat::Csv => report::csv(
            &["id", "line", "error"],
            &r.invalid
                .iter()
                .map(|i| vec![i.id.clone(), i.line.to_string(), i.error.clone()])
                .collect::<Vec<_>>(),
        ),
    };
    if r.invalid.is_empty() {
        Ok(out)
    } else {
        let ids: Vec<&str> = r.invalid.iter().map(|i| i.id.as_str()).collect();
        let mut f = Failure::data(format!(
            "{}: {} invalid block(s): {}",
            file.display(),
            ids.len(),
            ids.join(", ")
        ));
        f.output = Some(out);
        Err(f)
    }
}

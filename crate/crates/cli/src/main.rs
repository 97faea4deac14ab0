//! `xamr`: command-line front end for scoring, breakdowns, consistency,
//! MT quality and the translate+parse pipeline.
//!
//! Exit status: 0 on success, 1 on usage errors, 2 on data or contract
//! errors. Diagnostics go to standard error.

mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReportFormat {
    Text,
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Metric {
    Smatch,
    S2match,
}

#[derive(Debug, Parser)]
#[command(name = "xamr", version, about = "Cross-lingual AMR evaluation toolkit")]
struct Cli {
    /// Report format.
    #[arg(long, global = true, value_enum, default_value_t = ReportFormat::Text)]
    format: ReportFormat,
    /// Worker threads for corpus-level scoring (default: all cores).
    #[arg(long, global = true, value_parser = clap::value_parser!(u16).range(1..))]
    jobs: Option<u16>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct SearchArgs {
    /// Random restarts of the hill climber.
    #[arg(long, default_value_t = 4)]
    restarts: usize,
    /// Seed for the restart schedule.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Clone, Args)]
pub struct GradedArgs {
    /// Word-embedding file (`token v1 v2 ...` per line).
    #[arg(long)]
    embeddings: Option<PathBuf>,
    /// Similarity threshold below which graded credit is zero.
    #[arg(long, default_value_t = 0.5)]
    tau: f64,
    /// Score the top triple by exact match only.
    #[arg(long)]
    binary_top: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Corpus Smatch of a prediction file against a gold file.
    Score {
        #[arg(long)]
        gold: PathBuf,
        #[arg(long)]
        pred: PathBuf,
        #[command(flatten)]
        search: SearchArgs,
    },
    /// Corpus S2MATCH (graded concept similarity).
    S2score {
        #[arg(long)]
        gold: PathBuf,
        #[arg(long)]
        pred: PathBuf,
        #[command(flatten)]
        search: SearchArgs,
        #[command(flatten)]
        graded: GradedArgs,
    },
    /// Overall and per-aspect scores.
    Breakdown {
        #[arg(long)]
        gold: PathBuf,
        #[arg(long)]
        pred: PathBuf,
        #[command(flatten)]
        search: SearchArgs,
        /// Use graded scoring when given.
        #[command(flatten)]
        graded: GradedArgs,
    },
    /// Score one system's outputs for each language pair.
    Consistency {
        /// Comma-separated `LANG=FILE` list.
        #[arg(long, value_delimiter = ',', value_parser = commands::parse_input, required = true)]
        inputs: Vec<(String, PathBuf)>,
        #[arg(long, value_enum, default_value_t = Metric::Smatch)]
        metric: Metric,
        /// Add one row per aspect.
        #[arg(long)]
        aspects: bool,
        #[command(flatten)]
        search: SearchArgs,
        #[command(flatten)]
        graded: GradedArgs,
    },
    /// Corpus BLEU of a translation file against references.
    Bleu {
        #[arg(long)]
        hyp: PathBuf,
        #[arg(long = "ref")]
        reference: PathBuf,
        /// Highest n-gram order.
        #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u8).range(1..))]
        max_n: u8,
    },
    /// Mean cosine of line-aligned sentence embeddings.
    Embsim {
        #[arg(long)]
        hyp_emb: PathBuf,
        #[arg(long)]
        ref_emb: PathBuf,
    },
    /// Translate, then parse, with external backends.
    Pipeline(commands::PipelineArgs),
    /// Check that every block of a corpus file parses.
    Validate {
        #[arg(long)]
        file: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(jobs) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs as usize)
            .build_global()
        {
            eprintln!("xamr: {e}");
            return ExitCode::from(2);
        }
    }
    let result = match cli.command {
        Command::Score { gold, pred, search } => commands::score(&gold, &pred, &search, cli.format),
        Command::S2score {
            gold,
            pred,
            search,
            graded,
        } => commands::s2score(&gold, &pred, &search, &graded, cli.format),
        Command::Breakdown {
            gold,
            pred,
            search,
            graded,
        } => commands::breakdown(&gold, &pred, &search, &graded, cli.format),
        Command::Consistency {
            inputs,
            metric,
            aspects,
            search,
            graded,
        } => commands::consistency(&inputs, metric, aspects, &search, &graded, cli.format),
        Command::Bleu { hyp, reference, max_n } => commands::bleu(&hyp, &reference, max_n as usize, cli.format),
        Command::Embsim { hyp_emb, ref_emb } => commands::embsim(&hyp_emb, &ref_emb, cli.format),
        Command::Pipeline(args) => commands::pipeline(&args, cli.format),
        Command::Validate { file } => commands::validate(&file, cli.format),
    };
    match result {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            if let Some(out) = &e.output {
                print!("{out}");
            }
            eprintln!("xamr: {e}");
            ExitCode::from(e.code())
        }
    }
}

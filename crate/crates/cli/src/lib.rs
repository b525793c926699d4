//! Subcommands of the `abspec` binary, usable as library calls.
//!
//! Each `cmd_*` function reads its inputs from files, writes its outputs to
//! files and returns a summary. Errors carry an exit code through
//! [`CliError`].

mod config;
mod error;
mod eval;

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use abspec::absa::{load_labeled_snippets, train_specificity, SpecificityModel};
use abspec::config::TrainConfig;
use abspec::corpus::{
    extract_rrid_mentions, extract_specificity_snippets, parse_articles, Article,
    RridMentionSnippet, SpecificitySnippet,
};
use abspec::kb::{run_pipeline, KbEntry, KbStore};
use abspec::linking::{load_labeled_pairs, Dictionary, LinkModel};
use abspec::train::TrainReport;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use config::{require, PipelineConfig};
pub use error::{CliError, CliResult, Context};
pub use eval::{cmd_eval, EvalOptions, EvalOutput, EvalTask};

/// Which model `train` builds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Task {
    /// Specificity classification.
    #[value(name = "1")]
    Specificity,
    /// RRID linking.
    #[value(name = "2")]
    Linking,
}

/// Reads every `*.json` / `*.jsonl` file of `dir`, in file-name order.
pub fn load_corpus(dir: &Path) -> CliResult<Vec<Article>> {
    let entries = std::fs::read_dir(dir)
        .map_err(|e| CliError::data(format!("cannot read corpus directory {}: {e}", dir.display())))?;
    let mut files: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file())
        .filter(|p| matches!(p.extension().and_then(|x| x.to_str()), Some("json" | "jsonl")))
        .collect();
    files.sort();
    let parsed: Vec<CliResult<Vec<Article>>> = files
        .par_iter()
        .map(|p| {
            let raw = std::fs::read_to_string(p).context_with(|| p.display().to_string())?;
            parse_articles(&raw).context_with(|| p.display().to_string())
        })
        .collect();
    let mut articles = Vec::new();
    for p in parsed {
        articles.extend(p?);
    }
    log::info!("loaded {} articles from {}", articles.len(), dir.display());
    Ok(articles)
}

/// One line of `extract` output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ExtractRecord {
    Specificity(SpecificitySnippet),
    Rrid(RridMentionSnippet),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ExtractSummary {
    pub articles: usize,
    pub specificity_snippets: usize,
    pub rrid_mentions: usize,
}

/// Extracts both snippet types from a corpus directory into a JSON-lines file.
pub fn cmd_extract(corpus_dir: &Path, out: &Path) -> CliResult<ExtractSummary> {
    let articles = load_corpus(corpus_dir)?;
    let per_article: Vec<Vec<ExtractRecord>> = articles
        .par_iter()
        .map(|a| {
            let specs = extract_specificity_snippets(a).into_iter().map(ExtractRecord::Specificity);
            let rrids = extract_rrid_mentions(a).into_iter().map(ExtractRecord::Rrid);
            specs.chain(rrids).collect()
        })
        .collect();
    let mut summary = ExtractSummary {
        articles: articles.len(),
        specificity_snippets: 0,
        rrid_mentions: 0,
    };
    let mut w = BufWriter::new(File::create(out).context_with(|| out.display().to_string())?);
    for rec in per_article.iter().flatten() {
        match rec {
            ExtractRecord::Specificity(_) => summary.specificity_snippets += 1,
            ExtractRecord::Rrid(_) => summary.rrid_mentions += 1,
        }
        serde_json::to_writer(&mut w, rec)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(summary)
}

fn dictionary(path: Option<&Path>) -> CliResult<Dictionary> {
    match path {
        Some(p) => Dictionary::load(p).context_with(|| format!("dictionary {}", p.display())),
        None => Ok(Dictionary::bundled()),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrainOutcome {
    pub examples: usize,
    /// `None` for the overlap baseline, which has nothing to fit.
    pub report: Option<TrainReport>,
}

/// Trains a specificity (task 1) or linking (task 2) model and saves its archive.
pub fn cmd_train(
    task: Task,
    data: &Path,
    config: &TrainConfig,
    dictionary_path: Option<&Path>,
    out: &Path,
) -> CliResult<TrainOutcome> {
    config.validate()?;
    let outcome = match task {
        Task::Specificity => {
            let dataset = load_labeled_snippets(data).context_with(|| data.display().to_string())?;
            let (model, report) = train_specificity(&dataset, config)?;
            model.save(out)?;
            TrainOutcome {
                examples: dataset.len(),
                report: Some(report),
            }
        }
        Task::Linking => {
            let dataset = load_labeled_pairs(data).context_with(|| data.display().to_string())?;
            let mut model = LinkModel::init(&dataset, config, dictionary(dictionary_path)?)?;
            let report = model.fit(&dataset, config)?;
            model.save(out)?;
            TrainOutcome {
                examples: dataset.len(),
                report,
            }
        }
    };
    log::info!("saved model to {}", out.display());
    Ok(outcome)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BuildSummary {
    pub articles: usize,
    /// Entries produced by the pipeline, Neutral ones excluded.
    pub entries: Vec<KbEntry>,
    /// Entries that were new to the store.
    pub inserted: usize,
}

/// Runs the full workflow over a corpus and writes the results to the store
/// at `kb`, optionally exporting the whole store as JSON lines.
pub fn cmd_build_kb(
    corpus_dir: &Path,
    spec_model: &Path,
    link_model: &Path,
    kb: &Path,
    export: Option<&Path>,
) -> CliResult<BuildSummary> {
    let spec = SpecificityModel::load(spec_model).context_with(|| spec_model.display().to_string())?;
    let link = LinkModel::load(link_model).context_with(|| link_model.display().to_string())?;
    let articles = load_corpus(corpus_dir)?;
    let entries: Vec<KbEntry> = articles
        .par_iter()
        .flat_map_iter(|a| run_pipeline(a, &spec, &link))
        .collect();
    let mut store = KbStore::open(kb).context_with(|| kb.display().to_string())?;
    let inserted = store.insert(&entries)?;
    if let Some(path) = export {
        let mut w = BufWriter::new(File::create(path).context_with(|| path.display().to_string())?);
        store.export_jsonl(&mut w)?;
        w.flush()?;
    }
    let mut per_class: BTreeMap<String, usize> = BTreeMap::new();
    for e in &entries {
        *per_class.entry(e.specificity.to_string()).or_default() += 1;
    }
    log::info!("{} entries ({per_class:?}), {inserted} new", entries.len());
    Ok(BuildSummary {
        articles: articles.len(),
        entries,
        inserted,
    })
}

/// All stored statements about `rrid`, nonspecific first.
pub fn cmd_query(kb: &Path, rrid: &str) -> CliResult<Vec<KbEntry>> {
    if !kb.exists() {
        return Err(CliError::data(format!("no knowledge base at {}", kb.display())));
    }
    let store = KbStore::open(kb)?;
    Ok(store.query(rrid)?)
}

/// Alert blocks for `entries`, or a one-line note when there are none.
pub fn render_alerts(rrid: &str, entries: &[KbEntry]) -> String {
    if entries.is_empty() {
        return format!("no statements recorded for {rrid}\n");
    }
    entries
        .iter()
        .map(KbEntry::render_alert)
        .collect::<Vec<_>>()
        .join("\n")
}

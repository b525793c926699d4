use std::collections::HashSet;
use std::path::{Path, PathBuf};

use abspec::absa::{load_labeled_snippets, train_specificity, LabeledSnippet, SpecificityModel};
use abspec::config::TrainConfig;
use abspec::eval::{
    joint_eval, kfold_split, stratified_kfold_split, CrossValidation, EvalReport, JointItem,
};
use abspec::linking::{load_labeled_pairs, Dictionary, LabeledPair, LinkModel};
use abspec::SpecificityLabel;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{CliError, CliResult, Context};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum EvalTask {
    #[value(name = "1")]
    Specificity,
    #[value(name = "2")]
    Linking,
    /// Link and class must both be right.
    Joint,
}

#[derive(Debug, Clone)]
pub struct EvalOptions {
    pub config: TrainConfig,
    pub k: usize,
    pub stratified: bool,
    /// With trained models the whole dataset is scored once instead of cross-validated.
    pub spec_model: Option<PathBuf>,
    pub link_model: Option<PathBuf>,
    pub dictionary: Option<PathBuf>,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            config: TrainConfig::default(),
            k: 5,
            stratified: false,
            spec_model: None,
            link_model: None,
            dictionary: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum EvalOutput {
    CrossValidated(CrossValidation),
    Fixed(EvalReport),
}

impl EvalOutput {
    /// The pooled report of a cross-validation, or the single report.
    pub fn report(&self) -> &EvalReport {
        match self {
            EvalOutput::CrossValidated(cv) => &cv.pooled,
            EvalOutput::Fixed(r) => r,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn render_table(&self) -> String {
        match self {
            EvalOutput::CrossValidated(cv) => cv.render_table(),
            EvalOutput::Fixed(r) => r.render_table(),
        }
    }
}

fn folds(labels: &[usize], opts: &EvalOptions) -> CliResult<Vec<Vec<usize>>> {
    let seed = opts.config.seed;
    let folds = if opts.stratified {
        stratified_kfold_split(labels, opts.k, seed)
    } else {
        kfold_split(labels.len(), opts.k, seed)
    };
    folds.map_err(|e| CliError::usage(e.to_string()))
}

/// `(train, test)` items of fold `i`.
fn split<T: Clone>(items: &[T], fold: &[usize]) -> (Vec<T>, Vec<T>) {
    let test: HashSet<usize> = fold.iter().copied().collect();
    let train = (0..items.len()).filter(|i| !test.contains(i)).map(|i| items[i].clone()).collect();
    (train, fold.iter().map(|&i| items[i].clone()).collect())
}

fn cross_validate<T: Clone + Sync>(
    items: &[T],
    labels: &[usize],
    opts: &EvalOptions,
    run: impl Fn(&[T], &[T]) -> CliResult<EvalReport> + Sync,
) -> CliResult<EvalOutput> {
    let folds = folds(labels, opts)?;
    let reports = folds
        .par_iter()
        .enumerate()
        .map(|(i, fold)| {
            let (train, test) = split(items, fold);
            log::info!("fold {}/{}: {} train, {} test", i + 1, folds.len(), train.len(), test.len());
            run(&train, &test).map(|r| r.with_fold(i))
        })
        .collect::<CliResult<Vec<_>>>()?;
    Ok(EvalOutput::CrossValidated(CrossValidation::new(reports)?))
}

fn load_spec(path: &Path) -> CliResult<SpecificityModel> {
    SpecificityModel::load(path).context_with(|| path.display().to_string())
}

fn load_link(path: &Path) -> CliResult<LinkModel> {
    LinkModel::load(path).context_with(|| path.display().to_string())
}

fn score_specificity(model: &SpecificityModel, test: &[LabeledSnippet]) -> CliResult<EvalReport> {
    let truth: Vec<SpecificityLabel> = test.iter().map(|ex| ex.label).collect();
    let pred = test
        .iter()
        .map(|ex| Ok(model.classify_labeled(ex)?.label))
        .collect::<CliResult<Vec<_>>>()?;
    Ok(EvalReport::specificity(&truth, &pred)?)
}

fn link_decisions(model: &LinkModel, test: &[LabeledPair]) -> CliResult<Vec<bool>> {
    test.iter()
        .map(|p| Ok(model.score_texts(&p.spec_snippet, &p.rrid_snippet)?.value.is_yes()))
        .collect()
}

fn score_links(model: &LinkModel, test: &[LabeledPair]) -> CliResult<EvalReport> {
    let truth: Vec<bool> = test.iter().map(|p| p.link.is_yes()).collect();
    Ok(EvalReport::binary("link", &truth, &link_decisions(model, test)?)?)
}

fn score_joint(spec: &SpecificityModel, link: &LinkModel, test: &[LabeledPair]) -> CliResult<EvalReport> {
    let links = link_decisions(link, test)?;
    let mut truth = Vec::with_capacity(test.len());
    let mut pred = Vec::with_capacity(test.len());
    for (p, linked) in test.iter().zip(links) {
        let snippet = LabeledSnippet {
            text: p.spec_snippet.clone(),
            label: p.specificity,
            aspect: None,
        };
        truth.push(JointItem {
            link: p.link.is_yes(),
            label: p.specificity,
        });
        pred.push(JointItem {
            link: linked,
            label: spec.classify_labeled(&snippet)?.label,
        });
    }
    Ok(joint_eval(&truth, &pred)?)
}

/// The distinct specificity snippets of a pair dataset with their labels.
fn spec_examples(pairs: &[LabeledPair]) -> Vec<LabeledSnippet> {
    let mut seen = HashSet::new();
    pairs
        .iter()
        .filter(|p| seen.insert(p.spec_snippet.as_str()))
        .map(|p| LabeledSnippet {
            text: p.spec_snippet.clone(),
            label: p.specificity,
            aspect: None,
        })
        .collect()
}

fn fit_link(train: &[LabeledPair], opts: &EvalOptions, dict: &Dictionary) -> CliResult<LinkModel> {
    let mut model = LinkModel::init(train, &opts.config, dict.clone())?;
    model.fit(train, &opts.config)?;
    Ok(model)
}

/// Scores `task` on `data`: k-fold cross-validation by default, or a single
/// pass when the needed trained models are given in `opts`.
pub fn cmd_eval(task: EvalTask, data: &Path, opts: &EvalOptions) -> CliResult<EvalOutput> {
    opts.config.validate()?;
    let dict = match &opts.dictionary {
        Some(p) => Dictionary::load(p).context_with(|| p.display().to_string())?,
        None => Dictionary::bundled(),
    };
    match task {
        EvalTask::Specificity => {
            let dataset = load_labeled_snippets(data).context_with(|| data.display().to_string())?;
            if let Some(path) = &opts.spec_model {
                return Ok(EvalOutput::Fixed(score_specificity(&load_spec(path)?, &dataset)?));
            }
            let labels: Vec<usize> = dataset.iter().map(|ex| ex.label.index()).collect();
            cross_validate(&dataset, &labels, opts, |train, test| {
                let (model, _) = train_specificity(train, &opts.config)?;
                score_specificity(&model, test)
            })
        }
        EvalTask::Linking => {
            let dataset = load_labeled_pairs(data).context_with(|| data.display().to_string())?;
            if let Some(path) = &opts.link_model {
                return Ok(EvalOutput::Fixed(score_links(&load_link(path)?, &dataset)?));
            }
            let labels: Vec<usize> = dataset.iter().map(|p| usize::from(p.link.is_yes())).collect();
            cross_validate(&dataset, &labels, opts, |train, test| {
                score_links(&fit_link(train, opts, &dict)?, test)
            })
        }
        EvalTask::Joint => {
            let dataset = load_labeled_pairs(data).context_with(|| data.display().to_string())?;
            match (&opts.spec_model, &opts.link_model) {
                (Some(s), Some(l)) => {
                    return Ok(EvalOutput::Fixed(score_joint(&load_spec(s)?, &load_link(l)?, &dataset)?));
                }
                (None, None) => {}
                _ => {
                    return Err(CliError::usage(
                        "joint evaluation with fixed models needs both --spec-model and --link-model",
                    ))
                }
            }
            let labels: Vec<usize> = dataset
                .iter()
                .map(|p| 2 * p.specificity.index() + usize::from(p.link.is_yes()))
                .collect();
            cross_validate(&dataset, &labels, opts, |train, test| {
                let (spec, _) = train_specificity(&spec_examples(train), &opts.config)?;
                let link = fit_link(train, opts, &dict)?;
                score_joint(&spec, &link, test)
            })
        }
    }
}

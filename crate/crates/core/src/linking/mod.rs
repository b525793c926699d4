//! Deciding whether a specificity snippet talks about the antibody named in
//! an RRID mention snippet.

mod dictionary;
mod jaro;
mod overlap;
mod pair;
mod siamese;

use std::fmt;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::absa::SpecificityLabel;
use crate::archive;
use crate::config::TrainConfig;
use crate::corpus::CandidatePair;
use crate::encoder::{MiniEncoder, Vocab};
use crate::error::{Error, Result};
use crate::train::{class_weights, fit, holdout, TrainReport};

pub use dictionary::Dictionary;
pub use jaro::{jaro, jaro_winkler, PREFIX_CAP, PREFIX_SCALE};
pub use overlap::{baseline_link, OverlapBaseline, SATURATION};
pub use pair::{fit_pair_lengths, PairClassifier, YES};
pub use siamese::{Distance, SiameseModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Link {
    #[serde(alias = "Yes")]
    Yes,
    #[serde(alias = "No")]
    No,
}

impl Link {
    pub fn is_yes(self) -> bool {
        self == Link::Yes
    }
}

impl From<bool> for Link {
    fn from(yes: bool) -> Self {
        if yes {
            Link::Yes
        } else {
            Link::No
        }
    }
}

impl fmt::Display for Link {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(if self.is_yes() { "yes" } else { "no" })
    }
}

/// A link decision with its probability or similarity in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkLabel {
    pub value: Link,
    pub score: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LinkVariant {
    #[serde(rename = "PAIR_SPC")]
    PairSpc,
    #[serde(rename = "OVERLAP", alias = "OVERLAP_BASELINE")]
    Overlap,
    #[serde(rename = "SIAMESE")]
    Siamese,
}

/// One line of a Task-2 dataset.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledPair {
    pub spec_snippet: String,
    pub rrid_snippet: String,
    pub link: Link,
    pub specificity: SpecificityLabel,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rrid: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub article_id: Option<String>,
}

pub fn parse_labeled_pairs(raw: &str) -> Result<Vec<LabeledPair>> {
    raw.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| Error::Parse(format!("line {}: {e}", i + 1)))
        })
        .collect()
}

pub fn load_labeled_pairs(path: impl AsRef<Path>) -> Result<Vec<LabeledPair>> {
    parse_labeled_pairs(&std::fs::read_to_string(path)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", content = "model")]
pub enum LinkModel {
    #[serde(rename = "PAIR_SPC")]
    PairSpc(PairClassifier),
    #[serde(rename = "OVERLAP")]
    Overlap(OverlapBaseline),
    #[serde(rename = "SIAMESE")]
    Siamese(SiameseModel),
}

impl LinkModel {
    pub const ARCHIVE_KIND: &'static str = "link-model";

    pub fn variant(&self) -> LinkVariant {
        match self {
            LinkModel::PairSpc(_) => LinkVariant::PairSpc,
            LinkModel::Overlap(_) => LinkVariant::Overlap,
            LinkModel::Siamese(_) => LinkVariant::Siamese,
        }
    }

    /// Untrained model of `config.link_variant`; learned variants take their
    /// vocabulary from `dataset`.
    pub fn init(dataset: &[LabeledPair], config: &TrainConfig, dictionary: Dictionary) -> Result<Self> {
        config.validate()?;
        let texts = || {
            dataset
                .iter()
                .flat_map(|p| [p.spec_snippet.as_str(), p.rrid_snippet.as_str()])
        };
        Ok(match config.link_variant {
            LinkVariant::Overlap => {
                LinkModel::Overlap(OverlapBaseline::new(config.link_threshold(), dictionary))
            }
            LinkVariant::PairSpc => {
                let vocab = Vocab::build(texts(), config.vocab_min_count, config.vocab_max_size);
                let encoder = MiniEncoder::new(config.encoder_config(), vocab, config.seed)?;
                LinkModel::PairSpc(PairClassifier::new(encoder, config))
            }
            LinkVariant::Siamese => {
                let vocab = Vocab::build(texts(), config.vocab_min_count, config.vocab_max_size);
                LinkModel::Siamese(SiameseModel::new(vocab, config))
            }
        })
    }

    /// Continues training from the current parameters. The overlap baseline
    /// has none and is left as is.
    pub fn fit(&mut self, dataset: &[LabeledPair], config: &TrainConfig) -> Result<Option<TrainReport>> {
        config.validate()?;
        if matches!(self, LinkModel::Overlap(_)) {
            return Ok(None);
        }
        if dataset.is_empty() {
            return Err(Error::InvalidInput("empty linking dataset".into()));
        }
        for link in [Link::Yes, Link::No] {
            if !dataset.iter().any(|p| p.link == link) {
                log::warn!("linking data has no {link} examples");
            }
        }
        let labels: Vec<usize> = dataset.iter().map(|p| usize::from(p.link.is_yes())).collect();
        let weights = class_weights(&labels, 2, config.class_weighted);
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ 0x5eed_0002);
        let (tr, va) = holdout(dataset.len(), config.validation_fraction, &mut rng);
        let report = match self {
            LinkModel::Overlap(_) => unreachable!(),
            LinkModel::PairSpc(m) => {
                let items = dataset
                    .iter()
                    .zip(&weights)
                    .map(|(p, &w)| Ok(((m.input(&p.spec_snippet, &p.rrid_snippet)?, p.link.is_yes()), w)))
                    .collect::<Result<Vec<_>>>()?;
                let (train, val) = pick(&items, &tr, &va);
                fit(m, &train, &val, config, &mut rng)?
            }
            LinkModel::Siamese(m) => {
                let items = dataset
                    .iter()
                    .zip(&weights)
                    .map(|(p, &w)| {
                        Ok(((m.ids(&p.spec_snippet)?, m.ids(&p.rrid_snippet)?, p.link.is_yes()), w))
                    })
                    .collect::<Result<Vec<_>>>()?;
                let (train, val) = pick(&items, &tr, &va);
                fit(m, &train, &val, config, &mut rng)?
            }
        };
        Ok(Some(report))
    }

    /// Scores a specificity snippet text against an RRID mention snippet text.
    pub fn score_texts(&self, spec: &str, rrid: &str) -> Result<LinkLabel> {
        match self {
            LinkModel::PairSpc(m) => m.score_texts(spec, rrid),
            LinkModel::Overlap(m) => Ok(m.score_texts(spec, rrid)),
            LinkModel::Siamese(m) => m.score_texts(spec, rrid),
        }
    }

    pub fn classify_pair(&self, pair: &CandidatePair) -> Result<LinkLabel> {
        self.score_texts(&pair.spec.text, &pair.rrid.text)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        archive::save(path, Self::ARCHIVE_KIND, self)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        archive::load(path, Self::ARCHIVE_KIND)
    }
}

fn pick<T: Clone>(items: &[T], tr: &[usize], va: &[usize]) -> (Vec<T>, Vec<T>) {
    (
        tr.iter().map(|&i| items[i].clone()).collect(),
        va.iter().map(|&i| items[i].clone()).collect(),
    )
}

/// Builds a model of `config.link_variant` and trains it on `dataset`.
pub fn train_link_model(
    dataset: &[LabeledPair],
    config: &TrainConfig,
) -> Result<(LinkModel, Option<TrainReport>)> {
    let mut model = LinkModel::init(dataset, config, Dictionary::bundled())?;
    let report = model.fit(dataset, config)?;
    Ok((model, report))
}

/// Decision of the pair classifier for one candidate pair.
pub fn classify_link_pair(pair: &CandidatePair, model: &PairClassifier) -> Result<LinkLabel> {
    model.score_texts(&pair.spec.text, &pair.rrid.text)
}

pub fn siamese_similarity(pair: &CandidatePair, model: &SiameseModel) -> Result<LinkLabel> {
    model.score_texts(&pair.spec.text, &pair.rrid.text)
}

use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::aspect::{expand_aspect, AspectMode};
use super::head::SpecificityHead;
use super::{LabeledSnippet, SpecificityLabel};
use crate::archive;
use crate::config::{L2Scope, TrainConfig};
use crate::corpus::{Span, SpecificitySnippet};
use crate::encoder::{Encoder, EncoderInput, EncoderOutput, MiniEncoder, TokenSequence, Vocab};
use crate::error::{Error, Result};
use crate::nn::{ParamStore, Tape, Var};
use crate::train::{class_weights, fit, holdout, Objective, TrainReport};

/// Class probabilities for one (snippet, aspect) input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub label: SpecificityLabel,
    /// Indexed by [`SpecificityLabel::index`].
    pub probs: [f64; 3],
    /// The aspect text the snippet was classified against (empty when the
    /// head ignores the aspect).
    pub aspect: String,
    pub truncated: bool,
}

impl Prediction {
    fn from_logits(logits: &[f64], aspect: String, truncated: bool) -> Result<Self> {
        if !logits.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("logits"));
        }
        let mut probs = [logits[0], logits[1], logits[2]];
        crate::nn::softmax_in_place(&mut probs);
        Ok(Prediction {
            label: SpecificityLabel::argmax(logits),
            probs,
            aspect,
            truncated,
        })
    }
}

/// The bundled encoder plus a specificity head.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpecificityModel {
    pub encoder: MiniEncoder,
    pub head: SpecificityHead,
    pub l2_weight: f64,
    pub l2_scope: L2Scope,
    pub aspect_mode: AspectMode,
    pub freeze_encoder: bool,
}

fn check_span(text: &str, span: Span) -> Result<()> {
    if span.is_empty() || span.end > text.chars().count() {
        return Err(Error::InvalidInput(format!(
            "aspect span {}..{} is empty or outside the snippet",
            span.start, span.end
        )));
    }
    Ok(())
}

fn aspect_tokens(tokenize: impl Fn(&str) -> Result<TokenSequence>, use_aspect: bool, aspect: &str) -> Result<Vec<usize>> {
    if use_aspect {
        Ok(tokenize(aspect)?.ids)
    } else {
        Ok(Vec::new())
    }
}

impl SpecificityModel {
    pub const ARCHIVE_KIND: &'static str = "specificity-model";

    pub fn new(encoder: MiniEncoder, config: &TrainConfig) -> Self {
        let head = SpecificityHead::new(config.head_variant, encoder.config.d_model);
        SpecificityModel {
            encoder,
            head,
            l2_weight: config.l2_weight,
            l2_scope: config.l2_scope,
            aspect_mode: config.aspect_mode,
            freeze_encoder: config.freeze_encoder,
        }
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        archive::save(path, Self::ARCHIVE_KIND, self)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let model: Self = archive::load(path, Self::ARCHIVE_KIND)?;
        model.encoder.store.check_finite()?;
        model.head.store.check_finite()?;
        Ok(model)
    }

    /// The aspect text for the mention at `span`, per [`Self::aspect_mode`].
    pub fn aspect_text<'a>(&self, text: &'a str, span: Span) -> &'a str {
        expand_aspect(text, span, self.aspect_mode).slice(text)
    }

    /// Encoder layout for `text` classified against `aspect`.
    pub fn input(&self, text: &str, aspect: &str) -> Result<EncoderInput> {
        let snippet = self.encoder.tokenize(text)?;
        let aspect = aspect_tokens(|t| self.encoder.tokenize(t), self.head.variant.uses_aspect(), aspect)?;
        EncoderInput::new(&snippet.ids, &aspect, self.encoder.config.max_len)
    }

    pub(crate) fn logits_on(&self, tape: &mut Tape, input: &EncoderInput) -> Result<Var> {
        let hidden = if self.freeze_encoder {
            tape.leaf(self.encoder.hidden(input)?)
        } else {
            self.encoder.forward(tape, input)?
        };
        self.head.forward(tape, hidden, input.n, input.m)
    }

    fn predict_input(&self, input: &EncoderInput, aspect: &str) -> Result<Prediction> {
        let mut tape = Tape::new();
        let logits = self.logits_on(&mut tape, input)?;
        let row = tape.value(logits).row(0).to_vec();
        let aspect = if self.head.variant.uses_aspect() { aspect } else { "" };
        Prediction::from_logits(&row, aspect.to_string(), input.truncated)
    }

    /// Classifies `text` against the mention at char span `aspect`.
    pub fn classify(&self, text: &str, aspect: Span) -> Result<Prediction> {
        check_span(text, aspect)?;
        let aspect = self.aspect_text(text, aspect);
        self.predict_input(&self.input(text, aspect)?, aspect)
    }

    pub fn classify_labeled(&self, ex: &LabeledSnippet) -> Result<Prediction> {
        let span = ex.aspect_span(self.aspect_mode)?;
        let aspect = span.slice(&ex.text);
        self.predict_input(&self.input(&ex.text, aspect)?, aspect)
    }

    /// Mean cross-entropy plus the ℓ² term, as minimized in training.
    pub fn loss(&self, dataset: &[LabeledSnippet]) -> Result<f64> {
        let items = self.prepare(dataset, &vec![1.0; dataset.len()])?;
        crate::train::objective(self, &items)
    }

    fn prepare(&self, dataset: &[LabeledSnippet], weights: &[f64]) -> Result<Vec<((EncoderInput, usize), f64)>> {
        dataset
            .iter()
            .zip(weights)
            .map(|(ex, &w)| {
                let span = ex.aspect_span(self.aspect_mode)?;
                let input = self.input(&ex.text, span.slice(&ex.text))?;
                Ok(((input, ex.label.index()), w))
            })
            .collect()
    }
}

impl Objective for SpecificityModel {
    type Example = (EncoderInput, usize);

    fn example_loss(&self, tape: &mut Tape, (input, label): &Self::Example, weight: f64) -> Result<Var> {
        let logits = self.logits_on(tape, input)?;
        Ok(tape.softmax_cross_entropy(logits, *label, weight))
    }

    fn penalty(&self, tape: &mut Tape) -> Option<Var> {
        if self.l2_weight == 0.0 {
            return None;
        }
        let mut total = self.head.penalty(tape);
        if self.l2_scope == L2Scope::All && !self.freeze_encoder {
            for key in self.encoder.store.keys() {
                let p = self.encoder.store.on(tape, key);
                let sq = tape.sum_squares(p);
                total = tape.add(total, sq);
            }
        }
        Some(tape.scale(total, self.l2_weight))
    }

    fn stores_mut(&mut self) -> Vec<&mut ParamStore> {
        if self.freeze_encoder {
            vec![&mut self.head.store]
        } else {
            vec![&mut self.encoder.store, &mut self.head.store]
        }
    }
}

/// Classifies one extracted snippet against the antibody mention at
/// `aspect_span` (char offsets into `snippet.text`).
pub fn classify_specificity(
    snippet: &SpecificitySnippet,
    aspect_span: Span,
    model: &SpecificityModel,
) -> Result<Prediction> {
    model.classify(&snippet.text, aspect_span)
}

fn warn_missing_classes(dataset: &[LabeledSnippet]) {
    for label in SpecificityLabel::ALL {
        if !dataset.iter().any(|ex| ex.label == label) {
            log::warn!("training data has no {label} examples");
        }
    }
}

fn shuffle_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_0001)
}

fn split<T: Clone>(items: Vec<T>, fraction: f64, rng: &mut ChaCha8Rng) -> (Vec<T>, Vec<T>) {
    let (tr, va) = holdout(items.len(), fraction, rng);
    (
        tr.iter().map(|&i| items[i].clone()).collect(),
        va.iter().map(|&i| items[i].clone()).collect(),
    )
}

/// Builds a vocabulary from the dataset, initializes the encoder from
/// `config.seed` and fine-tunes encoder and head together.
pub fn train_specificity(
    dataset: &[LabeledSnippet],
    config: &TrainConfig,
) -> Result<(SpecificityModel, TrainReport)> {
    config.validate()?;
    if dataset.is_empty() {
        return Err(Error::InvalidInput("empty specificity dataset".into()));
    }
    warn_missing_classes(dataset);
    let vocab = Vocab::build(
        dataset
            .iter()
            .flat_map(|ex| std::iter::once(ex.text.as_str()).chain(ex.aspect.as_deref())),
        config.vocab_min_count,
        config.vocab_max_size,
    );
    let encoder = MiniEncoder::new(config.encoder_config(), vocab, config.seed)?;
    let mut model = SpecificityModel::new(encoder, config);
    let labels: Vec<usize> = dataset.iter().map(|ex| ex.label.index()).collect();
    let items = model.prepare(dataset, &class_weights(&labels, 3, config.class_weighted))?;
    let mut rng = shuffle_rng(config.seed);
    let (train, validation) = split(items, config.validation_fraction, &mut rng);
    let report = fit(&mut model, &train, &validation, config, &mut rng)?;
    Ok((model, report))
}

/// A specificity head over any [`Encoder`], whose outputs are taken as fixed.
#[derive(Debug, Clone)]
struct FrozenHead {
    head: SpecificityHead,
    l2_weight: f64,
}

impl Objective for FrozenHead {
    type Example = (EncoderOutput, usize);

    fn example_loss(&self, tape: &mut Tape, (out, label): &Self::Example, weight: f64) -> Result<Var> {
        let hidden = tape.leaf(out.hidden.clone());
        let logits = self.head.forward(tape, hidden, out.n, out.m)?;
        Ok(tape.softmax_cross_entropy(logits, *label, weight))
    }

    fn penalty(&self, tape: &mut Tape) -> Option<Var> {
        (self.l2_weight > 0.0).then(|| {
            let p = self.head.penalty(tape);
            tape.scale(p, self.l2_weight)
        })
    }

    fn stores_mut(&mut self) -> Vec<&mut ParamStore> {
        vec![&mut self.head.store]
    }
}

fn encode_with(
    encoder: &dyn Encoder,
    variant_uses_aspect: bool,
    text: &str,
    aspect: &str,
) -> Result<EncoderOutput> {
    let snippet = encoder.tokenize(text)?;
    let aspect = if variant_uses_aspect {
        encoder.tokenize(aspect)?
    } else {
        TokenSequence::default()
    };
    encoder.encode(&snippet, &aspect)
}

/// Classifies with an external encoder and a head trained by [`train_head`].
pub fn classify_with_encoder(
    encoder: &dyn Encoder,
    head: &SpecificityHead,
    text: &str,
    aspect: &str,
) -> Result<Prediction> {
    if encoder.dim() != head.dim() {
        return Err(Error::Shape(format!(
            "encoder width {} does not match head width {}",
            encoder.dim(),
            head.dim()
        )));
    }
    let uses = head.variant.uses_aspect();
    let out = encode_with(encoder, uses, text, aspect)?;
    let logits = head.logits(&out)?;
    let aspect = if uses { aspect } else { "" };
    Prediction::from_logits(logits.as_slice().expect("contiguous"), aspect.to_string(), out.truncated)
}

/// Trains only a head on top of a fixed `encoder`; the route for pretrained
/// backends that cannot be differentiated here.
pub fn train_head(
    encoder: &dyn Encoder,
    dataset: &[LabeledSnippet],
    config: &TrainConfig,
) -> Result<(SpecificityHead, TrainReport)> {
    config.validate()?;
    if dataset.is_empty() {
        return Err(Error::InvalidInput("empty specificity dataset".into()));
    }
    warn_missing_classes(dataset);
    let head = SpecificityHead::new(config.head_variant, encoder.dim());
    let uses = head.variant.uses_aspect();
    let labels: Vec<usize> = dataset.iter().map(|ex| ex.label.index()).collect();
    let weights = class_weights(&labels, 3, config.class_weighted);
    let items = dataset
        .iter()
        .zip(weights)
        .map(|(ex, w)| {
            let span = ex.aspect_span(config.aspect_mode)?;
            let out = encode_with(encoder, uses, &ex.text, span.slice(&ex.text))?;
            Ok(((out, ex.label.index()), w))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut model = FrozenHead {
        head,
        l2_weight: config.l2_weight,
    };
    let mut rng = shuffle_rng(config.seed);
    let (train, validation) = split(items, config.validation_fraction, &mut rng);
    let report = fit(&mut model, &train, &validation, config, &mut rng)?;
    Ok((model.head, report))
}

//! Aspect-based specificity classification.
//!
//! A snippet and its antibody mention (the *aspect*) are encoded together as
//! `[CLS] snippet [SEP] aspect`. The attention-over-attention head scores
//! snippet tokens against aspect tokens and pools the snippet rows into a
//! single vector, optionally concatenated with the `[CLS]` vector, before a
//! three-way softmax.

mod aoa;
mod aspect;
mod head;
mod model;

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::{Span, ANTIBODY_RE};
use crate::error::{Error, Result};

pub use aoa::{aoa_attention, aoa_pool, cls_concat, AoaAttention};
pub use aspect::{expand_aspect, AspectMode, MAX_PHRASE_WORDS};
pub use head::{HeadVariant, SpecificityHead};
pub use model::{
    classify_specificity, classify_with_encoder, train_head, train_specificity, Prediction,
    SpecificityModel,
};

/// The three classes, in their natural order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpecificityLabel {
    #[serde(alias = "Nonspecific", alias = "negative")]
    Nonspecific,
    #[serde(alias = "Neutral")]
    Neutral,
    #[serde(alias = "Specific", alias = "positive")]
    Specific,
}

impl SpecificityLabel {
    pub const ALL: [SpecificityLabel; 3] = [
        SpecificityLabel::Nonspecific,
        SpecificityLabel::Neutral,
        SpecificityLabel::Specific,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SpecificityLabel::Nonspecific => "nonspecific",
            SpecificityLabel::Neutral => "neutral",
            SpecificityLabel::Specific => "specific",
        }
    }

    /// Index of the largest score. Ties go to the lower index, so
    /// Nonspecific beats Neutral beats Specific.
    pub fn argmax(scores: &[f64]) -> Self {
        assert_eq!(scores.len(), 3, "expected three class scores");
        let mut best = 0;
        for i in 1..3 {
            if scores[i] > scores[best] {
                best = i;
            }
        }
        Self::ALL[best]
    }
}

impl fmt::Display for SpecificityLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SpecificityLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_lowercase().as_str() {
            "nonspecific" | "negative" => Ok(SpecificityLabel::Nonspecific),
            "neutral" => Ok(SpecificityLabel::Neutral),
            "specific" | "positive" => Ok(SpecificityLabel::Specific),
            other => Err(Error::InvalidInput(format!("unknown specificity label {other:?}"))),
        }
    }
}

/// One line of a Task-1 dataset.
///
/// `aspect` is the exact antibody mention to classify against; when absent
/// the first "antibody"/"antibodies" match is used, expanded per the model's
/// [`AspectMode`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledSnippet {
    pub text: String,
    pub label: SpecificityLabel,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub aspect: Option<String>,
}

impl LabeledSnippet {
    /// Char span of the aspect inside `text`.
    pub fn aspect_span(&self, mode: AspectMode) -> Result<Span> {
        match &self.aspect {
            Some(a) => {
                let byte = self.text.find(a.as_str()).ok_or_else(|| {
                    Error::InvalidInput(format!("aspect {a:?} does not occur in the snippet"))
                })?;
                let start = self.text[..byte].chars().count();
                Ok(Span::new(start, start + a.chars().count()))
            }
            None => {
                let m = ANTIBODY_RE.find(&self.text).ok_or_else(|| {
                    Error::InvalidInput("snippet mentions no antibody and has no aspect".into())
                })?;
                let start = self.text[..m.start()].chars().count();
                let span = Span::new(start, start + m.as_str().chars().count());
                Ok(expand_aspect(&self.text, span, mode))
            }
        }
    }
}

pub fn parse_labeled_snippets(raw: &str) -> Result<Vec<LabeledSnippet>> {
    raw.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l)
                .map_err(|e| Error::Parse(format!("line {}: {e}", i + 1)))
        })
        .collect()
}

pub fn load_labeled_snippets(path: impl AsRef<Path>) -> Result<Vec<LabeledSnippet>> {
    parse_labeled_snippets(&std::fs::read_to_string(path)?)
}

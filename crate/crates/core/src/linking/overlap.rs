//! Word-overlap linking baseline.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::dictionary::Dictionary;
use super::jaro::jaro_winkler;
use super::{Link, LinkLabel};
use crate::corpus::{CandidatePair, RRID_RE};

/// Matched pairs at which the score saturates.
pub const SATURATION: f64 = 3.0;

/// Counts shared non-dictionary tokens between the two snippets. Two tokens
/// match when their Jaro-Winkler similarity reaches `threshold`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverlapBaseline {
    pub threshold: f64,
    pub dictionary: Dictionary,
}

fn is_rrid_token(tok: &str) -> bool {
    RRID_RE.is_match(tok) || tok.starts_with("rrid")
}

impl OverlapBaseline {
    pub fn new(threshold: f64, dictionary: Dictionary) -> Self {
        OverlapBaseline {
            threshold,
            dictionary,
        }
    }

    /// Distinct lowercase tokens that could name an antibody: edge punctuation
    /// is trimmed, and dictionary words, punctuation-only tokens and RRIDs are
    /// dropped. Tokens with a digit are kept even if the dictionary has them.
    pub fn candidate_tokens(&self, text: &str) -> BTreeSet<String> {
        text.split_whitespace()
            .map(|t| t.trim_matches(|c: char| !c.is_alphanumeric()).to_lowercase())
            .filter(|t| !t.is_empty())
            .filter(|t| !is_rrid_token(t) && !RRID_RE.is_match(&t.to_uppercase()))
            .filter(|t| t.chars().any(|c| c.is_ascii_digit()) || !self.dictionary.contains(t))
            .collect()
    }

    /// Token pairs across the two snippets whose similarity reaches the threshold.
    pub fn match_count(&self, spec: &str, rrid: &str) -> usize {
        let a = self.candidate_tokens(spec);
        let b = self.candidate_tokens(rrid);
        a.iter()
            .map(|x| b.iter().filter(|y| jaro_winkler(x, y) >= self.threshold).count())
            .sum()
    }

    pub fn score_texts(&self, spec: &str, rrid: &str) -> LinkLabel {
        let count = self.match_count(spec, rrid);
        LinkLabel {
            value: if count >= 1 { Link::Yes } else { Link::No },
            score: (count as f64 / SATURATION).min(1.0),
        }
    }
}

pub fn baseline_link(pair: &CandidatePair, model: &OverlapBaseline) -> LinkLabel {
    model.score_texts(&pair.spec.text, &pair.rrid.text)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model(t: f64) -> OverlapBaseline {
        OverlapBaseline::new(t, Dictionary::bundled())
    }

    #[test]
    fn token_filtering() {
        let toks = model(1.0).candidate_tokens("The 6E10 antibody (RRID:AB_2564652; Cat. 803003), GFAP, -- and");
        let toks: Vec<_> = toks.into_iter().collect();
        assert_eq!(toks, ["6e10", "803003", "gfap"]);
    }

    #[test]
    fn shared_identifier_links() {
        let m = model(1.0);
        let l = m.score_texts(
            "We found the 6E10 antibody nonspecific.",
            "Purified anti-beta-amyloid 1-16 (6E10) antibody (RRID:AB_2564652).",
        );
        assert_eq!(l.value, Link::Yes);
        assert!((l.score - 1.0 / 3.0).abs() < 1e-12);
        let l = m.score_texts("the antibody", "the antibody");
        assert_eq!(l.value, Link::No);
        assert_eq!(l.score, 0.0);
    }
}

//! The end-to-end workflow and the evidence store it feeds.
//!
//! [`run_pipeline`] classifies every specificity snippet of an article, links
//! the non-neutral ones to the article's RRID mentions and returns one
//! [`KbEntry`] per (RRID, article, evidence) key. [`KbStore`] persists entries
//! in a single SQLite file.

mod store;

use std::collections::HashMap;
use std::fmt::Write as _;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::absa::{SpecificityLabel, SpecificityModel};
use crate::corpus::{extract_rrid_mentions, extract_specificity_snippets, Article};
use crate::linking::{LinkLabel, LinkModel};

pub use store::{query_kb, store_entries, KbStore};

/// One statement about one antibody in one article.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KbEntry {
    pub rrid: String,
    pub specificity: SpecificityLabel,
    /// The specificity snippet text.
    pub evidence: String,
    pub article_id: String,
    /// Class probabilities, indexed by [`SpecificityLabel::index`].
    pub specificity_probs: [f64; 3],
    pub link_score: f64,
    pub created_at: DateTime<Utc>,
}

pub fn evidence_hash(evidence: &str) -> String {
    hex::encode(Sha256::digest(evidence.as_bytes()))
}

impl KbEntry {
    /// `(rrid, article_id, sha256(evidence))`.
    pub fn key(&self) -> (String, String, String) {
        (
            self.rrid.clone(),
            self.article_id.clone(),
            evidence_hash(&self.evidence),
        )
    }

    /// A human-readable block for one entry.
    pub fn render_alert(&self) -> String {
        let mut out = String::new();
        let head = match self.specificity {
            SpecificityLabel::Nonspecific => "ALERT",
            _ => "NOTE",
        };
        let _ = writeln!(
            out,
            "{head} RRID:{} reported {} in {}",
            self.rrid, self.specificity, self.article_id
        );
        let _ = writeln!(out, "  evidence: {}", self.evidence);
        let p = self.specificity_probs;
        let _ = writeln!(
            out,
            "  scores: nonspecific {:.3}, neutral {:.3}, specific {:.3}; link {:.3}",
            p[0], p[1], p[2], self.link_score
        );
        let _ = writeln!(out, "  recorded: {}", self.created_at.to_rfc3339());
        out
    }
}

fn prefer(new: SpecificityLabel, old: SpecificityLabel) -> bool {
    new < old
}

/// Runs classification and linking over one article. Snippets or pairs that
/// fail (e.g. too long for the encoder) are logged and skipped.
pub fn run_pipeline(article: &Article, spec_model: &SpecificityModel, link_model: &LinkModel) -> Vec<KbEntry> {
    run_pipeline_at(article, spec_model, link_model, Utc::now())
}

/// [`run_pipeline`] with a fixed timestamp.
pub fn run_pipeline_at(
    article: &Article,
    spec_model: &SpecificityModel,
    link_model: &LinkModel,
    now: DateTime<Utc>,
) -> Vec<KbEntry> {
    let rrids = extract_rrid_mentions(article);
    let mut out: Vec<KbEntry> = Vec::new();
    let mut index: HashMap<(String, String, String), usize> = HashMap::new();
    if rrids.is_empty() {
        return out;
    }
    for snippet in extract_specificity_snippets(article) {
        let mut links: Vec<Option<LinkLabel>> = vec![None; rrids.len()];
        let mut linked = false;
        for span in &snippet.aspect_spans {
            let pred = match spec_model.classify(&snippet.text, *span) {
                Ok(p) => p,
                Err(e) => {
                    log::warn!("{}: skipping aspect at {}..{}: {e}", article.article_id, span.start, span.end);
                    continue;
                }
            };
            if pred.label == SpecificityLabel::Neutral {
                continue;
            }
            if !linked {
                for (slot, mention) in links.iter_mut().zip(&rrids) {
                    match link_model.score_texts(&snippet.text, &mention.text) {
                        Ok(l) => *slot = Some(l),
                        Err(e) => log::warn!("{}: skipping link to {}: {e}", article.article_id, mention.rrid),
                    }
                }
                linked = true;
            }
            for (link, mention) in links.iter().zip(&rrids) {
                let Some(link) = link.filter(|l| l.value.is_yes()) else {
                    continue;
                };
                let entry = KbEntry {
                    rrid: mention.rrid.clone(),
                    specificity: pred.label,
                    evidence: snippet.text.clone(),
                    article_id: article.article_id.clone(),
                    specificity_probs: pred.probs,
                    link_score: link.score,
                    created_at: now,
                };
                match index.get(&entry.key()) {
                    Some(&i) => {
                        if prefer(entry.specificity, out[i].specificity) {
                            out[i] = entry;
                        }
                    }
                    None => {
                        index.insert(entry.key(), out.len());
                        out.push(entry);
                    }
                }
            }
        }
    }
    out
}

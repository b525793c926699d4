//! Snippet extraction: RRID mentions and specificity statements.

use once_cell::sync::Lazy;
use regex::Regex;
use serde::{Deserialize, Serialize};

use super::article::{byte_to_char, Article, Span};
use super::sentence::{split_paragraph, Location, Sentence};

pub static RRID_RE: Lazy<Regex> = Lazy::new(|| Regex::new(r"AB_[0-9]+").unwrap());
pub static ANTIBODY_RE: Lazy<Regex> = Lazy::new(|| Regex::new(r"(A|a)ntibod(y|ies)").unwrap());
static SPECIFIC_RE: Lazy<Regex> = Lazy::new(|| Regex::new(r"(S|s)pecific").unwrap());
static BACKGROUND_RE: Lazy<Regex> =
    Lazy::new(|| Regex::new(r"((B|b)ackground staining)").unwrap());
static CROSS_RE: Lazy<Regex> = Lazy::new(|| Regex::new(r"(C|c)ross( |-)reactiv").unwrap());

/// Sentences on each side of the center sentence.
const WINDOW_RADIUS: usize = 1;

/// The keyword pattern that selected a specificity snippet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Trigger {
    Specific,
    BackgroundStaining,
    CrossReactiv,
}

impl Trigger {
    pub const ALL: [Trigger; 3] = [
        Trigger::Specific,
        Trigger::BackgroundStaining,
        Trigger::CrossReactiv,
    ];

    pub fn regex(self) -> &'static Regex {
        match self {
            Trigger::Specific => &SPECIFIC_RE,
            Trigger::BackgroundStaining => &BACKGROUND_RE,
            Trigger::CrossReactiv => &CROSS_RE,
        }
    }

    /// The pattern whose first match is leftmost in `text`; ties go to the
    /// earlier variant.
    pub fn detect(text: &str) -> Option<Trigger> {
        Trigger::ALL
            .iter()
            .filter_map(|t| t.regex().find(text).map(|m| (m.start(), *t)))
            .min()
            .map(|(_, t)| t)
    }
}

/// Article plus coordinates of the sentence a snippet is centered on.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SnippetSource {
    pub article_id: String,
    pub location: Location,
    pub is_figure_legend: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpecificitySnippet {
    /// Exact paragraph substring from the first to the last window sentence.
    pub text: String,
    pub sentences: Vec<Sentence>,
    pub trigger: Trigger,
    /// Char spans of antibody mentions, relative to `text`.
    pub aspect_spans: Vec<Span>,
    pub source: SnippetSource,
}

impl SpecificitySnippet {
    pub fn aspect_text(&self, span: Span) -> &str {
        span.slice(&self.text)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RridMentionSnippet {
    /// The identifier without its `RRID:` prefix, e.g. `AB_2564652`.
    pub rrid: String,
    pub text: String,
    pub context: Vec<Sentence>,
    /// Char span of `rrid` inside `text`.
    pub rrid_span: Span,
    pub source: SnippetSource,
}

/// A specificity snippet and an RRID mention from the same article.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CandidatePair {
    pub spec: SpecificitySnippet,
    pub rrid: RridMentionSnippet,
    pub same_article: bool,
}

struct SplitParagraph<'a> {
    text: &'a str,
    sentences: Vec<Sentence>,
}

fn split_article(article: &Article) -> Vec<SplitParagraph<'_>> {
    article
        .paragraphs()
        .map(|(at, text)| SplitParagraph {
            text,
            sentences: split_paragraph(text, at),
        })
        .collect()
}

/// Window of sentences around `center`, clipped at the paragraph edges.
fn window(para: &SplitParagraph<'_>, center: usize) -> (Vec<Sentence>, Span) {
    let lo = center.saturating_sub(WINDOW_RADIUS);
    let hi = (center + WINDOW_RADIUS).min(para.sentences.len() - 1);
    let sentences = para.sentences[lo..=hi].to_vec();
    let span = Span::new(
        sentences[0].location.span.start,
        sentences[sentences.len() - 1].location.span.end,
    );
    (sentences, span)
}

fn source(article: &Article, sentence: &Sentence) -> SnippetSource {
    SnippetSource {
        article_id: article.article_id.clone(),
        location: sentence.location,
        is_figure_legend: sentence.is_figure_legend,
    }
}

/// One snippet per `AB_<digits>` occurrence, with the surrounding sentences as context.
pub fn extract_rrid_mentions(article: &Article) -> Vec<RridMentionSnippet> {
    let mut out = Vec::new();
    for para in split_article(article) {
        for (idx, sentence) in para.sentences.iter().enumerate() {
            let matches: Vec<_> = RRID_RE.find_iter(&sentence.text).collect();
            if matches.is_empty() {
                continue;
            }
            let (context, span) = window(&para, idx);
            let text = span.slice(para.text).to_string();
            let sentence_offset = sentence.location.span.start - span.start;
            for m in matches {
                let start = sentence_offset + byte_to_char(&sentence.text, m.start());
                let rrid_span = Span::new(start, start + m.as_str().chars().count());
                out.push(RridMentionSnippet {
                    rrid: m.as_str().to_string(),
                    text: text.clone(),
                    context: context.clone(),
                    rrid_span,
                    source: source(article, sentence),
                });
            }
        }
    }
    out
}

/// Specificity snippets: a trigger sentence with its neighbours, kept only
/// when the window mentions an antibody.
pub fn extract_specificity_snippets(article: &Article) -> Vec<SpecificitySnippet> {
    let mut out = Vec::new();
    for para in split_article(article) {
        for (idx, sentence) in para.sentences.iter().enumerate() {
            let Some(trigger) = Trigger::detect(&sentence.text) else {
                continue;
            };
            let (sentences, span) = window(&para, idx);
            let text = span.slice(para.text).to_string();
            let aspect_spans: Vec<Span> = ANTIBODY_RE
                .find_iter(&text)
                .map(|m| {
                    let start = byte_to_char(&text, m.start());
                    Span::new(start, start + m.as_str().chars().count())
                })
                .collect();
            if aspect_spans.is_empty() {
                continue;
            }
            out.push(SpecificitySnippet {
                text,
                sentences,
                trigger,
                aspect_spans,
                source: source(article, sentence),
            });
        }
    }
    out
}

/// Every specificity snippet paired with every RRID mention of the article.
pub fn build_candidate_pairs(article: &Article) -> Vec<CandidatePair> {
    let specs = extract_specificity_snippets(article);
    let rrids = extract_rrid_mentions(article);
    cross_pairs(&specs, &rrids)
}

pub fn cross_pairs(
    specs: &[SpecificitySnippet],
    rrids: &[RridMentionSnippet],
) -> Vec<CandidatePair> {
    specs
        .iter()
        .flat_map(|s| {
            rrids.iter().map(move |r| CandidatePair {
                same_article: s.source.article_id == r.source.article_id,
                spec: s.clone(),
                rrid: r.clone(),
            })
        })
        .collect()
}

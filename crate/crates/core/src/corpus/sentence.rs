//! Rule-based sentence splitter.
//!
//! A boundary is placed after `.`, `?` or `!` (plus any closing quotes or
//! brackets) when the next non-space character starts an uppercase word or a
//! number. A period that ends a known abbreviation or a single capital
//! initial never ends a sentence.

use serde::{Deserialize, Serialize};

use super::article::{ParagraphRef, Span};

/// Tokens that keep their trailing period without ending a sentence.
pub const ABBREVIATIONS: &[&str] = &[
    "Fig.", "Figs.", "fig.", "figs.", "al.", "Cat.", "cat.", "No.", "Nos.", "no.", "vs.", "i.e.",
    "e.g.", "cf.", "approx.", "ca.", "Dr.", "Eq.", "Ref.", "Refs.", "Suppl.", "Tab.", "Vol.",
];

const CLOSERS: &[char] = &['"', '\'', ')', ']', '\u{201d}', '\u{2019}'];
const OPENERS: &[char] = &['"', '\'', '(', '[', '\u{201c}', '\u{2018}'];

/// Position of a sentence inside an article.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Location {
    pub section: usize,
    pub paragraph: usize,
    pub sentence: usize,
    /// Char span inside the paragraph.
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sentence {
    pub text: String,
    pub location: Location,
    pub is_figure_legend: bool,
}

/// Splits `paragraph` into trimmed, ordered, non-overlapping sentence spans.
pub fn sentence_spans(paragraph: &str) -> Vec<Span> {
    let chars: Vec<char> = paragraph.chars().collect();
    let mut cuts = Vec::new();

    for i in 0..chars.len() {
        let c = chars[i];
        if !matches!(c, '.' | '?' | '!') {
            continue;
        }
        let mut end = i + 1;
        while end < chars.len() && CLOSERS.contains(&chars[end]) {
            end += 1;
        }
        if end >= chars.len() || !chars[end].is_whitespace() {
            continue;
        }
        let mut next = end;
        while next < chars.len() && chars[next].is_whitespace() {
            next += 1;
        }
        if next >= chars.len() || !starts_sentence(&chars[next..]) {
            continue;
        }
        if c == '.' && is_abbreviation(&chars[..=i]) {
            continue;
        }
        cuts.push(end);
    }
    cuts.push(chars.len());

    let mut spans = Vec::with_capacity(cuts.len());
    let mut start = 0;
    for cut in cuts {
        if let Some(span) = trim(&chars, start, cut) {
            spans.push(span);
        }
        start = cut;
    }
    spans
}

/// Splits one paragraph into [`Sentence`]s carrying their article coordinates.
pub fn split_paragraph(paragraph: &str, at: ParagraphRef) -> Vec<Sentence> {
    sentence_spans(paragraph)
        .into_iter()
        .enumerate()
        .map(|(idx, span)| Sentence {
            text: span.slice(paragraph).to_string(),
            location: Location {
                section: at.section,
                paragraph: at.paragraph,
                sentence: idx,
                span,
            },
            is_figure_legend: at.is_figure_legend,
        })
        .collect()
}

/// Splits free text with placeholder coordinates (section 0, paragraph 0).
pub fn split_sentences(paragraph: &str) -> Vec<Sentence> {
    split_paragraph(
        paragraph,
        ParagraphRef {
            section: 0,
            paragraph: 0,
            is_figure_legend: false,
        },
    )
}

fn starts_sentence(rest: &[char]) -> bool {
    let mut idx = 0;
    while idx < rest.len() && OPENERS.contains(&rest[idx]) {
        idx += 1;
    }
    rest.get(idx)
        .is_some_and(|c| c.is_uppercase() || c.is_ascii_digit())
}

fn is_abbreviation(upto_period: &[char]) -> bool {
    let start = upto_period
        .iter()
        .rposition(|c| c.is_whitespace())
        .map_or(0, |p| p + 1);
    let word: String = upto_period[start..]
        .iter()
        .skip_while(|c| OPENERS.contains(c))
        .collect();
    if ABBREVIATIONS.contains(&word.as_str()) {
        return true;
    }
    let mut it = word.chars();
    // single capital initial, e.g. "J."
    matches!((it.next(), it.next(), it.next()), (Some(c), Some('.'), None) if c.is_uppercase())
}

fn trim(chars: &[char], mut start: usize, mut end: usize) -> Option<Span> {
    while start < end && chars[start].is_whitespace() {
        start += 1;
    }
    while end > start && chars[end - 1].is_whitespace() {
        end -= 1;
    }
    (start < end).then(|| Span::new(start, end))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn texts(p: &str) -> Vec<String> {
        split_sentences(p).into_iter().map(|s| s.text).collect()
    }

    #[test]
    fn two_plain_sentences() {
        assert_eq!(texts("It works. It fails."), vec!["It works.", "It fails."]);
    }

    #[test]
    fn catalog_abbreviations_do_not_split() {
        let p = "Cat. No. 803003; RRID:AB_2564652) was obtained from X.";
        assert_eq!(texts(p), vec![p]);
    }

    #[test]
    fn empty_and_blank() {
        assert!(split_sentences("").is_empty());
        assert!(split_sentences("   \n ").is_empty());
    }

    #[test]
    fn initials_and_et_al() {
        let p = "As shown by J. Smith et al. The result holds. See Fig. 2 for details.";
        assert_eq!(
            texts(p),
            vec!["As shown by J. Smith et al. The result holds.", "See Fig. 2 for details."]
        );
    }

    #[test]
    fn lowercase_continuation_and_decimals() {
        assert_eq!(texts("Values were 4.5 mM. e.g. this stays."), vec!["Values were 4.5 mM. e.g. this stays."]);
        assert_eq!(texts("Was it? Yes! Done."), vec!["Was it?", "Yes!", "Done."]);
    }

    #[test]
    fn closing_quote_and_bracket() {
        assert_eq!(
            texts("They were \"non-specific\". We tested (see above.) Then stopped."),
            vec!["They were \"non-specific\".", "We tested (see above.)", "Then stopped."]
        );
    }

    #[test]
    fn spans_map_back_to_source() {
        let p = "  Alpha beta.  Gamma (delta). 12 samples were used.  ";
        let sents = split_sentences(p);
        assert_eq!(sents.len(), 3);
        let mut last_end = 0;
        for s in &sents {
            assert_eq!(s.location.span.slice(p), s.text);
            assert!(s.location.span.start >= last_end);
            last_end = s.location.span.end;
        }
    }
}

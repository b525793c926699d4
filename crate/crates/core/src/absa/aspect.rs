//! Choosing the aspect text for an antibody mention.

use serde::{Deserialize, Serialize};

use crate::corpus::Span;

/// How much of the surrounding text becomes the aspect.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AspectMode {
    /// Only the matched word, e.g. `antibody`.
    Word,
    /// The match plus up to [`MAX_PHRASE_WORDS`] preceding words of the same
    /// clause, e.g. `the 6E10 antibody`.
    #[default]
    Phrase,
}

pub const MAX_PHRASE_WORDS: usize = 2;

const CLAUSE_END: &[char] = &['.', ',', ';', ':', '!', '?'];

/// Widens `span` (char offsets into `text`) according to `mode`.
///
/// Expansion walks back over whitespace-separated words and stops before a
/// word that ends a clause or has no letters or digits.
pub fn expand_aspect(text: &str, span: Span, mode: AspectMode) -> Span {
    if mode == AspectMode::Word {
        return span;
    }
    let chars: Vec<char> = text.chars().collect();
    let mut start = span.start;
    for _ in 0..MAX_PHRASE_WORDS {
        let mut j = start;
        while j > 0 && chars[j - 1].is_whitespace() {
            j -= 1;
        }
        if j == start || j == 0 {
            break;
        }
        let word_end = j;
        while j > 0 && !chars[j - 1].is_whitespace() {
            j -= 1;
        }
        let word = &chars[j..word_end];
        let ends_clause = CLAUSE_END.contains(&word[word.len() - 1]);
        if ends_clause || !word.iter().any(|c| c.is_alphanumeric()) {
            break;
        }
        start = j;
    }
    Span::new(start, span.end)
}

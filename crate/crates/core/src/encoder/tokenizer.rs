use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const UNK: usize = 0;
pub const CLS: usize = 1;
pub const SEP: usize = 2;
const SPECIALS: [&str; 3] = ["[UNK]", "[CLS]", "[SEP]"];

/// Tokens of one text with the spacing needed to rebuild it.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenSequence {
    pub ids: Vec<usize>,
    pub texts: Vec<String>,
    /// Whether whitespace preceded the token in the source.
    pub space_before: Vec<bool>,
}

impl TokenSequence {
    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn truncate(&mut self, len: usize) {
        self.ids.truncate(len);
        self.texts.truncate(len);
        self.space_before.truncate(len);
    }

    /// Rebuilds the text with every whitespace run collapsed to one space.
    pub fn detokenize(&self) -> String {
        let mut out = String::new();
        for (i, t) in self.texts.iter().enumerate() {
            if i > 0 && self.space_before[i] {
                out.push(' ');
            }
            out.push_str(t);
        }
        out
    }
}

fn is_edge_punct(c: char) -> bool {
    c.is_ascii_punctuation() || matches!(c, '\u{201c}' | '\u{201d}' | '\u{2018}' | '\u{2019}')
}

/// Whitespace tokens with leading and trailing punctuation split off, one
/// token per punctuation character. Inner punctuation ("APP/PS1", "6E-10",
/// "RRID:AB_1") stays attached.
pub fn surface_tokens(text: &str) -> Vec<(String, bool)> {
    let mut out = Vec::new();
    let mut space = false;
    for word in text.split_inclusive(char::is_whitespace) {
        let trimmed = word.trim_end_matches(char::is_whitespace);
        if trimmed.is_empty() {
            space = true;
            continue;
        }
        let chars: Vec<char> = trimmed.chars().collect();
        let mut lo = 0;
        let mut hi = chars.len();
        while lo < hi && is_edge_punct(chars[lo]) {
            lo += 1;
        }
        while hi > lo && is_edge_punct(chars[hi - 1]) {
            hi -= 1;
        }
        let mut first = true;
        let mut emit = |s: String, out: &mut Vec<(String, bool)>| {
            out.push((s, first && space));
            first = false;
        };
        for c in &chars[..lo] {
            emit(c.to_string(), &mut out);
        }
        if lo < hi {
            emit(chars[lo..hi].iter().collect(), &mut out);
        }
        for c in &chars[hi..] {
            emit(c.to_string(), &mut out);
        }
        space = word.len() != trimmed.len();
    }
    out
}

/// Lowercased word-level vocabulary with `[UNK]`, `[CLS]` and `[SEP]` at ids 0, 1, 2.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "Vec<String>", into = "Vec<String>")]
pub struct Vocab {
    tokens: Vec<String>,
    index: HashMap<String, usize>,
}

impl From<Vec<String>> for Vocab {
    fn from(tokens: Vec<String>) -> Self {
        let mut v = Vocab {
            tokens,
            index: HashMap::new(),
        };
        v.reindex();
        v
    }
}

impl From<Vocab> for Vec<String> {
    fn from(v: Vocab) -> Self {
        v.tokens
    }
}

impl Vocab {
    pub fn from_tokens(words: impl IntoIterator<Item = String>) -> Self {
        let mut tokens: Vec<String> = SPECIALS.iter().map(|s| s.to_string()).collect();
        let mut seen: std::collections::HashSet<String> = tokens.iter().cloned().collect();
        for w in words {
            let w = w.to_lowercase();
            if seen.insert(w.clone()) {
                tokens.push(w);
            }
        }
        Vocab::from(tokens)
    }

    /// Keeps words seen at least `min_count` times, most frequent first,
    /// ties broken alphabetically, capped at `max_size` entries overall.
    pub fn build<'a>(texts: impl IntoIterator<Item = &'a str>, min_count: usize, max_size: usize) -> Self {
        let mut counts: HashMap<String, usize> = HashMap::new();
        for text in texts {
            for (tok, _) in surface_tokens(text) {
                *counts.entry(tok.to_lowercase()).or_default() += 1;
            }
        }
        let mut ranked: Vec<_> = counts.into_iter().filter(|(_, c)| *c >= min_count).collect();
        ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        ranked.truncate(max_size.saturating_sub(SPECIALS.len()));
        Vocab::from_tokens(ranked.into_iter().map(|(w, _)| w))
    }

    fn reindex(&mut self) {
        self.index = self
            .tokens
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn id(&self, token: &str) -> usize {
        self.index.get(&token.to_lowercase()).copied().unwrap_or(UNK)
    }

    pub fn token(&self, id: usize) -> Option<&str> {
        self.tokens.get(id).map(String::as_str)
    }

    pub fn tokenize(&self, text: &str) -> Result<TokenSequence> {
        if text.trim().is_empty() {
            return Err(Error::InvalidInput("cannot tokenize empty text".into()));
        }
        let mut seq = TokenSequence {
            ids: Vec::new(),
            texts: Vec::new(),
            space_before: Vec::new(),
        };
        for (tok, space) in surface_tokens(text) {
            seq.ids.push(self.id(&tok));
            seq.texts.push(tok);
            seq.space_before.push(space);
        }
        Ok(seq)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn whitespace_tokens() {
        let v = Vocab::from_tokens(["antibody".to_string()]);
        let seq = v.tokenize("6E10 antibody").unwrap();
        assert_eq!(seq.texts, ["6E10", "antibody"]);
        assert_eq!(seq.ids, [UNK, 3]);
        assert!(v.tokenize("").is_err());
        assert!(v.tokenize("  ").is_err());
    }

    #[test]
    fn punctuation_split_at_edges_only() {
        let toks: Vec<_> = surface_tokens("(6E10) (Cat. No. 803003; RRID:AB_2564652) APP/PS1.")
            .into_iter()
            .map(|t| t.0)
            .collect();
        assert_eq!(
            toks,
            ["(", "6E10", ")", "(", "Cat", ".", "No", ".", "803003", ";", "RRID:AB_2564652", ")", "APP/PS1", "."]
        );
    }

    #[test]
    fn vocab_is_lowercased_and_ranked() {
        let v = Vocab::build(["The antibody the ANTIBODY band", "band"], 2, 100);
        assert_eq!(v.len(), 6);
        assert_eq!(v.id("Antibody"), v.id("antibody"));
        assert_ne!(v.id("band"), UNK);
        assert_eq!(v.token(CLS), Some("[CLS]"));
        let capped = Vocab::build(["a a a b b c"], 1, 5);
        assert_eq!(capped.len(), 5);
        assert_eq!(capped.id("c"), UNK);
    }

    fn normalize_ws(s: &str) -> String {
        s.split_whitespace().collect::<Vec<_>>().join(" ")
    }

    proptest! {
        #[test]
        fn detokenize_roundtrip(text in "[ a-zA-Z0-9().,;:/_\\-]{1,60}") {
            prop_assume!(!text.trim().is_empty());
            let v = Vocab::from_tokens(Vec::<String>::new());
            let seq = v.tokenize(&text).unwrap();
            prop_assert_eq!(seq.detokenize(), normalize_ws(&text));
        }
    }

    #[test]
    fn roundtrip_on_fixture_sentences() {
        let v = Vocab::from_tokens(Vec::<String>::new());
        for s in [
            "Some non-specific bands were detected at ~55 kDa in both WT and APP/PS1 mice with the 6E10 antibody.",
            "Purified anti-\u{3b2}-Amyloid, 1-16 antibody (6E10) (Cat. No. 803003; RRID:AB_2564652) was obtained from BioLegend.",
            "five out of six commonly used anti-Panx1 antibodies were \"non-specific\".",
        ] {
            assert_eq!(v.tokenize(s).unwrap().detokenize(), s);
        }
    }
}

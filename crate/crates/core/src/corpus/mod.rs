//! Articles, sentences and the two snippet types mined from them.

mod article;
mod extract;
mod sentence;

pub use article::{parse_article, parse_articles, Article, ParagraphRef, Section, Span};
pub use extract::{
    build_candidate_pairs, cross_pairs, extract_rrid_mentions, extract_specificity_snippets,
    CandidatePair, RridMentionSnippet, SnippetSource, SpecificitySnippet, Trigger, ANTIBODY_RE,
    RRID_RE,
};
pub use sentence::{sentence_spans, split_paragraph, split_sentences, Location, Sentence, ABBREVIATIONS};

/// True when `s` is exactly an antibody RRID (`AB_` followed by digits).
pub fn is_antibody_rrid(s: &str) -> bool {
    RRID_RE.find(s).is_some_and(|m| m.start() == 0 && m.end() == s.len())
}

/// Accepts `AB_123` or `RRID:AB_123` and returns the bare identifier.
pub fn normalize_rrid(s: &str) -> Option<&str> {
    let bare = s.trim();
    let bare = bare.strip_prefix("RRID:").unwrap_or(bare);
    is_antibody_rrid(bare).then_some(bare)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rrid_normalization() {
        assert_eq!(normalize_rrid("RRID:AB_2564652"), Some("AB_2564652"));
        assert_eq!(normalize_rrid("AB_1"), Some("AB_1"));
        assert_eq!(normalize_rrid("AB_"), None);
        assert_eq!(normalize_rrid("AB_12x"), None);
        assert_eq!(normalize_rrid("SCR_018008"), None);
    }
}

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A half-open range of Unicode scalar offsets, `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        debug_assert!(start <= end);
        Span { start, end }
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }

    pub fn contains(&self, other: &Span) -> bool {
        self.start <= other.start && other.end <= self.end
    }

    pub fn shift(&self, by: usize) -> Span {
        Span::new(self.start + by, self.end + by)
    }

    /// Substring of `text` covered by this span. Panics when out of range.
    pub fn slice<'a>(&self, text: &'a str) -> &'a str {
        let from = char_to_byte(text, self.start);
        let to = char_to_byte(text, self.end);
        &text[from..to]
    }
}

/// Byte offset of the `idx`-th char of `text`; `text.len()` for one past the end.
pub(crate) fn char_to_byte(text: &str, idx: usize) -> usize {
    text.char_indices()
        .nth(idx)
        .map(|(b, _)| b)
        .unwrap_or_else(|| {
            assert!(idx == text.chars().count(), "char offset {idx} out of range");
            text.len()
        })
}

/// Char offset of byte offset `byte` (which must lie on a char boundary).
pub(crate) fn byte_to_char(text: &str, byte: usize) -> usize {
    text[..byte].chars().count()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Section {
    pub title: String,
    pub paragraphs: Vec<String>,
}

/// A full-text article split into titled sections of paragraphs plus figure legends.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Article {
    pub article_id: String,
    pub sections: Vec<Section>,
    #[serde(default)]
    pub figure_legends: Vec<String>,
}

/// Coordinates of one paragraph. Figure legends are addressed as extra
/// single-paragraph sections numbered after the body sections.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ParagraphRef {
    pub section: usize,
    pub paragraph: usize,
    pub is_figure_legend: bool,
}

impl Article {
    /// Every paragraph in document order, body sections first and then legends.
    pub fn paragraphs(&self) -> impl Iterator<Item = (ParagraphRef, &str)> + '_ {
        let body = self.sections.iter().enumerate().flat_map(|(s, sec)| {
            sec.paragraphs.iter().enumerate().map(move |(p, text)| {
                (
                    ParagraphRef {
                        section: s,
                        paragraph: p,
                        is_figure_legend: false,
                    },
                    text.as_str(),
                )
            })
        });
        let offset = self.sections.len();
        let legends = self.figure_legends.iter().enumerate().map(move |(i, text)| {
            (
                ParagraphRef {
                    section: offset + i,
                    paragraph: 0,
                    is_figure_legend: true,
                },
                text.as_str(),
            )
        });
        body.chain(legends)
    }

    pub fn paragraph(&self, at: ParagraphRef) -> Option<&str> {
        if at.is_figure_legend {
            let idx = at.section.checked_sub(self.sections.len())?;
            if at.paragraph != 0 {
                return None;
            }
            self.figure_legends.get(idx).map(String::as_str)
        } else {
            self.sections
                .get(at.section)?
                .paragraphs
                .get(at.paragraph)
                .map(String::as_str)
        }
    }

    fn validate(&self) -> Result<()> {
        if self.article_id.trim().is_empty() {
            return Err(Error::Parse("article_id: must be non-empty".into()));
        }
        if self.sections.is_empty() {
            return Err(Error::Parse("sections: no sections".into()));
        }
        Ok(())
    }
}

/// Parses one article from its JSON representation.
///
/// ```json
/// {"article_id": "PMC6120938", "sections": [{"title": "Results", "paragraphs": ["..."]}], "figure_legends": []}
/// ```
pub fn parse_article(raw: &str) -> Result<Article> {
    let article: Article =
        serde_json::from_str(raw).map_err(|e| Error::Parse(e.to_string()))?;
    article.validate()?;
    Ok(article)
}

/// Parses a file holding either a single JSON article or one article per line.
pub fn parse_articles(raw: &str) -> Result<Vec<Article>> {
    let trimmed = raw.trim();
    if trimmed.is_empty() {
        return Ok(Vec::new());
    }
    if let Ok(one) = parse_article(trimmed) {
        return Ok(vec![one]);
    }
    trimmed
        .lines()
        .enumerate()
        .filter(|(_, line)| !line.trim().is_empty())
        .map(|(no, line)| {
            parse_article(line).map_err(|e| Error::Parse(format!("line {}: {e}", no + 1)))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_sections_preserved() {
        let raw = r#"{"article_id":"PMC1","sections":[
            {"title":"Methods","paragraphs":["A.","B."]},
            {"title":"Results","paragraphs":["C."]}],"figure_legends":["Fig 1."]}"#;
        let a = parse_article(raw).unwrap();
        assert_eq!(a.article_id, "PMC1");
        assert_eq!(a.sections.len(), 2);
        assert_eq!(a.sections[0].title, "Methods");
        let paras: Vec<_> = a.paragraphs().collect();
        assert_eq!(paras.len(), 4);
        assert_eq!(paras[3].0.section, 2);
        assert!(paras[3].0.is_figure_legend);
        for (at, text) in paras {
            assert_eq!(a.paragraph(at), Some(text));
        }
    }

    #[test]
    fn empty_sections_rejected() {
        let err = parse_article(r#"{"article_id":"x","sections":[]}"#).unwrap_err();
        assert!(err.to_string().contains("no sections"), "{err}");
    }

    #[test]
    fn missing_field_is_named() {
        let err = parse_article(r#"{"sections":[{"title":"t","paragraphs":[]}]}"#).unwrap_err();
        assert!(err.to_string().contains("article_id"), "{err}");
        let err = parse_article(r#"{"article_id":"a","sections":[{"title":"t"}]}"#).unwrap_err();
        assert!(err.to_string().contains("paragraphs"), "{err}");
    }

    #[test]
    fn blank_id_rejected() {
        let err = parse_article(r#"{"article_id":" ","sections":[{"title":"t","paragraphs":[]}]}"#)
            .unwrap_err();
        assert!(err.to_string().contains("article_id"));
    }

    #[test]
    fn jsonl_input() {
        let raw = "{\"article_id\":\"a\",\"sections\":[{\"title\":\"t\",\"paragraphs\":[\"x\"]}]}\n\n\
                   {\"article_id\":\"b\",\"sections\":[{\"title\":\"t\",\"paragraphs\":[\"y\"]}]}\n";
        let all = parse_articles(raw).unwrap();
        assert_eq!(all.len(), 2);
        assert_eq!(all[1].article_id, "b");
        assert!(parse_articles("  ").unwrap().is_empty());
    }

    #[test]
    fn span_slicing_is_char_based() {
        let text = "anti-β-Amyloid antibody";
        let span = Span::new(5, 14);
        assert_eq!(span.slice(text), "β-Amyloid");
        assert_eq!(byte_to_char(text, char_to_byte(text, 7)), 7);
    }
}

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;

static BUNDLED: &str = include_str!("../../data/english_words.txt");

/// Lowercase common-English words that cannot identify an antibody.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "Vec<String>", into = "Vec<String>")]
pub struct Dictionary {
    words: BTreeSet<String>,
}

impl From<Vec<String>> for Dictionary {
    fn from(words: Vec<String>) -> Self {
        Dictionary::from_words(words)
    }
}

impl From<Dictionary> for Vec<String> {
    fn from(d: Dictionary) -> Self {
        d.words.into_iter().collect()
    }
}

impl Default for Dictionary {
    fn default() -> Self {
        Dictionary::bundled()
    }
}

impl Dictionary {
    /// About ten thousand frequent English words plus common lab vocabulary.
    pub fn bundled() -> Self {
        Dictionary::parse(BUNDLED)
    }

    pub fn from_words<S: AsRef<str>>(words: impl IntoIterator<Item = S>) -> Self {
        Dictionary {
            words: words
                .into_iter()
                .map(|w| w.as_ref().trim().to_lowercase())
                .filter(|w| !w.is_empty())
                .collect(),
        }
    }

    /// One word per line; blank lines are skipped.
    pub fn parse(raw: &str) -> Self {
        Dictionary::from_words(raw.lines())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Ok(Dictionary::parse(&std::fs::read_to_string(path)?))
    }

    pub fn contains(&self, word: &str) -> bool {
        self.words.contains(&word.to_lowercase())
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

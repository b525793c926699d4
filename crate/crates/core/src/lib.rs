//! Mining antibody specificity statements from full-text articles.
//!
//! The crate is organised around the two snippet types that the pipeline
//! extracts from each article:
//!
//! - *specificity snippets*: up to three sentences around a sentence that
//!   talks about specificity, background staining or cross-reactivity and
//!   mentions an antibody;
//! - *RRID mention snippets*: the context of every `AB_<digits>` identifier.
//!
//! Specificity snippets are classified as [`SpecificityLabel::Nonspecific`],
//! [`SpecificityLabel::Neutral`] or [`SpecificityLabel::Specific`] by an
//! attention-over-attention head on top of a small transformer encoder
//! ([`absa`]). Each classified snippet is then paired with every RRID mention
//! of the same article and a linking model ([`linking`]) decides which
//! antibody the statement is about. Linked, non-neutral statements become
//! [`kb::KbEntry`] triples persisted in an embedded store.
//!
//! ```no_run
//! use abspec::corpus::{parse_article, extract_specificity_snippets, extract_rrid_mentions};
//!
//! # fn main() -> abspec::Result<()> {
//! let raw = std::fs::read_to_string("article.json")?;
//! let article = parse_article(&raw)?;
//! for snippet in extract_specificity_snippets(&article) {
//!     println!("{:?}: {}", snippet.trigger, snippet.text);
//! }
//! for mention in extract_rrid_mentions(&article) {
//!     println!("{}", mention.rrid);
//! }
//! # Ok(())
//! # }
//! ```

pub mod absa;
pub mod archive;
pub mod config;
pub mod corpus;
pub mod encoder;
pub mod error;
pub mod eval;
pub mod kb;
pub mod linking;
pub mod nn;
pub mod train;

pub use absa::SpecificityLabel;
pub use error::{Error, Result};

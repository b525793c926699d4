//! Contextual token representations for `[CLS] s [SEP] t` inputs.
//!
//! Everything downstream of the encoder sees only an [`EncoderOutput`]: the
//! hidden matrix `H` with `n + m + 2` rows, where row 0 is the `[CLS]`
//! vector, rows `1..=n` the snippet tokens, row `n + 1` the `[SEP]` marker
//! and rows `n + 2..n + m + 2` the aspect tokens. Any type implementing
//! [`Encoder`] can stand in for the bundled [`MiniEncoder`].

mod mini;
mod tokenizer;

use ndarray::{s, Array1, Array2, ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use mini::{MiniEncoder, MiniEncoderConfig};
pub use tokenizer::{surface_tokens, TokenSequence, Vocab, CLS, SEP, UNK};

/// Token ids laid out as `[CLS] s [SEP] t`, after truncation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncoderInput {
    pub ids: Vec<usize>,
    /// 0 for `[CLS]`, snippet and `[SEP]`; 1 for the aspect / second segment.
    pub segments: Vec<usize>,
    pub n: usize,
    pub m: usize,
    pub truncated: bool,
}

impl EncoderInput {
    /// Lays out the two id sequences, cutting the snippet tail when the total
    /// exceeds `max_len`. The aspect is never cut.
    pub fn new(snippet: &[usize], aspect: &[usize], max_len: usize) -> Result<Self> {
        if snippet.is_empty() {
            return Err(Error::InvalidInput("snippet has no tokens".into()));
        }
        let m = aspect.len();
        if m + 3 > max_len {
            return Err(Error::TooLong {
                len: snippet.len() + m + 2,
                max_len,
                reason: "aspect leaves no room for the snippet",
            });
        }
        let n = snippet.len().min(max_len - m - 2);
        let mut ids = Vec::with_capacity(n + m + 2);
        ids.push(CLS);
        ids.extend_from_slice(&snippet[..n]);
        ids.push(SEP);
        ids.extend_from_slice(aspect);
        let mut segments = vec![0; n + 2];
        segments.extend(std::iter::repeat(1).take(m));
        Ok(EncoderInput {
            ids,
            segments,
            n,
            m,
            truncated: n < snippet.len(),
        })
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }
}

/// Final-layer hidden states for one input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncoderOutput {
    pub hidden: Array2<f64>,
    pub n: usize,
    pub m: usize,
    /// Set when the snippet tail was dropped to fit the encoder.
    pub truncated: bool,
}

impl EncoderOutput {
    pub fn new(hidden: Array2<f64>, n: usize, m: usize, truncated: bool) -> Result<Self> {
        if hidden.nrows() != n + m + 2 {
            return Err(Error::Shape(format!(
                "encoder returned {} rows, expected n + m + 2 = {}",
                hidden.nrows(),
                n + m + 2
            )));
        }
        if !hidden.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("encoder output"));
        }
        Ok(EncoderOutput {
            hidden,
            n,
            m,
            truncated,
        })
    }

    pub fn dim(&self) -> usize {
        self.hidden.ncols()
    }

    pub fn h0(&self) -> ArrayView1<'_, f64> {
        self.hidden.row(0)
    }

    /// Snippet rows `1..=n`.
    pub fn snippet(&self) -> ArrayView2<'_, f64> {
        self.hidden.slice(s![1..self.n + 1, ..])
    }

    pub fn sep(&self) -> ArrayView1<'_, f64> {
        self.hidden.row(self.n + 1)
    }

    /// Aspect rows `n + 2..n + m + 2`.
    pub fn aspect(&self) -> ArrayView2<'_, f64> {
        self.hidden.slice(s![self.n + 2..self.n + self.m + 2, ..])
    }
}

/// Splits an output into the `[CLS]` vector, the snippet rows and the aspect rows.
pub fn slice_outputs(out: &EncoderOutput) -> (Array1<f64>, Array2<f64>, Array2<f64>) {
    (
        out.h0().to_owned(),
        out.snippet().to_owned(),
        out.aspect().to_owned(),
    )
}

/// A backend mapping (snippet tokens, aspect tokens) to hidden states.
///
/// Implementors supply tokenization and [`Encoder::encode_ids`]; the default
/// [`Encoder::encode`] applies the shared truncation policy and validates the
/// returned matrix. Pretrained encoders plug in here through an adapter that
/// accepts two token-id arrays and returns an `(n + m + 2) × d` matrix.
pub trait Encoder: Send + Sync {
    fn dim(&self) -> usize;

    fn max_len(&self) -> usize;

    fn tokenize(&self, text: &str) -> Result<TokenSequence>;

    /// Hidden states for `[CLS] snippet [SEP] aspect`; both slices are already
    /// within `max_len` together.
    fn encode_ids(&self, snippet: &[usize], aspect: &[usize]) -> Result<Array2<f64>>;

    fn encode(&self, snippet: &TokenSequence, aspect: &TokenSequence) -> Result<EncoderOutput> {
        let input = EncoderInput::new(&snippet.ids, &aspect.ids, self.max_len())?;
        let hidden = self.encode_ids(&input.ids[1..=input.n], &aspect.ids)?;
        if hidden.ncols() != self.dim() {
            return Err(Error::Shape(format!(
                "encoder returned width {}, expected {}",
                hidden.ncols(),
                self.dim()
            )));
        }
        EncoderOutput::new(hidden, input.n, input.m, input.truncated)
    }
}

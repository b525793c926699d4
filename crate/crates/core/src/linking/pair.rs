//! Sentence-pair classifier over `[CLS] spec [SEP] rrid`.

use serde::{Deserialize, Serialize};

use super::{Link, LinkLabel};
use crate::config::TrainConfig;
use crate::encoder::{Encoder, EncoderInput, MiniEncoder};
use crate::error::{Error, Result};
use crate::nn::{softmax_in_place, Linear, ParamStore, Tape, Var};

/// Output index of the "yes" logit.
pub const YES: usize = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairClassifier {
    pub encoder: MiniEncoder,
    pub store: ParamStore,
    pub linear: Linear,
    pub threshold: f64,
    pub l2_weight: f64,
    pub freeze_encoder: bool,
}

/// Lengths `(n, m)` that fit `n + m + 2 <= max_len`: the first segment's
/// tail goes first, but it keeps at least half the budget when the second
/// segment alone would overflow.
pub fn fit_pair_lengths(n: usize, m: usize, max_len: usize) -> (usize, usize) {
    let budget = max_len.saturating_sub(2);
    if n + m <= budget {
        return (n, m);
    }
    let n_keep = n.min(budget.saturating_sub(m).max(budget / 2));
    (n_keep, m.min(budget - n_keep))
}

impl PairClassifier {
    pub const PARAM_GROUP: u16 = 2;

    pub fn new(encoder: MiniEncoder, config: &TrainConfig) -> Self {
        let mut store = ParamStore::new(Self::PARAM_GROUP);
        let linear = Linear::new(&mut store, "pair_head", encoder.config.d_model, 2, None);
        PairClassifier {
            encoder,
            store,
            linear,
            threshold: config.link_threshold(),
            l2_weight: config.l2_weight,
            freeze_encoder: config.freeze_encoder,
        }
    }

    pub fn input(&self, spec: &str, rrid: &str) -> Result<EncoderInput> {
        let a = self.encoder.tokenize(spec)?.ids;
        let b = self.encoder.tokenize(rrid)?.ids;
        let (n, m) = fit_pair_lengths(a.len(), b.len(), self.encoder.config.max_len);
        let mut input = EncoderInput::new(&a[..n], &b[..m], self.encoder.config.max_len)?;
        input.truncated = n < a.len() || m < b.len();
        Ok(input)
    }

    /// 1 × 2 logits from the `[CLS]` row of `hidden`.
    pub fn head_logits(&self, tape: &mut Tape, hidden: Var) -> Result<Var> {
        if tape.value(hidden).ncols() != self.encoder.config.d_model {
            return Err(Error::Shape("pair head width mismatch".into()));
        }
        let h0 = tape.slice_rows(hidden, 0, 1);
        Ok(self.linear.forward(&self.store, tape, h0))
    }

    pub(crate) fn logits_on(&self, tape: &mut Tape, input: &EncoderInput) -> Result<Var> {
        let hidden = if self.freeze_encoder {
            tape.leaf(self.encoder.hidden(input)?)
        } else {
            self.encoder.forward(tape, input)?
        };
        self.head_logits(tape, hidden)
    }

    /// Probability of "yes" and whether the input had to be cut.
    pub fn probability(&self, spec: &str, rrid: &str) -> Result<(f64, bool)> {
        let input = self.input(spec, rrid)?;
        let mut tape = Tape::new();
        let logits = self.logits_on(&mut tape, &input)?;
        let mut p = tape.value(logits).row(0).to_vec();
        if !p.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("pair logits"));
        }
        softmax_in_place(&mut p);
        Ok((p[YES], input.truncated))
    }

    pub fn score_texts(&self, spec: &str, rrid: &str) -> Result<LinkLabel> {
        let (score, truncated) = self.probability(spec, rrid)?;
        if truncated {
            log::debug!("pair input truncated to {} tokens", self.encoder.config.max_len);
        }
        Ok(LinkLabel {
            value: if score >= self.threshold { Link::Yes } else { Link::No },
            score,
        })
    }

    pub(crate) fn penalty_on(&self, tape: &mut Tape) -> Option<Var> {
        (self.l2_weight > 0.0).then(|| {
            let w = self.store.on(tape, self.linear.weight);
            let sq = tape.sum_squares(w);
            tape.scale(sq, self.l2_weight)
        })
    }
}

impl crate::train::Objective for PairClassifier {
    type Example = (EncoderInput, bool);

    fn example_loss(&self, tape: &mut Tape, (input, yes): &Self::Example, weight: f64) -> Result<Var> {
        let logits = self.logits_on(tape, input)?;
        Ok(tape.softmax_cross_entropy(logits, usize::from(*yes), weight))
    }

    fn penalty(&self, tape: &mut Tape) -> Option<Var> {
        self.penalty_on(tape)
    }

    fn stores_mut(&mut self) -> Vec<&mut ParamStore> {
        if self.freeze_encoder {
            vec![&mut self.store]
        } else {
            vec![&mut self.encoder.store, &mut self.store]
        }
    }
}

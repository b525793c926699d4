//! Siamese BiLSTM similarity: one recurrent tower encodes both snippets and
//! the score is `exp(-distance)` between the two encodings.

use ndarray::Array2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Link, LinkLabel};
use crate::config::TrainConfig;
use crate::encoder::Vocab;
use crate::error::{Error, Result};
use crate::nn::{glorot, uniform, ParamKey, ParamStore, Tape, Var};

/// Floor inside `ln(1 - s)` so identical negatives keep a finite loss.
const LOG_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Distance {
    Manhattan,
    Euclidean,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
struct LstmCell {
    input: ParamKey,
    recurrent: ParamKey,
    bias: ParamKey,
}

impl LstmCell {
    fn new(store: &mut ParamStore, rng: &mut ChaCha8Rng, name: &str, e: usize, h: usize) -> Self {
        let mut bias = Array2::zeros((1, 4 * h));
        // forget gate starts open
        bias.slice_mut(ndarray::s![.., h..2 * h]).fill(1.0);
        LstmCell {
            input: store.add(format!("{name}.input"), glorot(rng, e, 4 * h)),
            recurrent: store.add(format!("{name}.recurrent"), glorot(rng, h, 4 * h)),
            bias: store.add(format!("{name}.bias"), bias),
        }
    }

    /// Final hidden state after reading `x` (T × e) in the given row order.
    fn run(&self, store: &ParamStore, tape: &mut Tape, x: Var, order: impl Iterator<Item = usize>) -> Var {
        let h_dim = store.get(self.recurrent).nrows();
        let w = store.on(tape, self.input);
        let u = store.on(tape, self.recurrent);
        let b = store.on(tape, self.bias);
        let xw = tape.matmul(x, w);
        let mut h = tape.leaf(Array2::zeros((1, h_dim)));
        let mut c = tape.leaf(Array2::zeros((1, h_dim)));
        for t in order {
            let xt = tape.slice_rows(xw, t, t + 1);
            let hu = tape.matmul(h, u);
            let z = tape.add(xt, hu);
            let z = tape.add_row(z, b);
            let zi = tape.slice_cols(z, 0, h_dim);
            let zf = tape.slice_cols(z, h_dim, 2 * h_dim);
            let zg = tape.slice_cols(z, 2 * h_dim, 3 * h_dim);
            let zo = tape.slice_cols(z, 3 * h_dim, 4 * h_dim);
            let i = tape.sigmoid(zi);
            let f = tape.sigmoid(zf);
            let g = tape.tanh(zg);
            let o = tape.sigmoid(zo);
            let fc = tape.mul(f, c);
            let ig = tape.mul(i, g);
            c = tape.add(fc, ig);
            let tc = tape.tanh(c);
            h = tape.mul(o, tc);
        }
        h
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SiameseModel {
    pub vocab: Vocab,
    pub store: ParamStore,
    embedding: ParamKey,
    forward: LstmCell,
    backward: LstmCell,
    pub distance: Distance,
    pub threshold: f64,
    pub max_len: usize,
    pub l2_weight: f64,
}

impl SiameseModel {
    pub const PARAM_GROUP: u16 = 3;

    pub fn new(vocab: Vocab, config: &TrainConfig) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let (e, h) = (config.siamese_embedding, config.lstm_hidden);
        let mut store = ParamStore::new(Self::PARAM_GROUP);
        let embedding = store.add("embedding", uniform(&mut rng, vocab.len(), e, 0.1));
        let forward = LstmCell::new(&mut store, &mut rng, "lstm.forward", e, h);
        let backward = LstmCell::new(&mut store, &mut rng, "lstm.backward", e, h);
        SiameseModel {
            vocab,
            store,
            embedding,
            forward,
            backward,
            distance: config.distance,
            threshold: config.link_threshold(),
            max_len: config.max_len,
            l2_weight: config.l2_weight,
        }
    }

    pub fn ids(&self, text: &str) -> Result<Vec<usize>> {
        let mut ids = self.vocab.tokenize(text)?.ids;
        ids.truncate(self.max_len);
        Ok(ids)
    }

    /// `[h_fwd; h_bwd]`, the last state of each direction (1 × 2h).
    pub fn tower(&self, tape: &mut Tape, ids: &[usize]) -> Result<Var> {
        if ids.is_empty() {
            return Err(Error::InvalidInput("empty token sequence".into()));
        }
        if let Some(&bad) = ids.iter().find(|&&id| id >= self.vocab.len()) {
            return Err(Error::InvalidInput(format!("token id {bad} outside vocabulary")));
        }
        let x = tape.embed(self.embedding, self.store.get(self.embedding), ids);
        let fwd = self.forward.run(&self.store, tape, x, 0..ids.len());
        let bwd = self.backward.run(&self.store, tape, x, (0..ids.len()).rev());
        Ok(tape.concat_cols(&[fwd, bwd]))
    }

    pub fn distance_on(&self, tape: &mut Tape, u: Var, v: Var) -> Var {
        let diff = tape.sub(u, v);
        match self.distance {
            Distance::Manhattan => {
                let a = tape.abs(diff);
                tape.sum(a)
            }
            Distance::Euclidean => {
                let sq = tape.sum_squares(diff);
                tape.sqrt(sq)
            }
        }
    }

    /// Returns `(distance, score)` nodes.
    pub fn score_on(&self, tape: &mut Tape, a: &[usize], b: &[usize]) -> Result<(Var, Var)> {
        let u = self.tower(tape, a)?;
        let v = self.tower(tape, b)?;
        let d = self.distance_on(tape, u, v);
        let neg = tape.scale(d, -1.0);
        Ok((d, tape.exp(neg)))
    }

    /// Binary cross-entropy of the similarity, using `-ln s = distance` for
    /// positives and a floored `ln(1 - s)` for negatives.
    pub fn loss_on(&self, tape: &mut Tape, a: &[usize], b: &[usize], yes: bool, weight: f64) -> Result<Var> {
        let (d, s) = self.score_on(tape, a, b)?;
        Ok(if yes {
            tape.scale(d, weight)
        } else {
            let neg = tape.scale(s, -1.0);
            let one_minus = tape.add_scalar(neg, 1.0);
            let l = tape.ln(one_minus, LOG_FLOOR);
            tape.scale(l, -weight)
        })
    }

    pub fn similarity(&self, spec: &str, rrid: &str) -> Result<f64> {
        let (a, b) = (self.ids(spec)?, self.ids(rrid)?);
        let mut tape = Tape::new();
        let (_, s) = self.score_on(&mut tape, &a, &b)?;
        let s = tape.scalar(s);
        if !s.is_finite() {
            return Err(Error::NonFinite("siamese score"));
        }
        Ok(s)
    }

    pub fn score_texts(&self, spec: &str, rrid: &str) -> Result<LinkLabel> {
        let score = self.similarity(spec, rrid)?;
        Ok(LinkLabel {
            value: if score >= self.threshold { Link::Yes } else { Link::No },
            score,
        })
    }
}

impl crate::train::Objective for SiameseModel {
    type Example = (Vec<usize>, Vec<usize>, bool);

    fn example_loss(&self, tape: &mut Tape, (a, b, yes): &Self::Example, weight: f64) -> Result<Var> {
        self.loss_on(tape, a, b, *yes, weight)
    }

    fn penalty(&self, tape: &mut Tape) -> Option<Var> {
        (self.l2_weight > 0.0).then(|| {
            let mut total: Option<Var> = None;
            for key in self.store.keys().filter(|k| *k != self.embedding) {
                let p = self.store.on(tape, key);
                let sq = tape.sum_squares(p);
                total = Some(match total {
                    Some(t) => tape.add(t, sq),
                    None => sq,
                });
            }
            let total = total.expect("lstm has parameters");
            tape.scale(total, self.l2_weight)
        })
    }

    fn stores_mut(&mut self) -> Vec<&mut ParamStore> {
        vec![&mut self.store]
    }
}

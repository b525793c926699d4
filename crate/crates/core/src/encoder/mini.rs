//! A small post-norm transformer encoder trained from scratch.

use ndarray::Array2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::tokenizer::{TokenSequence, Vocab};
use super::{Encoder, EncoderInput};
use crate::error::{Error, Result};
use crate::nn::{uniform, Linear, ParamKey, ParamStore, Tape, Var};

const LN_EPS: f64 = 1e-5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MiniEncoderConfig {
    pub d_model: usize,
    pub n_heads: usize,
    pub n_layers: usize,
    pub d_ff: usize,
    pub max_len: usize,
}

impl Default for MiniEncoderConfig {
    fn default() -> Self {
        MiniEncoderConfig {
            d_model: 64,
            n_heads: 2,
            n_layers: 2,
            d_ff: 128,
            max_len: 256,
        }
    }
}

impl MiniEncoderConfig {
    pub fn validate(&self) -> Result<()> {
        if self.d_model == 0 || self.n_heads == 0 || self.d_model % self.n_heads != 0 {
            return Err(Error::Config(format!(
                "d_model {} must be a positive multiple of n_heads {}",
                self.d_model, self.n_heads
            )));
        }
        if self.max_len < 4 || self.d_ff == 0 {
            return Err(Error::Config("max_len must be >= 4 and d_ff > 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Layer {
    query: Linear,
    key: Linear,
    value: Linear,
    out: Linear,
    ln1_gain: ParamKey,
    ln1_bias: ParamKey,
    ff_in: Linear,
    ff_out: Linear,
    ln2_gain: ParamKey,
    ln2_bias: ParamKey,
}

/// Word, position and segment embeddings followed by `n_layers` transformer
/// layers with residual connections and layer norm after each sub-layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MiniEncoder {
    pub config: MiniEncoderConfig,
    pub vocab: Vocab,
    pub store: ParamStore,
    token_emb: ParamKey,
    position_emb: ParamKey,
    segment_emb: ParamKey,
    emb_ln_gain: ParamKey,
    emb_ln_bias: ParamKey,
    layers: Vec<Layer>,
}

fn ln_params(store: &mut ParamStore, name: &str, d: usize) -> (ParamKey, ParamKey) {
    (
        store.add(format!("{name}.gain"), Array2::ones((1, d))),
        store.add(format!("{name}.bias"), Array2::zeros((1, d))),
    )
}

impl MiniEncoder {
    pub const PARAM_GROUP: u16 = 0;

    pub fn new(config: MiniEncoderConfig, vocab: Vocab, seed: u64) -> Result<Self> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = config.d_model;
        let mut store = ParamStore::new(Self::PARAM_GROUP);
        let token_emb = store.add("embeddings.token", uniform(&mut rng, vocab.len(), d, 0.1));
        let position_emb = store.add(
            "embeddings.position",
            uniform(&mut rng, config.max_len, d, 0.1),
        );
        let segment_emb = store.add("embeddings.segment", uniform(&mut rng, 2, d, 0.1));
        let (emb_ln_gain, emb_ln_bias) = ln_params(&mut store, "embeddings.ln", d);
        let layers = (0..config.n_layers)
            .map(|l| {
                let p = format!("layer{l}");
                let query = Linear::new(&mut store, &format!("{p}.attn.query"), d, d, Some(&mut rng));
                let key = Linear::new(&mut store, &format!("{p}.attn.key"), d, d, Some(&mut rng));
                let value = Linear::new(&mut store, &format!("{p}.attn.value"), d, d, Some(&mut rng));
                let out = Linear::new(&mut store, &format!("{p}.attn.out"), d, d, Some(&mut rng));
                let (ln1_gain, ln1_bias) = ln_params(&mut store, &format!("{p}.ln1"), d);
                let ff_in =
                    Linear::new(&mut store, &format!("{p}.ff.in"), d, config.d_ff, Some(&mut rng));
                let ff_out =
                    Linear::new(&mut store, &format!("{p}.ff.out"), config.d_ff, d, Some(&mut rng));
                let (ln2_gain, ln2_bias) = ln_params(&mut store, &format!("{p}.ln2"), d);
                Layer {
                    query,
                    key,
                    value,
                    out,
                    ln1_gain,
                    ln1_bias,
                    ff_in,
                    ff_out,
                    ln2_gain,
                    ln2_bias,
                }
            })
            .collect();
        Ok(MiniEncoder {
            config,
            vocab,
            store,
            token_emb,
            position_emb,
            segment_emb,
            emb_ln_gain,
            emb_ln_bias,
            layers,
        })
    }

    pub fn token_embedding_key(&self) -> ParamKey {
        self.token_emb
    }

    pub fn position_embedding_key(&self) -> ParamKey {
        self.position_emb
    }

    fn layer_norm(&self, tape: &mut Tape, x: Var, gain: ParamKey, bias: ParamKey) -> Var {
        let norm = tape.layer_norm_rows(x, LN_EPS);
        let g = self.store.on(tape, gain);
        let b = self.store.on(tape, bias);
        let scaled = tape.mul_row(norm, g);
        tape.add_row(scaled, b)
    }

    fn attention(&self, tape: &mut Tape, layer: &Layer, x: Var) -> Var {
        let q = layer.query.forward(&self.store, tape, x);
        let k = layer.key.forward(&self.store, tape, x);
        let v = layer.value.forward(&self.store, tape, x);
        let dh = self.config.d_model / self.config.n_heads;
        let scale = 1.0 / (dh as f64).sqrt();
        let heads: Vec<Var> = (0..self.config.n_heads)
            .map(|h| {
                let (lo, hi) = (h * dh, (h + 1) * dh);
                let qh = tape.slice_cols(q, lo, hi);
                let kh = tape.slice_cols(k, lo, hi);
                let vh = tape.slice_cols(v, lo, hi);
                let scores = tape.matmul_t(qh, kh);
                let scores = tape.scale(scores, scale);
                let weights = tape.softmax_rows(scores);
                tape.matmul(weights, vh)
            })
            .collect();
        let joined = if heads.len() == 1 {
            heads[0]
        } else {
            tape.concat_cols(&heads)
        };
        layer.out.forward(&self.store, tape, joined)
    }

    /// Records the forward pass and returns the `(n + m + 2) × d` hidden states.
    pub fn forward(&self, tape: &mut Tape, input: &EncoderInput) -> Result<Var> {
        if input.len() > self.config.max_len {
            return Err(Error::TooLong {
                len: input.len(),
                max_len: self.config.max_len,
                reason: "input exceeds the position table",
            });
        }
        if let Some(&bad) = input.ids.iter().find(|&&id| id >= self.vocab.len()) {
            return Err(Error::InvalidInput(format!("token id {bad} outside vocabulary")));
        }
        let positions: Vec<usize> = (0..input.len()).collect();
        let tok = tape.embed(self.token_emb, self.store.get(self.token_emb), &input.ids);
        let pos = tape.embed(self.position_emb, self.store.get(self.position_emb), &positions);
        let seg = tape.embed(self.segment_emb, self.store.get(self.segment_emb), &input.segments);
        let x = tape.add(tok, pos);
        let x = tape.add(x, seg);
        let mut x = self.layer_norm(tape, x, self.emb_ln_gain, self.emb_ln_bias);
        for layer in &self.layers {
            let attn = self.attention(tape, layer, x);
            let res = tape.add(x, attn);
            let h = self.layer_norm(tape, res, layer.ln1_gain, layer.ln1_bias);
            let ff = layer.ff_in.forward(&self.store, tape, h);
            let ff = tape.gelu(ff);
            let ff = layer.ff_out.forward(&self.store, tape, ff);
            let res = tape.add(h, ff);
            x = self.layer_norm(tape, res, layer.ln2_gain, layer.ln2_bias);
        }
        Ok(x)
    }

    /// Same as [`MiniEncoder::forward`] for a ready-made layout, returning values only.
    pub fn hidden(&self, input: &EncoderInput) -> Result<Array2<f64>> {
        let mut tape = Tape::new();
        let out = self.forward(&mut tape, input)?;
        Ok(tape.value(out).clone())
    }
}

impl Encoder for MiniEncoder {
    fn dim(&self) -> usize {
        self.config.d_model
    }

    fn max_len(&self) -> usize {
        self.config.max_len
    }

    fn tokenize(&self, text: &str) -> Result<TokenSequence> {
        self.vocab.tokenize(text)
    }

    fn encode_ids(&self, snippet: &[usize], aspect: &[usize]) -> Result<Array2<f64>> {
        let input = EncoderInput::new(snippet, aspect, self.config.max_len)?;
        self.hidden(&input)
    }
}

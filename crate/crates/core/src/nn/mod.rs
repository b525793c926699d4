//! Minimal differentiable building blocks used by the encoder and the heads.

mod params;
mod tape;

pub use params::{accumulate, glorot, scale_grads, uniform, Adam, Param, ParamKey, ParamStore};
pub use tape::{softmax_in_place, Grads, Tape, Var};

/// A dense layer `x · W + b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct Linear {
    pub weight: ParamKey,
    pub bias: ParamKey,
}

impl Linear {
    pub fn new(
        store: &mut ParamStore,
        name: &str,
        rows: usize,
        cols: usize,
        rng: Option<&mut rand_chacha::ChaCha8Rng>,
    ) -> Self {
        let weight = match rng {
            Some(rng) => glorot(rng, rows, cols),
            None => ndarray::Array2::zeros((rows, cols)),
        };
        Linear {
            weight: store.add(format!("{name}.weight"), weight),
            bias: store.add(format!("{name}.bias"), ndarray::Array2::zeros((1, cols))),
        }
    }

    pub fn forward(&self, store: &ParamStore, tape: &mut Tape, x: Var) -> Var {
        let w = store.on(tape, self.weight);
        let b = store.on(tape, self.bias);
        let xw = tape.matmul(x, w);
        tape.add_row(xw, b)
    }
}

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use super::aoa::{attention_on_tape, pool_on_tape};
use crate::encoder::EncoderOutput;
use crate::error::{Error, Result};
use crate::nn::{Linear, ParamStore, Tape, Var};

/// Which representation feeds the classifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum HeadVariant {
    /// Pooled snippet vector `r_aoa` (d).
    #[serde(rename = "AOA")]
    Aoa,
    /// `[h0; r_aoa]` (2d).
    #[serde(rename = "AOA_CLS")]
    AoaCls,
    /// `[CLS]` vector of `[CLS] snippet [SEP]`, no aspect.
    #[serde(rename = "ENC_ONLY")]
    EncOnly,
    /// `[CLS]` vector of `[CLS] snippet [SEP] aspect`.
    #[serde(rename = "ENC_SPC")]
    EncSpc,
}

impl HeadVariant {
    pub const ALL: [HeadVariant; 4] = [
        HeadVariant::Aoa,
        HeadVariant::AoaCls,
        HeadVariant::EncOnly,
        HeadVariant::EncSpc,
    ];

    pub fn uses_aspect(self) -> bool {
        self != HeadVariant::EncOnly
    }

    fn needs_aspect_rows(self) -> bool {
        matches!(self, HeadVariant::Aoa | HeadVariant::AoaCls)
    }

    pub fn input_dim(self, d: usize) -> usize {
        match self {
            HeadVariant::AoaCls => 2 * d,
            _ => d,
        }
    }
}

/// A linear layer to three logits over the variant's representation.
/// Weights start at zero, so an untrained head predicts uniformly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpecificityHead {
    pub variant: HeadVariant,
    pub store: ParamStore,
    pub linear: Linear,
    dim: usize,
}

impl SpecificityHead {
    pub const PARAM_GROUP: u16 = 1;

    pub fn new(variant: HeadVariant, d: usize) -> Self {
        let mut store = ParamStore::new(Self::PARAM_GROUP);
        let linear = Linear::new(&mut store, "head", variant.input_dim(d), 3, None);
        SpecificityHead {
            variant,
            store,
            linear,
            dim: d,
        }
    }

    /// Encoder width the head was built for.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn weight(&self) -> &Array2<f64> {
        self.store.get(self.linear.weight)
    }

    /// The classifier input (1 × input_dim) for `(n + m + 2) × d` hidden states.
    pub fn representation(&self, tape: &mut Tape, hidden: Var, n: usize, m: usize) -> Result<Var> {
        let rows = tape.value(hidden).nrows();
        if rows != n + m + 2 || tape.value(hidden).ncols() != self.dim {
            return Err(Error::Shape(format!(
                "head expects {} × {}, got {:?}",
                n + m + 2,
                self.dim,
                tape.value(hidden).dim()
            )));
        }
        if self.variant.needs_aspect_rows() && m == 0 {
            return Err(Error::InvalidInput(
                "attention-over-attention heads require a non-empty aspect".into(),
            ));
        }
        let h0 = tape.slice_rows(hidden, 0, 1);
        Ok(match self.variant {
            HeadVariant::EncOnly | HeadVariant::EncSpc => h0,
            HeadVariant::Aoa | HeadVariant::AoaCls => {
                let a = tape.slice_rows(hidden, 1, n + 1);
                let b = tape.slice_rows(hidden, n + 2, n + m + 2);
                let [.., gamma] = attention_on_tape(tape, a, b);
                let r = pool_on_tape(tape, a, gamma);
                if self.variant == HeadVariant::AoaCls {
                    tape.concat_cols(&[h0, r])
                } else {
                    r
                }
            }
        })
    }

    /// 1 × 3 logits.
    pub fn forward(&self, tape: &mut Tape, hidden: Var, n: usize, m: usize) -> Result<Var> {
        let r = self.representation(tape, hidden, n, m)?;
        Ok(self.linear.forward(&self.store, tape, r))
    }

    pub fn logits(&self, out: &EncoderOutput) -> Result<Array1<f64>> {
        let mut tape = Tape::new();
        let h = tape.leaf(out.hidden.clone());
        let l = self.forward(&mut tape, h, out.n, out.m)?;
        Ok(tape.value(l).row(0).to_owned())
    }

    /// `‖W‖²` of the head weight matrix (the bias is not penalized).
    pub fn penalty(&self, tape: &mut Tape) -> Var {
        let w = self.store.on(tape, self.linear.weight);
        tape.sum_squares(w)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dims_and_zero_init() {
        for v in HeadVariant::ALL {
            let head = SpecificityHead::new(v, 4);
            assert_eq!(head.weight().dim(), (v.input_dim(4), 3));
            let hidden = Array2::from_shape_fn((6, 4), |(r, c)| (r + c) as f64 * 0.1);
            let out = EncoderOutput::new(hidden, 3, 1, false).unwrap();
            assert_eq!(head.logits(&out).unwrap(), Array1::<f64>::zeros(3));
        }
        assert_eq!(HeadVariant::AoaCls.input_dim(64), 128);
    }

    #[test]
    fn aoa_requires_aspect() {
        let out = EncoderOutput::new(Array2::zeros((4, 2)), 2, 0, false).unwrap();
        assert!(SpecificityHead::new(HeadVariant::Aoa, 2).logits(&out).is_err());
        assert!(SpecificityHead::new(HeadVariant::EncOnly, 2).logits(&out).is_ok());
    }
}

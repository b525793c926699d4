//! Attention-over-attention between snippet rows `a` (n × d) and aspect rows `b` (m × d).

use ndarray::{concatenate, Array1, Array2, ArrayView1, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::{Tape, Var};

/// Every intermediate of one attention-over-attention pass.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AoaAttention {
    /// `I = a · bᵀ`, n × m.
    pub interaction: Array2<f64>,
    /// Softmax over each column of `I`.
    pub alpha: Array2<f64>,
    /// Softmax over each row of `I`.
    pub beta: Array2<f64>,
    /// Column means of `beta`, length m.
    pub beta_bar: Array1<f64>,
    /// `alpha · beta_barᵀ`, length n.
    pub gamma: Array1<f64>,
}

/// Records the attention on `tape`; returns `(I, alpha, beta, beta_bar, gamma)`
/// with `beta_bar` as a 1 × m row and `gamma` as an n × 1 column.
pub(crate) fn attention_on_tape(tape: &mut Tape, a: Var, b: Var) -> [Var; 5] {
    let i = tape.matmul_t(a, b);
    let alpha = tape.softmax_cols(i);
    let beta = tape.softmax_rows(i);
    let beta_bar = tape.mean_rows(beta);
    let gamma = tape.matmul_t(alpha, beta_bar);
    [i, alpha, beta, beta_bar, gamma]
}

/// `r = aᵀ γ` as a 1 × d row.
pub(crate) fn pool_on_tape(tape: &mut Tape, a: Var, gamma: Var) -> Var {
    let gt = tape.transpose(gamma);
    tape.matmul(gt, a)
}

fn check_finite(x: &ArrayView2<'_, f64>, what: &'static str) -> Result<()> {
    if x.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what))
    }
}

pub fn aoa_attention(a: ArrayView2<'_, f64>, b: ArrayView2<'_, f64>) -> Result<AoaAttention> {
    if a.nrows() == 0 || b.nrows() == 0 {
        return Err(Error::Shape("attention needs at least one row on each side".into()));
    }
    if a.ncols() != b.ncols() {
        return Err(Error::Shape(format!(
            "snippet width {} differs from aspect width {}",
            a.ncols(),
            b.ncols()
        )));
    }
    check_finite(&a, "snippet representation")?;
    check_finite(&b, "aspect representation")?;
    let mut tape = Tape::new();
    let av = tape.leaf(a.to_owned());
    let bv = tape.leaf(b.to_owned());
    let [i, alpha, beta, beta_bar, gamma] = attention_on_tape(&mut tape, av, bv);
    Ok(AoaAttention {
        interaction: tape.value(i).clone(),
        alpha: tape.value(alpha).clone(),
        beta: tape.value(beta).clone(),
        beta_bar: tape.value(beta_bar).row(0).to_owned(),
        gamma: tape.value(gamma).column(0).to_owned(),
    })
}

/// Attention-weighted sum of the snippet rows.
pub fn aoa_pool(a: ArrayView2<'_, f64>, gamma: ArrayView1<'_, f64>) -> Result<Array1<f64>> {
    if a.nrows() != gamma.len() {
        return Err(Error::Shape(format!(
            "{} snippet rows but {} attention weights",
            a.nrows(),
            gamma.len()
        )));
    }
    Ok(a.t().dot(&gamma))
}

/// `[h0; r_aoa]`.
pub fn cls_concat<'a>(h0: ArrayView1<'a, f64>, r_aoa: ArrayView1<'a, f64>) -> Result<Array1<f64>> {
    if h0.len() != r_aoa.len() {
        return Err(Error::Shape(format!(
            "[CLS] width {} differs from pooled width {}",
            h0.len(),
            r_aoa.len()
        )));
    }
    Ok(concatenate(Axis(0), &[h0, r_aoa]).expect("equal widths"))
}

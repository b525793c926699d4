use ndarray::Array2;

use crate::error::{Error, Result};

fn confusion(a1: &[usize], a2: &[usize], k: usize) -> Result<Array2<f64>> {
    if a1.len() != a2.len() || a1.is_empty() {
        return Err(Error::InvalidInput(format!(
            "annotations must be non-empty and of equal length, got {} and {}",
            a1.len(),
            a2.len()
        )));
    }
    let mut m = Array2::zeros((k, k));
    for (&x, &y) in a1.iter().zip(a2) {
        if x >= k || y >= k {
            return Err(Error::InvalidInput(format!("label {} outside 0..{k}", x.max(y))));
        }
        m[[x, y]] += 1.0;
    }
    Ok(m / a1.len() as f64)
}

/// Agreement weights `1 - |i - j| / (k - 1)` for `k` ordered classes.
pub fn linear_weights(k: usize) -> Array2<f64> {
    if k < 2 {
        return Array2::ones((k, k));
    }
    Array2::from_shape_fn((k, k), |(i, j)| 1.0 - i.abs_diff(j) as f64 / (k - 1) as f64)
}

/// Weighted κ with an agreement-weight matrix (1 on the diagonal; off-diagonal
/// cells give partial credit). The identity matrix gives Cohen's κ.
pub fn weighted_kappa(a1: &[usize], a2: &[usize], weights: &Array2<f64>) -> Result<f64> {
    let k = weights.nrows();
    if weights.ncols() != k || k == 0 {
        return Err(Error::Shape(format!("weights must be square, got {:?}", weights.dim())));
    }
    let observed = confusion(a1, a2, k)?;
    let rows = observed.sum_axis(ndarray::Axis(1));
    let cols = observed.sum_axis(ndarray::Axis(0));
    let mut p_o = 0.0;
    let mut p_e = 0.0;
    for i in 0..k {
        for j in 0..k {
            p_o += weights[[i, j]] * observed[[i, j]];
            p_e += weights[[i, j]] * rows[i] * cols[j];
        }
    }
    if (1.0 - p_e).abs() < 1e-12 {
        return Err(Error::UndefinedKappa);
    }
    Ok((p_o - p_e) / (1.0 - p_e))
}

pub fn cohen_kappa(a1: &[usize], a2: &[usize], k: usize) -> Result<f64> {
    weighted_kappa(a1, a2, &Array2::eye(k))
}

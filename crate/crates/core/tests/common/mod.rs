#![allow(dead_code)]

use std::path::PathBuf;

use abspec::corpus::{parse_article, Article};
use ndarray::Array2;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

pub fn article(name: &str) -> Article {
    let raw = std::fs::read_to_string(fixture(&format!("articles/{name}.json"))).unwrap();
    parse_article(&raw).unwrap()
}

pub const ARTICLES: [&str; 8] = [
    "pmc6120938",
    "pmid2925091",
    "pmid26465754",
    "pmid27802335",
    "pmid23390418",
    "pmid26709919",
    "class_examples",
    "edge_cases",
];

/// Below this norm both gradients are finite-difference round-off; some
/// parameters (e.g. attention key biases) have an exactly zero gradient.
pub const ZERO_GRAD: f64 = 1e-8;

/// `‖g - n‖ / (‖g‖ + ‖n‖)`, the usual gradient-check error.
pub fn rel_err(analytic: &Array2<f64>, numeric: &Array2<f64>) -> f64 {
    let norm = |x: &Array2<f64>| x.mapv(|v| v * v).sum().sqrt();
    let scale = norm(analytic) + norm(numeric);
    if scale < ZERO_GRAD {
        return 0.0;
    }
    norm(&(analytic - numeric)) / scale
}

/// Central differences of `loss` with respect to every entry of `x`.
pub fn numeric_grad(x: &Array2<f64>, mut loss: impl FnMut(&Array2<f64>) -> f64) -> Array2<f64> {
    const H: f64 = 1e-6;
    let mut out = Array2::zeros(x.dim());
    let mut probe = x.clone();
    for ((r, c), g) in out.indexed_iter_mut() {
        let orig = probe[[r, c]];
        probe[[r, c]] = orig + H;
        let up = loss(&probe);
        probe[[r, c]] = orig - H;
        let down = loss(&probe);
        probe[[r, c]] = orig;
        *g = (up - down) / (2.0 * H);
    }
    out
}

//! Reverse-mode differentiation over dense `f64` matrices.
//!
//! A [`Tape`] records one forward computation. Every value is a 2-D matrix;
//! vectors are `1 × k` rows and scalars are `1 × 1`. Parameters enter the
//! tape by copy ([`Tape::param`]) or by row lookup ([`Tape::embed`]) and are
//! identified by a [`ParamKey`] so [`Grads`] can be applied to their owners.

use std::collections::HashMap;

use ndarray::{concatenate, s, Array2, Axis, Zip};

use super::params::ParamKey;

/// Handle to a node on a [`Tape`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Var(usize);

#[derive(Debug, Clone)]
enum Op {
    Leaf,
    Param(ParamKey),
    Embed {
        key: ParamKey,
        rows: usize,
        ids: Vec<usize>,
    },
    MatMul(Var, Var),
    MatMulT(Var, Var),
    Add(Var, Var),
    Sub(Var, Var),
    AddRow(Var, Var),
    Mul(Var, Var),
    MulRow(Var, Var),
    Scale(Var, f64),
    AddScalar(Var),
    Transpose(Var),
    SoftmaxRows(Var),
    SoftmaxCols(Var),
    MeanRows(Var),
    SumAll(Var),
    SumSquares(Var),
    Tanh(Var),
    Sigmoid(Var),
    Gelu(Var),
    Exp(Var),
    Ln { x: Var, floor: f64 },
    Abs(Var),
    Sqrt(Var),
    LayerNormRows { x: Var, inv_std: Vec<f64> },
    SliceRows(Var, usize),
    SliceCols(Var, usize),
    ConcatRows(Vec<Var>),
    ConcatCols(Vec<Var>),
    SoftmaxXent {
        logits: Var,
        target: usize,
        weight: f64,
        probs: Vec<f64>,
    },
}

#[derive(Debug, Clone)]
struct Node {
    value: Array2<f64>,
    op: Op,
}

#[derive(Debug, Default)]
pub struct Tape {
    nodes: Vec<Node>,
}

/// Gradients produced by [`Tape::backward`].
#[derive(Debug, Default)]
pub struct Grads {
    nodes: Vec<Option<Array2<f64>>>,
    params: HashMap<ParamKey, Array2<f64>>,
}

impl Grads {
    /// Gradient of the loss with respect to a leaf; `None` if it did not contribute.
    pub fn wrt(&self, v: Var) -> Option<&Array2<f64>> {
        self.nodes.get(v.0).and_then(Option::as_ref)
    }

    pub fn param(&self, key: ParamKey) -> Option<&Array2<f64>> {
        self.params.get(&key)
    }

    pub fn params(&self) -> &HashMap<ParamKey, Array2<f64>> {
        &self.params
    }

    pub fn into_params(self) -> HashMap<ParamKey, Array2<f64>> {
        self.params
    }
}

fn gelu(x: f64) -> f64 {
    const C: f64 = 0.797_884_560_802_865_4; // sqrt(2/pi)
    0.5 * x * (1.0 + (C * (x + 0.044_715 * x * x * x)).tanh())
}

fn gelu_grad(x: f64) -> f64 {
    const C: f64 = 0.797_884_560_802_865_4;
    let inner = C * (x + 0.044_715 * x * x * x);
    let t = inner.tanh();
    0.5 * (1.0 + t) + 0.5 * x * (1.0 - t * t) * C * (1.0 + 3.0 * 0.044_715 * x * x)
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

pub fn softmax_in_place(row: &mut [f64]) {
    let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for v in row.iter_mut() {
        *v = (*v - max).exp();
        sum += *v;
    }
    for v in row.iter_mut() {
        *v /= sum;
    }
}

fn softmax_rows(x: &Array2<f64>) -> Array2<f64> {
    let mut out = x.clone();
    for mut row in out.rows_mut() {
        let mut buf = row.to_vec();
        softmax_in_place(&mut buf);
        row.assign(&ndarray::Array1::from(buf));
    }
    out
}

impl Tape {
    pub fn new() -> Self {
        Tape { nodes: Vec::new() }
    }

    fn push(&mut self, value: Array2<f64>, op: Op) -> Var {
        self.nodes.push(Node { value, op });
        Var(self.nodes.len() - 1)
    }

    pub fn value(&self, v: Var) -> &Array2<f64> {
        &self.nodes[v.0].value
    }

    pub fn scalar(&self, v: Var) -> f64 {
        let val = self.value(v);
        debug_assert_eq!(val.dim(), (1, 1));
        val[[0, 0]]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// An input whose gradient is tracked but which belongs to no parameter.
    pub fn leaf(&mut self, value: Array2<f64>) -> Var {
        self.push(value, Op::Leaf)
    }

    pub fn row(&mut self, values: &[f64]) -> Var {
        self.leaf(Array2::from_shape_vec((1, values.len()), values.to_vec()).unwrap())
    }

    pub fn param(&mut self, key: ParamKey, value: &Array2<f64>) -> Var {
        self.push(value.clone(), Op::Param(key))
    }

    /// Rows `ids` of the parameter table, in order.
    pub fn embed(&mut self, key: ParamKey, table: &Array2<f64>, ids: &[usize]) -> Var {
        let mut out = Array2::zeros((ids.len(), table.ncols()));
        for (r, &id) in ids.iter().enumerate() {
            out.row_mut(r).assign(&table.row(id));
        }
        self.push(
            out,
            Op::Embed {
                key,
                rows: table.nrows(),
                ids: ids.to_vec(),
            },
        )
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Var {
        let v = self.value(a).dot(self.value(b));
        self.push(v, Op::MatMul(a, b))
    }

    /// `a · bᵀ`
    pub fn matmul_t(&mut self, a: Var, b: Var) -> Var {
        let v = self.value(a).dot(&self.value(b).t());
        self.push(v, Op::MatMulT(a, b))
    }

    pub fn add(&mut self, a: Var, b: Var) -> Var {
        let v = self.value(a) + self.value(b);
        self.push(v, Op::Add(a, b))
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Var {
        let v = self.value(a) - self.value(b);
        self.push(v, Op::Sub(a, b))
    }

    /// Adds a `1 × c` row to every row of `a`.
    pub fn add_row(&mut self, a: Var, row: Var) -> Var {
        assert_eq!(self.value(row).nrows(), 1);
        let v = self.value(a) + self.value(row);
        self.push(v, Op::AddRow(a, row))
    }

    pub fn mul(&mut self, a: Var, b: Var) -> Var {
        let v = self.value(a) * self.value(b);
        self.push(v, Op::Mul(a, b))
    }

    /// Multiplies every row of `a` elementwise by a `1 × c` row.
    pub fn mul_row(&mut self, a: Var, row: Var) -> Var {
        assert_eq!(self.value(row).nrows(), 1);
        let v = self.value(a) * self.value(row);
        self.push(v, Op::MulRow(a, row))
    }

    pub fn scale(&mut self, a: Var, by: f64) -> Var {
        let v = self.value(a) * by;
        self.push(v, Op::Scale(a, by))
    }

    pub fn add_scalar(&mut self, a: Var, c: f64) -> Var {
        let v = self.value(a) + c;
        self.push(v, Op::AddScalar(a))
    }

    pub fn transpose(&mut self, a: Var) -> Var {
        let v = self.value(a).t().to_owned();
        self.push(v, Op::Transpose(a))
    }

    pub fn softmax_rows(&mut self, a: Var) -> Var {
        let v = softmax_rows(self.value(a));
        self.push(v, Op::SoftmaxRows(a))
    }

    pub fn softmax_cols(&mut self, a: Var) -> Var {
        let v = softmax_rows(&self.value(a).t().to_owned()).t().to_owned();
        self.push(v, Op::SoftmaxCols(a))
    }

    /// Column means as a `1 × c` row.
    pub fn mean_rows(&mut self, a: Var) -> Var {
        let v = self.value(a).mean_axis(Axis(0)).unwrap().insert_axis(Axis(0));
        self.push(v, Op::MeanRows(a))
    }

    pub fn sum(&mut self, a: Var) -> Var {
        let v = Array2::from_elem((1, 1), self.value(a).sum());
        self.push(v, Op::SumAll(a))
    }

    pub fn sum_squares(&mut self, a: Var) -> Var {
        let v = Array2::from_elem((1, 1), self.value(a).iter().map(|x| x * x).sum());
        self.push(v, Op::SumSquares(a))
    }

    pub fn tanh(&mut self, a: Var) -> Var {
        let v = self.value(a).mapv(f64::tanh);
        self.push(v, Op::Tanh(a))
    }

    pub fn sigmoid(&mut self, a: Var) -> Var {
        let v = self.value(a).mapv(sigmoid);
        self.push(v, Op::Sigmoid(a))
    }

    pub fn gelu(&mut self, a: Var) -> Var {
        let v = self.value(a).mapv(gelu);
        self.push(v, Op::Gelu(a))
    }

    pub fn exp(&mut self, a: Var) -> Var {
        let v = self.value(a).mapv(f64::exp);
        self.push(v, Op::Exp(a))
    }

    /// Natural log of `max(x, floor)`; the gradient is zero where clamped.
    pub fn ln(&mut self, a: Var, floor: f64) -> Var {
        let v = self.value(a).mapv(|x| x.max(floor).ln());
        self.push(v, Op::Ln { x: a, floor })
    }

    pub fn abs(&mut self, a: Var) -> Var {
        let v = self.value(a).mapv(f64::abs);
        self.push(v, Op::Abs(a))
    }

    /// Square root; the gradient at 0 is taken to be 0.
    pub fn sqrt(&mut self, a: Var) -> Var {
        let v = self.value(a).mapv(f64::sqrt);
        self.push(v, Op::Sqrt(a))
    }

    /// Normalizes each row to zero mean and unit variance (no affine part).
    pub fn layer_norm_rows(&mut self, a: Var, eps: f64) -> Var {
        let x = self.value(a);
        let mut out = x.clone();
        let mut inv_std = Vec::with_capacity(x.nrows());
        for mut row in out.rows_mut() {
            let mean = row.mean().unwrap();
            let var = row.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / row.len() as f64;
            let is = 1.0 / (var + eps).sqrt();
            row.mapv_inplace(|v| (v - mean) * is);
            inv_std.push(is);
        }
        self.push(out, Op::LayerNormRows { x: a, inv_std })
    }

    pub fn slice_rows(&mut self, a: Var, start: usize, end: usize) -> Var {
        let v = self.value(a).slice(s![start..end, ..]).to_owned();
        self.push(v, Op::SliceRows(a, start))
    }

    pub fn slice_cols(&mut self, a: Var, start: usize, end: usize) -> Var {
        let v = self.value(a).slice(s![.., start..end]).to_owned();
        self.push(v, Op::SliceCols(a, start))
    }

    pub fn concat_rows(&mut self, parts: &[Var]) -> Var {
        let views: Vec<_> = parts.iter().map(|p| self.value(*p).view()).collect();
        let v = concatenate(Axis(0), &views).expect("concat_rows: column mismatch");
        self.push(v, Op::ConcatRows(parts.to_vec()))
    }

    pub fn concat_cols(&mut self, parts: &[Var]) -> Var {
        let views: Vec<_> = parts.iter().map(|p| self.value(*p).view()).collect();
        let v = concatenate(Axis(1), &views).expect("concat_cols: row mismatch");
        self.push(v, Op::ConcatCols(parts.to_vec()))
    }

    /// `-weight · ln softmax(logits)[target]` for a `1 × k` row of logits.
    pub fn softmax_cross_entropy(&mut self, logits: Var, target: usize, weight: f64) -> Var {
        let row = self.value(logits);
        assert_eq!(row.nrows(), 1);
        let mut probs = row.row(0).to_vec();
        softmax_in_place(&mut probs);
        let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lse = max + row.iter().map(|v| (v - max).exp()).sum::<f64>().ln();
        let loss = weight * (lse - row[[0, target]]);
        self.push(
            Array2::from_elem((1, 1), loss),
            Op::SoftmaxXent {
                logits,
                target,
                weight,
                probs,
            },
        )
    }

    /// Back-propagates from the scalar `loss`.
    pub fn backward(&self, loss: Var) -> Grads {
        assert_eq!(self.value(loss).dim(), (1, 1), "loss must be a scalar");
        let mut grads: Vec<Option<Array2<f64>>> = vec![None; self.nodes.len()];
        grads[loss.0] = Some(Array2::ones((1, 1)));
        let mut params: HashMap<ParamKey, Array2<f64>> = HashMap::new();

        fn acc(grads: &mut [Option<Array2<f64>>], v: Var, g: Array2<f64>) {
            match &mut grads[v.0] {
                Some(existing) => *existing += &g,
                slot @ None => *slot = Some(g),
            }
        }

        for idx in (0..=loss.0).rev() {
            let Some(g) = grads[idx].take() else { continue };
            let node = &self.nodes[idx];
            match &node.op {
                Op::Leaf => grads[idx] = Some(g),
                Op::Param(key) => {
                    params
                        .entry(*key)
                        .and_modify(|p| *p += &g)
                        .or_insert_with(|| g.clone());
                }
                Op::Embed { key, rows, ids } => {
                    let table = params
                        .entry(*key)
                        .or_insert_with(|| Array2::zeros((*rows, g.ncols())));
                    for (r, &id) in ids.iter().enumerate() {
                        let mut dst = table.row_mut(id);
                        dst += &g.row(r);
                    }
                }
                Op::MatMul(a, b) => {
                    let ga = g.dot(&self.value(*b).t());
                    let gb = self.value(*a).t().dot(&g);
                    acc(&mut grads, *a, ga);
                    acc(&mut grads, *b, gb);
                }
                Op::MatMulT(a, b) => {
                    let ga = g.dot(self.value(*b));
                    let gb = g.t().dot(self.value(*a));
                    acc(&mut grads, *a, ga);
                    acc(&mut grads, *b, gb);
                }
                Op::Add(a, b) => {
                    acc(&mut grads, *a, g.clone());
                    acc(&mut grads, *b, g);
                }
                Op::Sub(a, b) => {
                    acc(&mut grads, *b, -&g);
                    acc(&mut grads, *a, g);
                }
                Op::AddRow(a, row) => {
                    let gr = g.sum_axis(Axis(0)).insert_axis(Axis(0));
                    acc(&mut grads, *row, gr);
                    acc(&mut grads, *a, g);
                }
                Op::Mul(a, b) => {
                    let ga = &g * self.value(*b);
                    let gb = &g * self.value(*a);
                    acc(&mut grads, *a, ga);
                    acc(&mut grads, *b, gb);
                }
                Op::MulRow(a, row) => {
                    let ga = &g * self.value(*row);
                    let gr = (&g * self.value(*a)).sum_axis(Axis(0)).insert_axis(Axis(0));
                    acc(&mut grads, *a, ga);
                    acc(&mut grads, *row, gr);
                }
                Op::Scale(a, by) => acc(&mut grads, *a, g * *by),
                Op::AddScalar(a) => acc(&mut grads, *a, g),
                Op::Transpose(a) => acc(&mut grads, *a, g.t().to_owned()),
                Op::SoftmaxRows(a) => {
                    let y = &node.value;
                    let dot = (&g * y).sum_axis(Axis(1)).insert_axis(Axis(1));
                    acc(&mut grads, *a, y * &(&g - &dot));
                }
                Op::SoftmaxCols(a) => {
                    let y = &node.value;
                    let dot = (&g * y).sum_axis(Axis(0)).insert_axis(Axis(0));
                    acc(&mut grads, *a, y * &(&g - &dot));
                }
                Op::MeanRows(a) => {
                    let n = self.value(*a).nrows();
                    let ga = Array2::from_shape_fn((n, g.ncols()), |(_, j)| g[[0, j]] / n as f64);
                    acc(&mut grads, *a, ga);
                }
                Op::SumAll(a) => {
                    let ga = Array2::from_elem(self.value(*a).dim(), g[[0, 0]]);
                    acc(&mut grads, *a, ga);
                }
                Op::SumSquares(a) => {
                    let ga = self.value(*a) * (2.0 * g[[0, 0]]);
                    acc(&mut grads, *a, ga);
                }
                Op::Tanh(a) => {
                    let ga = Zip::from(&g).and(&node.value).map_collect(|g, y| g * (1.0 - y * y));
                    acc(&mut grads, *a, ga);
                }
                Op::Sigmoid(a) => {
                    let ga = Zip::from(&g).and(&node.value).map_collect(|g, y| g * y * (1.0 - y));
                    acc(&mut grads, *a, ga);
                }
                Op::Gelu(a) => {
                    let ga = Zip::from(&g)
                        .and(self.value(*a))
                        .map_collect(|g, x| g * gelu_grad(*x));
                    acc(&mut grads, *a, ga);
                }
                Op::Exp(a) => acc(&mut grads, *a, &g * &node.value),
                Op::Ln { x, floor } => {
                    let ga = Zip::from(&g)
                        .and(self.value(*x))
                        .map_collect(|g, x| if *x > *floor { g / x } else { 0.0 });
                    acc(&mut grads, *x, ga);
                }
                Op::Abs(a) => {
                    let ga = Zip::from(&g).and(self.value(*a)).map_collect(|g, x| {
                        if *x > 0.0 {
                            *g
                        } else if *x < 0.0 {
                            -g
                        } else {
                            0.0
                        }
                    });
                    acc(&mut grads, *a, ga);
                }
                Op::Sqrt(a) => {
                    let ga = Zip::from(&g)
                        .and(&node.value)
                        .map_collect(|g, y| if *y > 0.0 { g / (2.0 * y) } else { 0.0 });
                    acc(&mut grads, *a, ga);
                }
                Op::LayerNormRows { x, inv_std } => {
                    let y = &node.value;
                    let mut ga = Array2::zeros(y.dim());
                    let d = y.ncols() as f64;
                    for (r, is) in inv_std.iter().enumerate() {
                        let gy = g.row(r);
                        let yr = y.row(r);
                        let mean_g = gy.sum() / d;
                        let mean_gy = gy.dot(&yr) / d;
                        for c in 0..y.ncols() {
                            ga[[r, c]] = is * (gy[c] - mean_g - yr[c] * mean_gy);
                        }
                    }
                    acc(&mut grads, *x, ga);
                }
                Op::SliceRows(a, start) => {
                    let mut ga = Array2::zeros(self.value(*a).dim());
                    ga.slice_mut(s![*start..*start + g.nrows(), ..]).assign(&g);
                    acc(&mut grads, *a, ga);
                }
                Op::SliceCols(a, start) => {
                    let mut ga = Array2::zeros(self.value(*a).dim());
                    ga.slice_mut(s![.., *start..*start + g.ncols()]).assign(&g);
                    acc(&mut grads, *a, ga);
                }
                Op::ConcatRows(parts) => {
                    let mut at = 0;
                    for p in parts {
                        let n = self.value(*p).nrows();
                        acc(&mut grads, *p, g.slice(s![at..at + n, ..]).to_owned());
                        at += n;
                    }
                }
                Op::ConcatCols(parts) => {
                    let mut at = 0;
                    for p in parts {
                        let n = self.value(*p).ncols();
                        acc(&mut grads, *p, g.slice(s![.., at..at + n]).to_owned());
                        at += n;
                    }
                }
                Op::SoftmaxXent {
                    logits,
                    target,
                    weight,
                    probs,
                } => {
                    let scale = g[[0, 0]] * weight;
                    let mut gl = Array2::from_shape_vec((1, probs.len()), probs.clone()).unwrap();
                    gl[[0, *target]] -= 1.0;
                    acc(&mut grads, *logits, gl * scale);
                }
            }
        }

        Grads {
            nodes: grads,
            params,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(rng: &mut ChaCha8Rng, r: usize, c: usize) -> Array2<f64> {
        Array2::from_shape_fn((r, c), |_| rng.gen_range(-1.0..1.0))
    }

    /// Compares the gradient of `f` w.r.t. every entry of every input with
    /// central differences.
    fn check(inputs: Vec<Array2<f64>>, f: impl Fn(&mut Tape, &[Var]) -> Var) {
        let mut tape = Tape::new();
        let vars: Vec<Var> = inputs.iter().map(|x| tape.leaf(x.clone())).collect();
        let out = f(&mut tape, &vars);
        let grads = tape.backward(out);
        let h = 1e-6;
        for (k, x) in inputs.iter().enumerate() {
            let analytic = grads.wrt(vars[k]).cloned().unwrap_or_else(|| Array2::zeros(x.dim()));
            for idx in 0..x.len() {
                let eval = |delta: f64| {
                    let mut t = Tape::new();
                    let vs: Vec<Var> = inputs
                        .iter()
                        .enumerate()
                        .map(|(j, y)| {
                            let mut y = y.clone();
                            if j == k {
                                y.as_slice_mut().unwrap()[idx] += delta;
                            }
                            t.leaf(y)
                        })
                        .collect();
                    let o = f(&mut t, &vs);
                    t.scalar(o)
                };
                let numeric = (eval(h) - eval(-h)) / (2.0 * h);
                let a = analytic.as_slice().unwrap()[idx];
                let denom = a.abs().max(numeric.abs()).max(1e-6);
                assert!(
                    (a - numeric).abs() / denom < 1e-5,
                    "input {k} entry {idx}: analytic {a} numeric {numeric}"
                );
            }
        }
    }

    #[test]
    fn elementwise_ops() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = random(&mut rng, 3, 4);
        let b = random(&mut rng, 3, 4);
        let pos = a.mapv(|x| x.abs() + 0.5);
        check(vec![a.clone(), b.clone()], |t, v| {
            let m = t.mul(v[0], v[1]);
            let s = t.sub(m, v[1]);
            let th = t.tanh(s);
            let sg = t.sigmoid(v[0]);
            let ge = t.gelu(v[1]);
            let x = t.add(th, sg);
            let x = t.add(x, ge);
            let x = t.scale(x, 0.7);
            let x = t.add_scalar(x, 0.3);
            let x = t.exp(x);
            t.sum(x)
        });
        check(vec![pos, b], |t, v| {
            let l = t.ln(v[0], 1e-12);
            let r = t.sqrt(v[0]);
            let ab = t.abs(v[1]);
            let x = t.mul(l, r);
            let x = t.add(x, ab);
            t.sum_squares(x)
        });
    }

    #[test]
    fn matrix_ops() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = random(&mut rng, 3, 4);
        let b = random(&mut rng, 4, 2);
        let c = random(&mut rng, 5, 4);
        let row = random(&mut rng, 1, 2);
        check(vec![a, b, c, row], |t, v| {
            let ab = t.matmul(v[0], v[1]);
            let ab = t.add_row(ab, v[3]);
            let ab = t.mul_row(ab, v[3]);
            let act = t.matmul_t(v[2], v[0]);
            let tr = t.transpose(act);
            let sr = t.softmax_rows(tr);
            let sc = t.softmax_cols(act);
            let m = t.mean_rows(sc);
            let x = t.sum_squares(sr);
            let y = t.sum_squares(m);
            let z = t.sum_squares(ab);
            let xy = t.add(x, y);
            t.add(xy, z)
        });
    }

    #[test]
    fn structural_ops() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random(&mut rng, 4, 3);
        let b = random(&mut rng, 2, 3);
        let w = random(&mut rng, 3, 7);
        check(vec![a, b, w], |t, v| {
            let cat = t.concat_rows(&[v[0], v[1]]);
            let ln = t.layer_norm_rows(cat, 1e-5);
            let sl = t.slice_rows(ln, 1, 5);
            let proj = t.matmul(sl, v[2]);
            let c1 = t.slice_cols(proj, 0, 3);
            let c2 = t.slice_cols(proj, 3, 7);
            let cc = t.concat_cols(&[c2, c1]);
            let r = t.slice_rows(cc, 2, 3);
            let xe = t.softmax_cross_entropy(r, 4, 1.5);
            let sq = t.sum_squares(cc);
            let sq = t.scale(sq, 0.01);
            t.add(xe, sq)
        });
    }

    #[test]
    fn params_and_embeddings_accumulate() {
        let key = ParamKey::new(0, 0);
        let table = array![[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]];
        let mut t = Tape::new();
        let e = t.embed(key, &table, &[2, 0, 2]);
        let s = t.sum(e);
        let g = t.backward(s);
        let gt = g.param(key).unwrap();
        assert_eq!(gt, &array![[1.0, 1.0], [0.0, 0.0], [2.0, 2.0]]);

        let wkey = ParamKey::new(1, 3);
        let w = array![[0.5, -1.0]];
        let mut t = Tape::new();
        let p1 = t.param(wkey, &w);
        let p2 = t.param(wkey, &w);
        let m = t.mul(p1, p2);
        let s = t.sum(m);
        let g = t.backward(s);
        assert_eq!(g.param(wkey).unwrap(), &array![[1.0, -2.0]]);
    }

    #[test]
    fn cross_entropy_of_zero_logits() {
        let mut t = Tape::new();
        let z = t.row(&[0.0, 0.0, 0.0]);
        let l = t.softmax_cross_entropy(z, 1, 1.0);
        assert!((t.scalar(l) - 3f64.ln()).abs() < 1e-15);
    }
}

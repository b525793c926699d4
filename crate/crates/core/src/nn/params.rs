use std::collections::HashMap;

use ndarray::Array2;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::tape::{Tape, Var};
use crate::error::{Error, Result};

/// Identifies a parameter across stores: `group` names the owning store.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ParamKey {
    pub group: u16,
    pub index: u32,
}

impl ParamKey {
    pub const fn new(group: u16, index: u32) -> Self {
        ParamKey { group, index }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Param {
    pub name: String,
    pub value: Array2<f64>,
}

/// Named matrices owned by one model component.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamStore {
    pub group: u16,
    params: Vec<Param>,
}

impl ParamStore {
    pub fn new(group: u16) -> Self {
        ParamStore {
            group,
            params: Vec::new(),
        }
    }

    pub fn add(&mut self, name: impl Into<String>, value: Array2<f64>) -> ParamKey {
        self.params.push(Param {
            name: name.into(),
            value,
        });
        ParamKey::new(self.group, (self.params.len() - 1) as u32)
    }

    pub fn get(&self, key: ParamKey) -> &Array2<f64> {
        debug_assert_eq!(key.group, self.group);
        &self.params[key.index as usize].value
    }

    pub fn get_mut(&mut self, key: ParamKey) -> &mut Array2<f64> {
        debug_assert_eq!(key.group, self.group);
        &mut self.params[key.index as usize].value
    }

    pub fn key(&self, name: &str) -> Option<ParamKey> {
        self.params
            .iter()
            .position(|p| p.name == name)
            .map(|i| ParamKey::new(self.group, i as u32))
    }

    pub fn keys(&self) -> impl Iterator<Item = ParamKey> + '_ {
        (0..self.params.len()).map(|i| ParamKey::new(self.group, i as u32))
    }

    pub fn iter(&self) -> impl Iterator<Item = (ParamKey, &Param)> + '_ {
        self.params
            .iter()
            .enumerate()
            .map(|(i, p)| (ParamKey::new(self.group, i as u32), p))
    }

    pub fn num_scalars(&self) -> usize {
        self.params.iter().map(|p| p.value.len()).sum()
    }

    /// Puts a copy of the parameter on the tape.
    pub fn on(&self, tape: &mut Tape, key: ParamKey) -> Var {
        tape.param(key, self.get(key))
    }

    pub fn fill(&mut self, v: f64) {
        for p in &mut self.params {
            p.value.fill(v);
        }
    }

    pub fn check_finite(&self) -> Result<()> {
        for p in &self.params {
            if !p.value.iter().all(|v| v.is_finite()) {
                return Err(Error::Archive(format!("parameter {} is not finite", p.name)));
            }
        }
        Ok(())
    }
}

/// Uniform Glorot initialization.
pub fn glorot(rng: &mut impl Rng, rows: usize, cols: usize) -> Array2<f64> {
    let limit = (6.0 / (rows + cols) as f64).sqrt();
    Array2::from_shape_fn((rows, cols), |_| rng.gen_range(-limit..limit))
}

pub fn uniform(rng: &mut impl Rng, rows: usize, cols: usize, limit: f64) -> Array2<f64> {
    Array2::from_shape_fn((rows, cols), |_| rng.gen_range(-limit..limit))
}

/// Adam with bias correction.
#[derive(Debug, Clone)]
pub struct Adam {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    step: u64,
    moments: HashMap<ParamKey, (Array2<f64>, Array2<f64>)>,
}

impl Adam {
    pub fn new(lr: f64) -> Self {
        Adam {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            step: 0,
            moments: HashMap::new(),
        }
    }

    /// Applies one update to every store from the (already averaged) gradients.
    pub fn step(&mut self, stores: &mut [&mut ParamStore], grads: &HashMap<ParamKey, Array2<f64>>) {
        self.step += 1;
        let bc1 = 1.0 - self.beta1.powi(self.step as i32);
        let bc2 = 1.0 - self.beta2.powi(self.step as i32);
        let (lr, b1, b2, eps) = (self.lr, self.beta1, self.beta2, self.eps);
        let mut keys: Vec<_> = grads.keys().copied().collect();
        keys.sort();
        for key in keys {
            let g = &grads[&key];
            let Some(store) = stores.iter_mut().find(|s| s.group == key.group) else {
                continue;
            };
            let (m, v) = self
                .moments
                .entry(key)
                .or_insert_with(|| (Array2::zeros(g.dim()), Array2::zeros(g.dim())));
            let p = store.get_mut(key);
            ndarray::Zip::from(p)
                .and(m)
                .and(v)
                .and(g)
                .for_each(|p, m, v, g| {
                    *m = b1 * *m + (1.0 - b1) * g;
                    *v = b2 * *v + (1.0 - b2) * g * g;
                    let mhat = *m / bc1;
                    let vhat = *v / bc2;
                    *p -= lr * mhat / (vhat.sqrt() + eps);
                });
        }
    }
}

/// Sums gradient maps; used to average over a mini-batch.
pub fn accumulate(into: &mut HashMap<ParamKey, Array2<f64>>, from: HashMap<ParamKey, Array2<f64>>) {
    for (k, g) in from {
        into.entry(k).and_modify(|e| *e += &g).or_insert(g);
    }
}

pub fn scale_grads(grads: &mut HashMap<ParamKey, Array2<f64>>, by: f64) {
    for g in grads.values_mut() {
        g.mapv_inplace(|v| v * by);
    }
}

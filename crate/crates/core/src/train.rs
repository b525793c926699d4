//! Mini-batch training loop shared by the learned models.

use std::collections::HashMap;

use ndarray::Array2;
use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::TrainConfig;
use crate::error::{Error, Result};
use crate::nn::{accumulate, Adam, ParamKey, ParamStore, Tape, Var};

/// What the best epoch was chosen on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Monitor {
    Validation,
    Training,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    /// Objective of the very first mini-batch, before any update.
    pub first_batch_loss: f64,
    /// Mean mini-batch objective per epoch.
    pub train_loss: Vec<f64>,
    /// Objective on the monitored split after each epoch.
    pub monitor_loss: Vec<f64>,
    pub monitor: Monitor,
    /// 1-based epoch whose parameters were kept.
    pub best_epoch: usize,
    pub train_size: usize,
    pub validation_size: usize,
}

/// A model that can be fit by [`fit`].
pub(crate) trait Objective: Clone {
    type Example;

    /// `weight ·` loss of one example, recorded on `tape`.
    fn example_loss(&self, tape: &mut Tape, x: &Self::Example, weight: f64) -> Result<Var>;

    /// Regularization term added once per batch.
    fn penalty(&self, tape: &mut Tape) -> Option<Var>;

    fn stores_mut(&mut self) -> Vec<&mut ParamStore>;
}

/// Splits `0..n` into (train, validation) index sets.
pub(crate) fn holdout(n: usize, fraction: f64, rng: &mut ChaCha8Rng) -> (Vec<usize>, Vec<usize>) {
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(rng);
    let n_val = ((n as f64) * fraction).floor() as usize;
    let n_val = if n_val >= n { 0 } else { n_val };
    let val = idx.split_off(n - n_val);
    (idx, val)
}

/// Per-example weights `N / (K · count(class))`, or all ones.
pub(crate) fn class_weights(labels: &[usize], k: usize, balanced: bool) -> Vec<f64> {
    if !balanced {
        return vec![1.0; labels.len()];
    }
    let mut counts = vec![0usize; k];
    for &l in labels {
        counts[l] += 1;
    }
    let n = labels.len() as f64;
    labels
        .iter()
        .map(|&l| n / (k as f64 * counts[l] as f64))
        .collect()
}

type GradMap = HashMap<ParamKey, Array2<f64>>;

fn batch<M: Objective>(model: &M, items: &[&(M::Example, f64)]) -> Result<(f64, GradMap)> {
    let scale = 1.0 / items.len() as f64;
    let mut total = 0.0;
    let mut grads = GradMap::new();
    for (x, w) in items {
        let mut tape = Tape::new();
        let loss = model.example_loss(&mut tape, x, w * scale)?;
        total += tape.scalar(loss);
        accumulate(&mut grads, tape.backward(loss).into_params());
    }
    let mut tape = Tape::new();
    if let Some(p) = model.penalty(&mut tape) {
        total += tape.scalar(p);
        accumulate(&mut grads, tape.backward(p).into_params());
    }
    if !total.is_finite() {
        return Err(Error::NonFinite("training loss"));
    }
    Ok((total, grads))
}

/// Mean weighted loss over `items` plus the penalty, without gradients.
pub(crate) fn objective<M: Objective>(model: &M, items: &[(M::Example, f64)]) -> Result<f64> {
    let mut total = 0.0;
    for (x, w) in items {
        let mut tape = Tape::new();
        let loss = model.example_loss(&mut tape, x, *w)?;
        total += tape.scalar(loss);
    }
    let mut tape = Tape::new();
    let penalty = model.penalty(&mut tape).map_or(0.0, |p| tape.scalar(p));
    Ok(total / items.len().max(1) as f64 + penalty)
}

/// Adam over shuffled mini-batches; keeps the parameters of the epoch with
/// the lowest monitored objective.
pub(crate) fn fit<M: Objective>(
    model: &mut M,
    train: &[(M::Example, f64)],
    validation: &[(M::Example, f64)],
    config: &TrainConfig,
    rng: &mut ChaCha8Rng,
) -> Result<TrainReport> {
    if train.is_empty() {
        return Err(Error::InvalidInput("empty training set".into()));
    }
    let monitor = if validation.is_empty() {
        Monitor::Training
    } else {
        Monitor::Validation
    };
    let mut adam = Adam::new(config.lr);
    let mut order: Vec<usize> = (0..train.len()).collect();
    let mut first_batch_loss = None;
    let mut train_loss = Vec::with_capacity(config.epochs);
    let mut monitor_loss = Vec::with_capacity(config.epochs);
    let mut best: Option<(f64, usize, M)> = None;

    for epoch in 1..=config.epochs {
        order.shuffle(rng);
        let mut sum = 0.0;
        let mut batches = 0;
        for chunk in order.chunks(config.batch_size) {
            let items: Vec<_> = chunk.iter().map(|&i| &train[i]).collect();
            let (loss, grads) = batch(model, &items)?;
            first_batch_loss.get_or_insert(loss);
            sum += loss;
            batches += 1;
            adam.step(&mut model.stores_mut(), &grads);
        }
        train_loss.push(sum / batches as f64);
        let watched = match monitor {
            Monitor::Validation => objective(model, validation)?,
            Monitor::Training => objective(model, train)?,
        };
        log::debug!("epoch {epoch}: train {:.5} monitored {watched:.5}", sum / batches as f64);
        monitor_loss.push(watched);
        if best.as_ref().map_or(true, |(b, _, _)| watched < *b) {
            best = Some((watched, epoch, model.clone()));
        }
    }
    let (_, best_epoch, best_model) = best.expect("at least one epoch");
    *model = best_model;
    Ok(TrainReport {
        first_batch_loss: first_batch_loss.unwrap_or(f64::NAN),
        train_loss,
        monitor_loss,
        monitor,
        best_epoch,
        train_size: train.len(),
        validation_size: validation.len(),
    })
}

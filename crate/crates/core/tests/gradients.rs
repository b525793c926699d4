//! Analytic gradients against central finite differences.

mod common;

use abspec::absa::{HeadVariant, SpecificityHead};
use abspec::config::TrainConfig;
use abspec::encoder::{EncoderInput, MiniEncoder, MiniEncoderConfig, Vocab};
use abspec::linking::{Distance, PairClassifier, SiameseModel, YES};
use abspec::nn::{ParamKey, ParamStore, Tape};
use common::{numeric_grad, rel_err};
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const INSTANCES: usize = 20;
const TOL: f64 = 1e-4;

fn random(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Array2<f64> {
    Array2::from_shape_fn((rows, cols), |_| rng.gen_range(-1.0..1.0))
}

fn randomize(store: &mut ParamStore, rng: &mut ChaCha8Rng) {
    let keys: Vec<ParamKey> = store.keys().collect();
    for k in keys {
        let (r, c) = store.get(k).dim();
        *store.get_mut(k) = random(rng, r, c);
    }
}

fn head_loss(head: &SpecificityHead, hidden: &Array2<f64>, n: usize, m: usize, target: usize, l2: f64) -> (Tape, abspec::nn::Var, abspec::nn::Var) {
    let mut tape = Tape::new();
    let h = tape.leaf(hidden.clone());
    let logits = head.forward(&mut tape, h, n, m).unwrap();
    let ce = tape.softmax_cross_entropy(logits, target, 1.0);
    let pen = head.penalty(&mut tape);
    let pen = tape.scale(pen, l2);
    let loss = tape.add(ce, pen);
    (tape, loss, h)
}

#[test]
fn specificity_head_gradients() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for inst in 0..INSTANCES {
        let variant = HeadVariant::ALL[inst % HeadVariant::ALL.len()];
        let (n, m, d) = (rng.gen_range(1..6), rng.gen_range(1..4), rng.gen_range(2..6));
        let target = rng.gen_range(0..3);
        let l2 = 0.05;
        let mut head = SpecificityHead::new(variant, d);
        randomize(&mut head.store, &mut rng);
        let hidden = random(&mut rng, n + m + 2, d);

        let (tape, loss, h) = head_loss(&head, &hidden, n, m, target, l2);
        let grads = tape.backward(loss);
        let analytic = grads.wrt(h).unwrap().clone();
        let numeric = numeric_grad(&hidden, |x| {
            let (t, l, _) = head_loss(&head, x, n, m, target, l2);
            t.scalar(l)
        });
        let err = rel_err(&analytic, &numeric);
        assert!(err < TOL, "{variant:?} hidden: {err}");

        for key in head.store.keys().collect::<Vec<_>>() {
            let analytic = grads.param(key).unwrap().clone();
            let numeric = numeric_grad(head.store.get(key), |x| {
                let mut probe = head.clone();
                *probe.store.get_mut(key) = x.clone();
                let (t, l, _) = head_loss(&probe, &hidden, n, m, target, l2);
                t.scalar(l)
            });
            let err = rel_err(&analytic, &numeric);
            assert!(err < TOL, "{variant:?} param: {err}");
        }
    }
}

fn tiny_encoder(seed: u64) -> MiniEncoder {
    let vocab = Vocab::build(["the 6e10 antibody was nonspecific rrid ab_1 obtained from vendor"], 1, 100);
    let config = MiniEncoderConfig {
        d_model: 4,
        n_heads: 2,
        n_layers: 1,
        d_ff: 6,
        max_len: 16,
    };
    MiniEncoder::new(config, vocab, seed).unwrap()
}

#[test]
fn pair_head_gradients() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let cfg = TrainConfig::default();
    for _ in 0..INSTANCES {
        let mut model = PairClassifier::new(tiny_encoder(rng.gen()), &cfg);
        randomize(&mut model.store, &mut rng);
        let rows = rng.gen_range(3..9);
        let hidden = random(&mut rng, rows, 4);
        let target = if rng.gen_bool(0.5) { YES } else { 1 - YES };
        let run = |m: &PairClassifier, x: &Array2<f64>| {
            let mut tape = Tape::new();
            let h = tape.leaf(x.clone());
            let logits = m.head_logits(&mut tape, h).unwrap();
            let loss = tape.softmax_cross_entropy(logits, target, 1.0);
            (tape, loss, h)
        };
        let (tape, loss, h) = run(&model, &hidden);
        let grads = tape.backward(loss);
        let err = rel_err(grads.wrt(h).unwrap(), &numeric_grad(&hidden, |x| {
            let (t, l, _) = run(&model, x);
            t.scalar(l)
        }));
        assert!(err < TOL, "pair hidden: {err}");
        for key in model.store.keys().collect::<Vec<_>>() {
            let numeric = numeric_grad(model.store.get(key), |x| {
                let mut probe = model.clone();
                *probe.store.get_mut(key) = x.clone();
                let (t, l, _) = run(&probe, &hidden);
                t.scalar(l)
            });
            let err = rel_err(grads.param(key).unwrap(), &numeric);
            assert!(err < TOL, "pair param: {err}");
        }
    }
}

#[test]
fn pair_classifier_gradients_through_encoder() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let cfg = TrainConfig::default();
    for _ in 0..INSTANCES {
        let mut model = PairClassifier::new(tiny_encoder(rng.gen()), &cfg);
        randomize(&mut model.store, &mut rng);
        let vocab = model.encoder.vocab.len();
        let a: Vec<usize> = (0..rng.gen_range(1..5)).map(|_| rng.gen_range(3..vocab)).collect();
        let b: Vec<usize> = (0..rng.gen_range(1..4)).map(|_| rng.gen_range(3..vocab)).collect();
        let input = EncoderInput::new(&a, &b, 16).unwrap();
        let target = rng.gen_range(0..2);
        let run = |m: &PairClassifier| {
            let mut tape = Tape::new();
            let h = m.encoder.forward(&mut tape, &input).unwrap();
            let logits = m.head_logits(&mut tape, h).unwrap();
            let loss = tape.softmax_cross_entropy(logits, target, 1.0);
            (tape, loss)
        };
        let (tape, loss) = run(&model);
        let grads = tape.backward(loss);
        let keys: Vec<ParamKey> = model.encoder.store.keys().collect();
        for key in keys {
            let analytic = grads
                .param(key)
                .cloned()
                .unwrap_or_else(|| Array2::zeros(model.encoder.store.get(key).dim()));
            let numeric = numeric_grad(model.encoder.store.get(key), |x| {
                let mut probe = model.clone();
                *probe.encoder.store.get_mut(key) = x.clone();
                let (t, l) = run(&probe);
                t.scalar(l)
            });
            let err = rel_err(&analytic, &numeric);
            let name = &model.encoder.store.iter().find(|(k, _)| *k == key).unwrap().1.name;
            assert!(err < TOL, "encoder param {name}: {err}");
        }
    }
}

#[test]
fn siamese_gradients() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let vocab = Vocab::build(["anti gfap 6e10 antibody rabbit mouse used at dilution rrid ab_7"], 1, 100);
    for inst in 0..INSTANCES {
        let cfg = TrainConfig {
            seed: rng.gen(),
            lstm_hidden: 3,
            siamese_embedding: 3,
            distance: if inst % 2 == 0 { Distance::Manhattan } else { Distance::Euclidean },
            ..TrainConfig::default()
        };
        let model = SiameseModel::new(vocab.clone(), &cfg);
        let a: Vec<usize> = (0..rng.gen_range(1..5)).map(|_| rng.gen_range(3..vocab.len())).collect();
        let b: Vec<usize> = (0..rng.gen_range(1..5)).map(|_| rng.gen_range(3..vocab.len())).collect();
        let yes = inst % 4 < 2;
        let run = |m: &SiameseModel| {
            let mut tape = Tape::new();
            let loss = m.loss_on(&mut tape, &a, &b, yes, 1.0).unwrap();
            (tape, loss)
        };
        let (tape, loss) = run(&model);
        let grads = tape.backward(loss);
        for key in model.store.keys().collect::<Vec<_>>() {
            let analytic = grads
                .param(key)
                .cloned()
                .unwrap_or_else(|| Array2::zeros(model.store.get(key).dim()));
            let numeric = numeric_grad(model.store.get(key), |x| {
                let mut probe = model.clone();
                *probe.store.get_mut(key) = x.clone();
                let (t, l) = run(&probe);
                t.scalar(l)
            });
            let err = rel_err(&analytic, &numeric);
            assert!(err < TOL, "{:?} siamese param: {err}", cfg.distance);
        }
    }
}

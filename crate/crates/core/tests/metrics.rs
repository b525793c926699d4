use abspec::eval::{
    aggregate, cohen_kappa, f1, joint_eval, kfold_split, linear_weights, prf1, stratified_kfold_split,
    weighted_kappa, ClassCounts, CrossValidation, EvalReport, JointItem,
};
use abspec::{Error, SpecificityLabel};
use approx::assert_abs_diff_eq;
use ndarray::Array2;
use proptest::prelude::*;

/// P, R and F1 for class `c` straight from a confusion matrix.
fn oracle(confusion: &[[usize; 3]; 3], c: usize) -> (f64, f64, f64) {
    let tp = confusion[c][c];
    let predicted: usize = (0..3).map(|t| confusion[t][c]).sum();
    let actual: usize = confusion[c].iter().sum();
    let p = if predicted == 0 { 0.0 } else { tp as f64 / predicted as f64 };
    let r = if actual == 0 { 0.0 } else { tp as f64 / actual as f64 };
    let f = if p + r == 0.0 { 0.0 } else { 2.0 * p * r / (p + r) };
    (p, r, f)
}

proptest! {
    #[test]
    fn metrics_match_confusion_matrix_oracle(pairs in proptest::collection::vec((0usize..3, 0usize..3), 1..=50)) {
        let truth: Vec<usize> = pairs.iter().map(|p| p.0).collect();
        let pred: Vec<usize> = pairs.iter().map(|p| p.1).collect();
        let mut confusion = [[0usize; 3]; 3];
        for (&t, &p) in truth.iter().zip(&pred) {
            confusion[t][p] += 1;
        }
        let report = EvalReport::multiclass("t", &["a", "b", "c"], &truth, &pred).unwrap();
        let mut f1s = Vec::new();
        let mut supports = Vec::new();
        for c in 0..3 {
            let (p, r, f) = oracle(&confusion, c);
            let got = &report.classes[c].scores;
            prop_assert_eq!(got.precision, p);
            prop_assert_eq!(got.recall, r);
            prop_assert_eq!(got.f1, f);
            f1s.push(f);
            supports.push(confusion[c].iter().sum::<usize>());
        }
        let macro_f1 = f1s.iter().sum::<f64>() / 3.0;
        let total: usize = supports.iter().sum();
        let weighted = f1s.iter().zip(&supports).map(|(f, &s)| f * s as f64).sum::<f64>() / total as f64;
        prop_assert_eq!(report.macro_f1, macro_f1);
        prop_assert_eq!(report.weighted_f1, weighted);
        let correct = (0..3).map(|c| confusion[c][c]).sum::<usize>();
        prop_assert_eq!(report.accuracy, Some(correct as f64 / truth.len() as f64));
    }

    #[test]
    fn kfold_is_a_partition(n in 2usize..200, k in 2usize..=10, seed in any::<u64>()) {
        prop_assume!(k <= n);
        let folds = kfold_split(n, k, seed).unwrap();
        prop_assert_eq!(folds.len(), k);
        let mut all: Vec<usize> = folds.iter().flatten().copied().collect();
        all.sort_unstable();
        prop_assert_eq!(all, (0..n).collect::<Vec<_>>());
        let sizes: Vec<usize> = folds.iter().map(Vec::len).collect();
        prop_assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
        prop_assert_eq!(folds, kfold_split(n, k, seed).unwrap());
    }

    #[test]
    fn stratified_kfold_is_a_partition(labels in proptest::collection::vec(0usize..3, 10..80), k in 2usize..=5, seed in any::<u64>()) {
        let folds = stratified_kfold_split(&labels, k, seed).unwrap();
        let mut all: Vec<usize> = folds.iter().flatten().copied().collect();
        all.sort_unstable();
        prop_assert_eq!(all, (0..labels.len()).collect::<Vec<_>>());
    }
}

#[test]
fn nonspecific_row_back_solved_counts() {
    let p = prf1(ClassCounts::new(81, 20, 6));
    assert_abs_diff_eq!(p.precision, 0.802, epsilon = 1e-3);
    assert_abs_diff_eq!(p.recall, 0.931, epsilon = 1e-3);
    assert_abs_diff_eq!(p.f1, 0.862, epsilon = 1e-3);
    let p = prf1(ClassCounts::new(0, 0, 5));
    assert_eq!((p.precision, p.recall, p.f1), (0.0, 0.0, 0.0));
    assert!(p.precision_undefined);
}

#[test]
fn published_aggregates() {
    let (m, w) = aggregate(&[0.958, 0.832, 0.750], &[2110, 266, 263]).unwrap();
    assert_abs_diff_eq!(m, 0.847, epsilon = 1e-3);
    assert_abs_diff_eq!(w, 0.925, epsilon = 1e-3);
    let (m, w) = aggregate(&[0.862, 0.752, 0.932], &[87, 76, 937]).unwrap();
    assert_abs_diff_eq!(m, 0.848, epsilon = 1e-3);
    assert_abs_diff_eq!(w, 0.914, epsilon = 1e-3);
    assert_abs_diff_eq!(f1(0.914, 0.932), 0.923, epsilon = 1e-3);
    assert_eq!(f1(0.0, 0.0), 0.0);
    let (m, w) = aggregate(&[0.5], &[4]).unwrap();
    assert_eq!((m, w), (0.5, 0.5));
    assert!(aggregate(&[], &[]).is_err());
}

fn items(spec: &[(usize, bool, SpecificityLabel)]) -> Vec<JointItem> {
    spec.iter()
        .flat_map(|&(n, link, label)| std::iter::repeat(JointItem { link, label }).take(n))
        .collect()
}

#[test]
fn joint_counts_reproduce_published_aggregates() {
    use SpecificityLabel::*;
    // Per class: hits, truth-only, predicted-only; totals 87/101, 76/81, 937/924.
    let rows = [(Nonspecific, 81, 87, 101), (Neutral, 59, 76, 81), (Specific, 867, 937, 924)];
    let mut truth = Vec::new();
    let mut pred = Vec::new();
    for (label, hit, t, p) in rows {
        truth.extend(items(&[(hit, true, label), (t - hit, true, label), (p - hit, false, label)]));
        pred.extend(items(&[(hit, true, label), (t - hit, false, label), (p - hit, true, label)]));
    }
    let r = joint_eval(&truth, &pred).unwrap();
    let got: Vec<(usize, usize)> = r.classes.iter().map(|c| (c.truth, c.predicted)).collect();
    assert_eq!(got, [(87, 101), (76, 81), (937, 924)]);
    assert_abs_diff_eq!(r.macro_f1, 0.848, epsilon = 1e-3);
    assert_abs_diff_eq!(r.weighted_f1, 0.914, epsilon = 1e-3);
    assert!(r.render_table().contains("weighted"));
}

#[test]
fn joint_identity_and_all_no() {
    use SpecificityLabel::*;
    let truth = items(&[(3, true, Nonspecific), (2, true, Neutral), (4, true, Specific), (5, false, Specific)]);
    let r = joint_eval(&truth, &truth).unwrap();
    assert!(r.classes.iter().all(|c| c.scores.f1 == 1.0));
    let none: Vec<JointItem> = truth.iter().map(|t| JointItem { link: false, ..*t }).collect();
    let r = joint_eval(&truth, &none).unwrap();
    assert!(r.classes.iter().all(|c| c.scores.recall == 0.0));
    assert!(joint_eval(&truth, &truth[1..]).is_err());
}

#[test]
fn cross_validation_pools_and_averages() {
    let f1 = EvalReport::binary("link", &[true, false], &[true, false]).unwrap().with_fold(0);
    let f2 = EvalReport::binary("link", &[true, true], &[false, true]).unwrap().with_fold(1);
    let cv = CrossValidation::new(vec![f1.clone(), f2.clone()]).unwrap();
    assert_eq!(cv.pooled.n, 4);
    assert_eq!(cv.mean_macro_f1, (f1.macro_f1 + f2.macro_f1) / 2.0);
    assert_eq!(cv.mean_accuracy, Some(0.75));
    assert_eq!(cv.pooled.accuracy, Some(0.75));
}

#[test]
fn kappa_suite() {
    assert_eq!(cohen_kappa(&[0, 1, 2, 1], &[0, 1, 2, 1], 3).unwrap(), 1.0);
    let a1 = [vec![0; 5], vec![1; 5]].concat();
    let a2 = [vec![1; 5], vec![0; 5]].concat();
    assert_eq!(cohen_kappa(&a1, &a2, 2).unwrap(), -1.0);

    let x = [0, 0, 1, 2, 2, 1, 0, 2, 1, 1];
    let y = [0, 1, 1, 2, 1, 1, 0, 2, 0, 2];
    let identity = weighted_kappa(&x, &y, &Array2::eye(3)).unwrap();
    assert_eq!(identity, cohen_kappa(&x, &y, 3).unwrap());

    // Hand computation: p_o = 6/10; marginals (3,4,3) and (3,4,3) give p_e = 0.34.
    assert_abs_diff_eq!(identity, (0.6 - 0.34) / (1.0 - 0.34), epsilon = 1e-12);
    let lin = weighted_kappa(&x, &y, &linear_weights(3)).unwrap();
    assert!(lin > identity);
    assert!(matches!(cohen_kappa(&[2, 2], &[2, 2], 3), Err(Error::UndefinedKappa)));
}

//! Precision/recall/F1, macro and weighted aggregates, k-fold splits, the
//! joint (link + class) evaluation and chance-corrected agreement.

mod kappa;
mod kfold;

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::absa::SpecificityLabel;
use crate::error::{Error, Result};

pub use kappa::{cohen_kappa, linear_weights, weighted_kappa};
pub use kfold::{kfold_split, stratified_kfold_split};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassCounts {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl ClassCounts {
    pub fn new(tp: usize, fp: usize, fn_: usize) -> Self {
        ClassCounts { tp, fp, fn_ }
    }

    /// Instances of the class in the ground truth.
    pub fn support(&self) -> usize {
        self.tp + self.fn_
    }

    pub fn predicted(&self) -> usize {
        self.tp + self.fp
    }

    fn add(&mut self, other: &ClassCounts) {
        self.tp += other.tp;
        self.fp += other.fp;
        self.fn_ += other.fn_;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prf1 {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Nothing was predicted for the class, so precision was set to 0.
    pub precision_undefined: bool,
    /// The class never occurs in the truth, so recall was set to 0.
    pub recall_undefined: bool,
}

/// Harmonic mean of precision and recall; 0 when both are 0.
pub fn f1(precision: f64, recall: f64) -> f64 {
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

pub fn prf1(c: ClassCounts) -> Prf1 {
    let ratio = |num: usize, den: usize| {
        if den == 0 {
            (0.0, true)
        } else {
            (num as f64 / den as f64, false)
        }
    };
    let (precision, precision_undefined) = ratio(c.tp, c.predicted());
    let (recall, recall_undefined) = ratio(c.tp, c.support());
    let f1 = f1(precision, recall);
    Prf1 {
        precision,
        recall,
        f1,
        precision_undefined,
        recall_undefined,
    }
}

/// `(macro F1, support-weighted F1)`.
pub fn aggregate(f1s: &[f64], supports: &[usize]) -> Result<(f64, f64)> {
    if f1s.is_empty() || f1s.len() != supports.len() {
        return Err(Error::InvalidInput(format!(
            "need matching non-empty F1 and support lists, got {} and {}",
            f1s.len(),
            supports.len()
        )));
    }
    let macro_f1 = f1s.iter().sum::<f64>() / f1s.len() as f64;
    let total: usize = supports.iter().sum();
    let weighted = if total == 0 {
        0.0
    } else {
        f1s.iter()
            .zip(supports)
            .map(|(f, &s)| f * s as f64)
            .sum::<f64>()
            / total as f64
    };
    Ok((macro_f1, weighted))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub class: String,
    pub counts: ClassCounts,
    pub truth: usize,
    pub predicted: usize,
    #[serde(flatten)]
    pub scores: Prf1,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub task: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fold: Option<usize>,
    pub classes: Vec<ClassMetrics>,
    pub macro_f1: f64,
    pub weighted_f1: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub accuracy: Option<f64>,
    /// Items scored and, for tasks with accuracy, how many were right.
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub correct: Option<usize>,
}

impl EvalReport {
    pub fn from_counts(task: &str, names: &[&str], counts: &[ClassCounts], n: usize, correct: Option<usize>) -> Result<Self> {
        if names.len() != counts.len() {
            return Err(Error::InvalidInput("one name per class required".into()));
        }
        let classes: Vec<ClassMetrics> = names
            .iter()
            .zip(counts)
            .map(|(name, c)| ClassMetrics {
                class: name.to_string(),
                counts: *c,
                truth: c.support(),
                predicted: c.predicted(),
                scores: prf1(*c),
            })
            .collect();
        let f1s: Vec<f64> = classes.iter().map(|c| c.scores.f1).collect();
        let supports: Vec<usize> = classes.iter().map(|c| c.truth).collect();
        let (macro_f1, weighted_f1) = aggregate(&f1s, &supports)?;
        Ok(EvalReport {
            task: task.to_string(),
            fold: None,
            classes,
            macro_f1,
            weighted_f1,
            accuracy: correct.map(|c| if n == 0 { 0.0 } else { c as f64 / n as f64 }),
            n,
            correct,
        })
    }

    /// Single-label multi-class report from class indices.
    pub fn multiclass(task: &str, names: &[&str], truth: &[usize], pred: &[usize]) -> Result<Self> {
        check_lengths(truth.len(), pred.len())?;
        let k = names.len();
        if let Some(bad) = truth.iter().chain(pred).find(|&&l| l >= k) {
            return Err(Error::InvalidInput(format!("class index {bad} out of range")));
        }
        let mut counts = vec![ClassCounts::default(); k];
        let mut correct = 0;
        for (&t, &p) in truth.iter().zip(pred) {
            if t == p {
                counts[t].tp += 1;
                correct += 1;
            } else {
                counts[p].fp += 1;
                counts[t].fn_ += 1;
            }
        }
        Self::from_counts(task, names, &counts, truth.len(), Some(correct))
    }

    pub fn specificity(truth: &[SpecificityLabel], pred: &[SpecificityLabel]) -> Result<Self> {
        let t: Vec<usize> = truth.iter().map(|l| l.index()).collect();
        let p: Vec<usize> = pred.iter().map(|l| l.index()).collect();
        Self::multiclass("specificity", &LABEL_NAMES, &t, &p)
    }

    /// Yes/no report; class 0 is "yes".
    pub fn binary(task: &str, truth: &[bool], pred: &[bool]) -> Result<Self> {
        let t: Vec<usize> = truth.iter().map(|&y| usize::from(!y)).collect();
        let p: Vec<usize> = pred.iter().map(|&y| usize::from(!y)).collect();
        Self::multiclass(task, &["yes", "no"], &t, &p)
    }

    pub fn class(&self, name: &str) -> Option<&ClassMetrics> {
        self.classes.iter().find(|c| c.class == name)
    }

    pub fn with_fold(mut self, fold: usize) -> Self {
        self.fold = Some(fold);
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Aligned text table: one row per class, then the aggregates.
    pub fn render_table(&self) -> String {
        let mut out = String::new();
        let title = match self.fold {
            Some(f) => format!("{} (fold {f})", self.task),
            None => self.task.clone(),
        };
        let _ = writeln!(out, "{title}");
        let _ = writeln!(
            out,
            "{:<14}{:>8}{:>11}{:>11}{:>8}{:>8}",
            "class", "truth", "predicted", "precision", "recall", "f1"
        );
        for c in &self.classes {
            let _ = writeln!(
                out,
                "{:<14}{:>8}{:>11}{:>11.3}{:>8.3}{:>8.3}",
                c.class, c.truth, c.predicted, c.scores.precision, c.scores.recall, c.scores.f1
            );
        }
        let _ = writeln!(out, "{:<52}{:>8.3}", "macro F1", self.macro_f1);
        let _ = writeln!(out, "{:<52}{:>8.3}", "weighted F1", self.weighted_f1);
        if let Some(a) = self.accuracy {
            let _ = writeln!(out, "{:<52}{:>8.3}", "accuracy", a);
        }
        out
    }
}

pub const LABEL_NAMES: [&str; 3] = ["nonspecific", "neutral", "specific"];

fn check_lengths(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::InvalidInput(format!(
            "truth has {a} items but predictions have {b}"
        )));
    }
    Ok(())
}

/// Per-fold reports plus two summaries: metrics over the pooled counts and
/// the mean of the per-fold metrics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossValidation {
    pub folds: Vec<EvalReport>,
    pub pooled: EvalReport,
    pub mean_macro_f1: f64,
    pub mean_weighted_f1: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean_accuracy: Option<f64>,
}

impl CrossValidation {
    pub fn new(folds: Vec<EvalReport>) -> Result<Self> {
        let first = folds
            .first()
            .ok_or_else(|| Error::InvalidInput("no folds to summarize".into()))?;
        let names: Vec<&str> = first.classes.iter().map(|c| c.class.as_str()).collect();
        let mut counts = vec![ClassCounts::default(); names.len()];
        let mut n = 0;
        let mut correct = first.correct.map(|_| 0);
        for f in &folds {
            if f.classes.len() != names.len() {
                return Err(Error::InvalidInput("folds disagree on the class list".into()));
            }
            for (total, c) in counts.iter_mut().zip(&f.classes) {
                total.add(&c.counts);
            }
            n += f.n;
            if let (Some(total), Some(c)) = (correct.as_mut(), f.correct) {
                *total += c;
            }
        }
        let pooled = EvalReport::from_counts(&first.task, &names, &counts, n, correct)?;
        let k = folds.len() as f64;
        let mean_accuracy = folds
            .iter()
            .map(|f| f.accuracy)
            .sum::<Option<f64>>()
            .map(|s| s / k);
        Ok(CrossValidation {
            mean_macro_f1: folds.iter().map(|f| f.macro_f1).sum::<f64>() / k,
            mean_weighted_f1: folds.iter().map(|f| f.weighted_f1).sum::<f64>() / k,
            mean_accuracy,
            pooled,
            folds,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("summary serializes")
    }

    pub fn render_table(&self) -> String {
        let mut out = String::new();
        for f in &self.folds {
            out.push_str(&f.render_table());
            out.push('\n');
        }
        out.push_str("pooled over folds\n");
        out.push_str(&self.pooled.render_table());
        let _ = writeln!(out, "{:<52}{:>8.3}", "mean of fold macro F1", self.mean_macro_f1);
        let _ = writeln!(out, "{:<52}{:>8.3}", "mean of fold weighted F1", self.mean_weighted_f1);
        if let Some(a) = self.mean_accuracy {
            let _ = writeln!(out, "{:<52}{:>8.3}", "mean of fold accuracy", a);
        }
        out
    }
}

/// Link decision and specificity class for one (specificity snippet, RRID
/// snippet) pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct JointItem {
    pub link: bool,
    pub label: SpecificityLabel,
}

/// A pair counts as a true positive for class `C` when both sides link it
/// and both assign `C`. Truth and predicted totals per class count linked
/// pairs with that class.
pub fn joint_eval(truth: &[JointItem], pred: &[JointItem]) -> Result<EvalReport> {
    check_lengths(truth.len(), pred.len())?;
    let mut counts = [ClassCounts::default(); 3];
    for (t, p) in truth.iter().zip(pred) {
        let hit = t.link && p.link && t.label == p.label;
        if hit {
            counts[t.label.index()].tp += 1;
            continue;
        }
        if p.link {
            counts[p.label.index()].fp += 1;
        }
        if t.link {
            counts[t.label.index()].fn_ += 1;
        }
    }
    EvalReport::from_counts("joint", &LABEL_NAMES, &counts, truth.len(), None)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degenerate_counts() {
        let p = prf1(ClassCounts::new(0, 0, 5));
        assert_eq!((p.precision, p.recall, p.f1), (0.0, 0.0, 0.0));
        assert!(p.precision_undefined && !p.recall_undefined);
        let p = prf1(ClassCounts::new(7, 0, 0));
        assert_eq!((p.precision, p.recall, p.f1), (1.0, 1.0, 1.0));
    }

    #[test]
    fn multiclass_counts() {
        let r = EvalReport::multiclass("t", &["a", "b"], &[0, 0, 1, 1], &[0, 1, 1, 1]).unwrap();
        assert_eq!(r.classes[0].counts, ClassCounts::new(1, 0, 1));
        assert_eq!(r.classes[1].counts, ClassCounts::new(2, 1, 0));
        assert_eq!(r.accuracy, Some(0.75));
        assert!(EvalReport::multiclass("t", &["a"], &[0], &[1]).is_err());
        assert!(EvalReport::multiclass("t", &["a"], &[0], &[]).is_err());
    }

    #[test]
    fn joint_identity_and_all_no() {
        use SpecificityLabel::*;
        let truth = vec![
            JointItem { link: true, label: Nonspecific },
            JointItem { link: true, label: Specific },
            JointItem { link: false, label: Neutral },
            JointItem { link: true, label: Neutral },
        ];
        let r = joint_eval(&truth, &truth).unwrap();
        assert!(r.classes.iter().all(|c| c.scores.f1 == 1.0));
        let none: Vec<_> = truth.iter().map(|t| JointItem { link: false, ..*t }).collect();
        let r = joint_eval(&truth, &none).unwrap();
        assert!(r.classes.iter().all(|c| c.scores.recall == 0.0));
        assert!(joint_eval(&truth, &truth[..2]).is_err());
    }

    #[test]
    fn cross_validation_pools_counts() {
        let a = EvalReport::binary("link", &[true, false], &[true, true]).unwrap().with_fold(0);
        let b = EvalReport::binary("link", &[true, true], &[false, true]).unwrap().with_fold(1);
        let cv = CrossValidation::new(vec![a, b]).unwrap();
        assert_eq!(cv.pooled.class("yes").unwrap().counts, ClassCounts::new(2, 1, 1));
        assert_eq!(cv.pooled.accuracy, Some(0.5));
        assert_eq!(cv.mean_accuracy, Some(0.5));
        assert!(cv.render_table().contains("pooled over folds"));
        assert!(CrossValidation::new(vec![]).is_err());
    }
}

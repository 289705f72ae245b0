//! Classifier metrics and rank utilities.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Fractional (mid) ranks, 1-based. Tied values share the mean of the ranks they span.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && values[order[j]] == values[order[i]] {
            j += 1;
        }
        // positions i..j (0-based) hold ranks i+1..=j
        let rank = (i + 1 + j) as f64 / 2.0;
        for &k in &order[i..j] {
            ranks[k] = rank;
        }
        i = j;
    }
    ranks
}

/// Area under the ROC curve via the Mann-Whitney rank sum: the probability
/// that a random positive outscores a random negative, ties counting half.
pub fn roc_auc(scores: &[f64], labels: &[bool]) -> Result<f64> {
    if scores.len() != labels.len() {
        return Err(Error::invalid("scores and labels differ in length"));
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::invalid("NaN score"));
    }
    let n_pos = labels.iter().filter(|&&l| l).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::invalid("ROC-AUC needs both classes"));
    }
    let ranks = average_ranks(scores);
    let rank_sum: f64 = ranks.iter().zip(labels).filter(|(_, &l)| l).map(|(r, _)| r).sum();
    let u = rank_sum - (n_pos * (n_pos + 1)) as f64 / 2.0;
    let pairs = n_pos as f64 * n_neg as f64;
    // Divide the smaller of U and pairs - U so that flipping the labels
    // yields exactly 1 - auc.
    if 2.0 * u <= pairs {
        Ok(u / pairs)
    } else {
        Ok(1.0 - (pairs - u) / pairs)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    pub fn_: usize,
}

impl Confusion {
    /// Positive prediction iff probability >= threshold.
    pub fn at_threshold(probs: &[f64], labels: &[bool], threshold: f64) -> Self {
        let mut c = Confusion::default();
        for (&p, &y) in probs.iter().zip(labels) {
            match (p >= threshold, y) {
                (true, true) => c.tp += 1,
                (true, false) => c.fp += 1,
                (false, false) => c.tn += 1,
                (false, true) => c.fn_ += 1,
            }
        }
        c
    }

    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }

    pub fn accuracy(&self) -> f64 {
        (self.tp + self.tn) as f64 / self.total() as f64
    }

    /// Mean of the per-class F1 scores; a class with no support and no
    /// predictions contributes 0.
    pub fn f1_macro(&self) -> f64 {
        let f1 = |tp: usize, fp: usize, fn_: usize| {
            let denom = 2 * tp + fp + fn_;
            if denom == 0 {
                0.0
            } else {
                (2 * tp) as f64 / denom as f64
            }
        };
        (f1(self.tp, self.fp, self.fn_) + f1(self.tn, self.fn_, self.fp)) / 2.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub accuracy: f64,
    pub f1_macro: f64,
    pub roc_auc: f64,
    pub confusion: Confusion,
}

/// Accuracy and macro F1 at threshold 0.5, ROC-AUC from the raw probabilities.
pub fn evaluate_scores(probs: &[f64], labels: &[bool]) -> Result<EvalReport> {
    if probs.is_empty() {
        return Err(Error::invalid("empty test set"));
    }
    let roc_auc = roc_auc(probs, labels)?;
    let confusion = Confusion::at_threshold(probs, labels, 0.5);
    Ok(EvalReport {
        accuracy: confusion.accuracy(),
        f1_macro: confusion.f1_macro(),
        roc_auc,
        confusion,
    })
}

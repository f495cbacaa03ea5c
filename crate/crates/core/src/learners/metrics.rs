// SPDX-License-Identifier: Apache-2.0

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scores {
    pub accuracy: f64,
    pub f1: f64,
}

impl Scores {
    pub fn compute(pred: &[usize], truth: &[usize], n_classes: usize) -> Result<Scores> {
        Ok(Scores {
            accuracy: accuracy(pred, truth)?,
            f1: f1_macro(pred, truth, n_classes)?,
        })
    }
}

fn check(pred: &[usize], truth: &[usize]) -> Result<()> {
    if pred.is_empty() {
        return Err(Error::invalid("empty prediction set"));
    }
    if pred.len() != truth.len() {
        return Err(Error::DimensionMismatch {
            expected: truth.len(),
            got: pred.len(),
        });
    }
    Ok(())
}

pub fn accuracy(pred: &[usize], truth: &[usize]) -> Result<f64> {
    check(pred, truth)?;
    let correct = pred.iter().zip(truth).filter(|(p, t)| p == t).count();
    Ok(correct as f64 / pred.len() as f64)
}

/// Unweighted mean of per-class F1. A class with no predictions has
/// precision 0.
pub fn f1_macro(pred: &[usize], truth: &[usize], n_classes: usize) -> Result<f64> {
    check(pred, truth)?;
    let mut tp = vec![0usize; n_classes];
    let mut fp = vec![0usize; n_classes];
    let mut fn_ = vec![0usize; n_classes];
    for (&p, &t) in pred.iter().zip(truth) {
        if p >= n_classes || t >= n_classes {
            return Err(Error::invalid(format!("class index out of range for {n_classes} classes")));
        }
        if p == t {
            tp[p] += 1;
        } else {
            fp[p] += 1;
            fn_[t] += 1;
        }
    }
    let total: f64 = (0..n_classes)
        .map(|c| {
            let precision = if tp[c] + fp[c] > 0 { tp[c] as f64 / (tp[c] + fp[c]) as f64 } else { 0.0 };
            let recall = if tp[c] + fn_[c] > 0 { tp[c] as f64 / (tp[c] + fn_[c]) as f64 } else { 0.0 };
            if precision + recall > 0.0 {
                2.0 * precision * recall / (precision + recall)
            } else {
                0.0
            }
        })
        .sum();
    Ok(total / n_classes as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect() {
        let s = Scores::compute(&[0, 1, 1], &[0, 1, 1], 2).unwrap();
        assert_eq!(s.accuracy, 1.0);
        assert_eq!(s.f1, 1.0);
    }

    #[test]
    fn constant_prediction_on_balanced_binary() {
        // class 0: P = 0.5, R = 1, F1 = 2/3; class 1: F1 = 0
        let s = Scores::compute(&[0, 0, 0, 0], &[0, 1, 0, 1], 2).unwrap();
        assert_eq!(s.accuracy, 0.5);
        assert!((s.f1 - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn empty_and_mismatched() {
        assert!(accuracy(&[], &[]).is_err());
        assert!(accuracy(&[0], &[0, 1]).is_err());
    }
}

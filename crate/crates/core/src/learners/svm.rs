// SPDX-License-Identifier: Apache-2.0

use crate::error::{Error, Result};
use crate::signalio::Dataset;
use crate::util::{argmax_f64, rng, stable_hash};
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

/// One-vs-rest linear classifier, `predict = argmax_c (W_c . x + b_c)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearSvm {
    pub weights: Vec<Vec<f64>>,
    pub bias: Vec<f64>,
    /// Training objective of the kept iterate after each epoch, one
    /// binary problem per class.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub loss_history: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SvmSettings {
    pub epochs: usize,
    /// Initial step of the `eta0 / (1 + eta0 * lambda * t)` schedule.
    pub eta0: f64,
}

impl Default for SvmSettings {
    fn default() -> Self {
        SvmSettings { epochs: 200, eta0: 0.1 }
    }
}

impl LinearSvm {
    pub fn n_classes(&self) -> usize {
        self.weights.len()
    }

    pub fn n_features(&self) -> usize {
        self.weights.first().map_or(0, Vec::len)
    }

    pub fn scores(&self, x: &[f64]) -> Vec<f64> {
        self.weights
            .iter()
            .zip(&self.bias)
            .map(|(w, b)| w.iter().zip(x).map(|(a, v)| a * v).sum::<f64>() + b)
            .collect()
    }

    pub fn predict_row(&self, x: &[f64]) -> usize {
        argmax_f64(&self.scores(x))
    }
}

fn objective(w: &[f64], b: f64, lambda: f64, ds: &Dataset, sign: &[f64]) -> f64 {
    let reg = 0.5 * lambda * w.iter().map(|v| v * v).sum::<f64>();
    let hinge: f64 = ds
        .x
        .iter()
        .zip(sign)
        .map(|(x, &s)| {
            let m = s * (w.iter().zip(x).map(|(a, v)| a * v).sum::<f64>() + b);
            (1.0 - m).max(0.0)
        })
        .sum();
    reg + hinge / ds.n_samples() as f64
}

/// Minimizes `lambda/2 |w|^2 + mean hinge` with `lambda = 1 / (C n)` by
/// per-sample subgradient steps and Polyak averaging. The model keeps the
/// averaged iterate with the lowest objective seen at an epoch boundary.
fn train_binary(ds: &Dataset, sign: &[f64], c: f64, settings: &SvmSettings, seed: u64) -> (Vec<f64>, f64, Vec<f64>) {
    let d = ds.n_features();
    let n = ds.n_samples();
    let b0 = sign.iter().sum::<f64>() / n as f64;
    if c <= 0.0 {
        // unbounded regularization pins w at zero; the bias keeps the prior
        return (vec![0.0; d], b0, Vec::new());
    }
    let lambda = 1.0 / (c * n as f64);
    let mut rng = rng(seed);
    let mut w = vec![0.0; d];
    let mut b = b0;
    let mut avg_w = w.clone();
    let mut avg_b = b;
    let mut best = (w.clone(), b, objective(&w, b, lambda, ds, sign));
    let mut history = Vec::with_capacity(settings.epochs);
    let mut order: Vec<usize> = (0..n).collect();
    let mut t = 0usize;
    for _ in 0..settings.epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            t += 1;
            let eta = settings.eta0 / (1.0 + settings.eta0 * lambda * t as f64);
            let x = &ds.x[i];
            let margin = sign[i] * (w.iter().zip(x).map(|(a, v)| a * v).sum::<f64>() + b);
            let shrink = 1.0 - eta * lambda;
            for v in w.iter_mut() {
                *v *= shrink;
            }
            if margin < 1.0 {
                for (v, xi) in w.iter_mut().zip(x) {
                    *v += eta * sign[i] * xi;
                }
                b += eta * sign[i];
            }
            let k = 1.0 / t as f64;
            for (a, v) in avg_w.iter_mut().zip(&w) {
                *a += (v - *a) * k;
            }
            avg_b += (b - avg_b) * k;
        }
        let obj = objective(&avg_w, avg_b, lambda, ds, sign);
        if obj < best.2 {
            best = (avg_w.clone(), avg_b, obj);
        }
        history.push(best.2);
    }
    (best.0, best.1, history)
}

pub fn train_svm(train: &Dataset, c: f64, settings: &SvmSettings, seed: u64) -> Result<LinearSvm> {
    if train.class_counts().iter().filter(|&&n| n > 0).count() < 2 {
        return Err(Error::invalid("svm training needs at least two classes present"));
    }
    if !(c >= 0.0) {
        return Err(Error::invalid(format!("C must be >= 0, got {c}")));
    }
    let mut weights = Vec::new();
    let mut bias = Vec::new();
    let mut loss_history = Vec::new();
    for class in 0..train.n_classes {
        let sign: Vec<f64> = train.y.iter().map(|&y| if y == class { 1.0 } else { -1.0 }).collect();
        let sub_seed = seed ^ stable_hash(&format!("svm-class-{class}"));
        let (w, b, h) = train_binary(train, &sign, c, settings, sub_seed);
        weights.push(w);
        bias.push(b);
        loss_history.push(h);
    }
    Ok(LinearSvm {
        weights,
        bias,
        loss_history,
    })
}

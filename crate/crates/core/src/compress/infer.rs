// SPDX-License-Identifier: Apache-2.0

use super::quant::{QNode, QuantizedLinear, QuantizedMlp, QuantizedModel, QuantizedTree};
use crate::error::{Error, Result};
use crate::learners::Scores;
use crate::signalio::Dataset;

fn argmax_i64(v: &[i64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[best] {
            best = i;
        }
    }
    best
}

fn tree_infer(t: &QuantizedTree, q: &[i64]) -> usize {
    let mut i = 0;
    loop {
        match t.nodes[i] {
            QNode::Leaf { class } => return class,
            QNode::Split {
                feature,
                threshold,
                left,
                right,
            } => i = if q[feature] <= threshold { left } else { right },
        }
    }
}

fn dot(w: &[i64], x: &[i64], b: i64) -> i64 {
    w.iter().zip(x).map(|(a, v)| a * v).sum::<i64>() + b
}

fn linear_infer(l: &QuantizedLinear, q: &[i64]) -> usize {
    let acc: Vec<i64> = l.weights.iter().zip(&l.bias).map(|(w, &b)| dot(w, q, b)).collect();
    argmax_i64(&acc)
}

/// Integer forward pass; returns the output-layer accumulators.
pub(crate) fn mlp_logits(m: &QuantizedMlp, q: &[i64]) -> Vec<i64> {
    let top = m.spec.input_max();
    let mut a = q.to_vec();
    for layer in &m.layers {
        let acc: Vec<i64> = layer.weights.iter().zip(&layer.bias).map(|(w, &b)| dot(w, &a, b)).collect();
        a = match layer.shift {
            Some(r) => acc.into_iter().map(|v| (v.max(0) >> r).min(top)).collect(),
            None => acc,
        };
    }
    a
}

/// Bit-exact reference for the compiled circuit. `q` holds input codes in
/// `0..2^p`.
pub fn int_inference(model: &QuantizedModel, q: &[i64]) -> Result<usize> {
    if q.len() != model.n_features() {
        return Err(Error::DimensionMismatch {
            expected: model.n_features(),
            got: q.len(),
        });
    }
    let top = model.spec().input_max();
    if let Some(v) = q.iter().find(|v| !(0..=top).contains(*v)) {
        return Err(Error::invalid(format!("input code {v} outside 0..={top}")));
    }
    Ok(match model {
        QuantizedModel::DecisionTree(t) => tree_infer(t, q),
        QuantizedModel::LinearSvm(l) => linear_infer(l, q),
        QuantizedModel::Mlp(m) => argmax_i64(&mlp_logits(m, q)),
    })
}

pub fn quantized_predict(model: &QuantizedModel, x: &[Vec<f64>]) -> Result<Vec<usize>> {
    let spec = model.spec();
    x.iter()
        .map(|row| {
            let q: Vec<i64> = row.iter().map(|&v| spec.quantize_input(v)).collect();
            int_inference(model, &q)
        })
        .collect()
}

pub fn quantized_accuracy(model: &QuantizedModel, test: &Dataset) -> Result<Scores> {
    let pred = quantized_predict(model, &test.x)?;
    Scores::compute(&pred, &test.y, test.n_classes.max(model.n_classes()))
}

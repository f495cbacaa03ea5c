// SPDX-License-Identifier: Apache-2.0

use crate::error::{Error, Result};
use crate::learners::{Algorithm, DecisionTree, LinearSvm, Mlp, Node, TrainedModel};
use serde::{Deserialize, Serialize};

pub const STANDARD_PRECISIONS: [u32; 4] = [4, 6, 8, 10];

pub fn round_half_away(v: f64) -> i64 {
    // f64::round rounds half away from zero
    v.round() as i64
}

/// Bit width `p` of inputs, activations and weights.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FixedPointSpec {
    pub precision: u32,
}

impl FixedPointSpec {
    pub fn new(precision: u32) -> Result<Self> {
        if !(2..=16).contains(&precision) {
            return Err(Error::invalid(format!("precision {precision} outside 2..=16 bits")));
        }
        Ok(FixedPointSpec { precision })
    }

    pub fn is_standard(&self) -> bool {
        STANDARD_PRECISIONS.contains(&self.precision)
    }

    /// Largest unsigned input/activation code, `2^p - 1`.
    pub fn input_max(&self) -> i64 {
        (1i64 << self.precision) - 1
    }

    /// Largest weight magnitude code, `2^(p-1) - 1`.
    pub fn weight_max(&self) -> i64 {
        (1i64 << (self.precision - 1)) - 1
    }

    pub fn input_lsb(&self) -> f64 {
        1.0 / self.input_max() as f64
    }

    pub fn quantize_input(&self, x: f64) -> i64 {
        round_half_away(x.clamp(0.0, 1.0) * self.input_max() as f64)
    }

    pub fn weight_scale<'a>(weights: impl IntoIterator<Item = &'a f64>) -> f64 {
        let m = weights.into_iter().fold(0.0f64, |m, w| m.max(w.abs()));
        if m > 0.0 {
            m
        } else {
            1.0
        }
    }

    pub fn quantize_weight(&self, w: f64, scale: f64) -> i64 {
        let wm = self.weight_max();
        round_half_away(w / scale * wm as f64).clamp(-wm, wm)
    }

    pub fn dequantize_weight(&self, q: i64, scale: f64) -> f64 {
        q as f64 * scale / self.weight_max() as f64
    }

    /// Tree thresholds live on the input grid.
    pub fn quantize_threshold(&self, t: f64) -> i64 {
        round_half_away(t * self.input_max() as f64).clamp(0, self.input_max())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum QNode {
    /// Left iff `q_x[feature] <= threshold`.
    Split {
        feature: usize,
        threshold: i64,
        left: usize,
        right: usize,
    },
    Leaf {
        class: usize,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuantizedTree {
    pub spec: FixedPointSpec,
    pub nodes: Vec<QNode>,
    pub n_features: usize,
    pub n_classes: usize,
}

/// Per-class integer weighted sums, argmax over raw accumulators.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuantizedLinear {
    pub spec: FixedPointSpec,
    pub weights: Vec<Vec<i64>>,
    pub bias: Vec<i64>,
    pub weight_scale: f64,
    pub input_lsb: f64,
    pub acc_lsb: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuantizedLayer {
    pub weights: Vec<Vec<i64>>,
    /// `false` marks a pruned weight: no multiplier exists for it.
    pub mask: Vec<Vec<bool>>,
    pub bias: Vec<i64>,
    pub weight_scale: f64,
    pub input_lsb: f64,
    pub acc_lsb: f64,
    /// Requantization right-shift; `None` on the output layer.
    pub shift: Option<u32>,
}

impl QuantizedLayer {
    pub fn n_in(&self) -> usize {
        self.weights.first().map_or(0, Vec::len)
    }

    pub fn n_out(&self) -> usize {
        self.weights.len()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuantizedMlp {
    pub spec: FixedPointSpec,
    pub layers: Vec<QuantizedLayer>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum QuantizedModel {
    DecisionTree(QuantizedTree),
    LinearSvm(QuantizedLinear),
    Mlp(QuantizedMlp),
}

impl QuantizedModel {
    pub fn spec(&self) -> FixedPointSpec {
        match self {
            QuantizedModel::DecisionTree(m) => m.spec,
            QuantizedModel::LinearSvm(m) => m.spec,
            QuantizedModel::Mlp(m) => m.spec,
        }
    }

    pub fn precision(&self) -> u32 {
        self.spec().precision
    }

    pub fn algorithm(&self) -> Algorithm {
        match self {
            QuantizedModel::DecisionTree(_) => Algorithm::Dt,
            QuantizedModel::LinearSvm(_) => Algorithm::Svm,
            QuantizedModel::Mlp(_) => Algorithm::Mlp,
        }
    }

    pub fn n_features(&self) -> usize {
        match self {
            QuantizedModel::DecisionTree(m) => m.n_features,
            QuantizedModel::LinearSvm(m) => m.weights.first().map_or(0, Vec::len),
            QuantizedModel::Mlp(m) => m.layers.first().map_or(0, QuantizedLayer::n_in),
        }
    }

    pub fn n_classes(&self) -> usize {
        match self {
            QuantizedModel::DecisionTree(m) => m.n_classes,
            QuantizedModel::LinearSvm(m) => m.weights.len(),
            QuantizedModel::Mlp(m) => m.layers.last().map_or(0, QuantizedLayer::n_out),
        }
    }

    /// Input features a netlist must expose. Trees only read the features
    /// their splits use, but the port list always covers all of them.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::invalid(format!("malformed quantized model: {m}")));
        match self {
            QuantizedModel::DecisionTree(t) => {
                if t.nodes.is_empty() {
                    return bad("tree has no nodes");
                }
                let mut parents = vec![0usize; t.nodes.len()];
                for n in &t.nodes {
                    if let QNode::Split { left, right, .. } = *n {
                        for c in [left, right] {
                            if let Some(p) = parents.get_mut(c) {
                                *p += 1;
                            }
                        }
                    }
                }
                if parents[0] != 0 || parents[1..].iter().any(|&p| p > 1) {
                    return bad("nodes do not form a tree rooted at 0");
                }
                for n in &t.nodes {
                    match *n {
                        QNode::Split {
                            feature,
                            threshold,
                            left,
                            right,
                        } => {
                            if feature >= t.n_features || left >= t.nodes.len() || right >= t.nodes.len() {
                                return bad("split references out of range");
                            }
                            if !(0..=t.spec.input_max()).contains(&threshold) {
                                return bad("threshold outside input range");
                            }
                        }
                        QNode::Leaf { class } => {
                            if class >= t.n_classes {
                                return bad("leaf class out of range");
                            }
                        }
                    }
                }
            }
            QuantizedModel::LinearSvm(l) => {
                let d = l.weights.first().map_or(0, Vec::len);
                if l.weights.len() < 2 || l.bias.len() != l.weights.len() || l.weights.iter().any(|w| w.len() != d) {
                    return bad("linear model shape");
                }
            }
            QuantizedModel::Mlp(m) => {
                if m.layers.is_empty() {
                    return bad("mlp has no layers");
                }
                for (i, l) in m.layers.iter().enumerate() {
                    let last = i + 1 == m.layers.len();
                    if l.n_out() == 0 || l.bias.len() != l.n_out() || l.mask.len() != l.n_out() {
                        return bad("layer shape");
                    }
                    if l.weights.iter().zip(&l.mask).any(|(w, mk)| w.len() != l.n_in() || mk.len() != l.n_in()) {
                        return bad("layer shape");
                    }
                    if last != l.shift.is_none() {
                        return bad("shift metadata missing or misplaced");
                    }
                    if i > 0 && m.layers[i - 1].n_out() != l.n_in() {
                        return bad("layer dimensions do not chain");
                    }
                }
                if m.layers.last().unwrap().n_out() < 2 {
                    return bad("output layer needs at least 2 classes");
                }
            }
        }
        Ok(())
    }
}

fn quantize_tree(t: &DecisionTree, spec: FixedPointSpec) -> QuantizedTree {
    QuantizedTree {
        spec,
        nodes: t
            .nodes
            .iter()
            .map(|n| match *n {
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => QNode::Split {
                    feature,
                    threshold: spec.quantize_threshold(threshold),
                    left,
                    right,
                },
                Node::Leaf { class } => QNode::Leaf { class },
            })
            .collect(),
        n_features: t.n_features,
        n_classes: t.n_classes,
    }
}

fn quantize_linear(m: &LinearSvm, spec: FixedPointSpec) -> QuantizedLinear {
    let scale = FixedPointSpec::weight_scale(m.weights.iter().flatten());
    let input_lsb = spec.input_lsb();
    let acc_lsb = input_lsb * scale / spec.weight_max() as f64;
    QuantizedLinear {
        spec,
        weights: m
            .weights
            .iter()
            .map(|w| w.iter().map(|&v| spec.quantize_weight(v, scale)).collect())
            .collect(),
        bias: m.bias.iter().map(|&b| round_half_away(b / acc_lsb)).collect(),
        weight_scale: scale,
        input_lsb,
        acc_lsb,
    }
}

/// Upper bound of each hidden layer's ReLU output, either observed on
/// calibration rows or propagated from the [0,1] input box.
fn activation_maxima(m: &Mlp, calibration: Option<&[Vec<f64>]>) -> Vec<f64> {
    let n_hidden = m.layers.len() - 1;
    match calibration {
        Some(rows) if !rows.is_empty() => {
            let mut max = vec![0.0f64; n_hidden];
            for x in rows {
                let acts = m.activations(x);
                for (l, mx) in max.iter_mut().enumerate() {
                    *mx = acts[l + 1].iter().fold(*mx, |a, &v| a.max(v));
                }
            }
            max
        }
        _ => {
            let mut upper = vec![1.0; m.n_features()];
            let mut max = Vec::with_capacity(n_hidden);
            for layer in &m.layers[..n_hidden] {
                upper = layer
                    .weights
                    .iter()
                    .zip(&layer.bias)
                    .map(|(w, b)| (w.iter().zip(&upper).map(|(a, u)| a.max(0.0) * u).sum::<f64>() + b).max(0.0))
                    .collect();
                max.push(upper.iter().copied().fold(0.0, f64::max));
            }
            max
        }
    }
}

fn quantize_mlp(m: &Mlp, spec: FixedPointSpec, calibration: Option<&[Vec<f64>]>) -> QuantizedMlp {
    let maxima = activation_maxima(m, calibration);
    let mut input_lsb = spec.input_lsb();
    let last = m.layers.len() - 1;
    let layers = m
        .layers
        .iter()
        .enumerate()
        .map(|(l, layer)| {
            let scale = FixedPointSpec::weight_scale(layer.weights.iter().flatten());
            let acc_lsb = input_lsb * scale / spec.weight_max() as f64;
            let weights = layer
                .weights
                .iter()
                .zip(&layer.mask)
                .map(|(w, mk)| {
                    w.iter()
                        .zip(mk)
                        .map(|(&v, &keep)| if keep { spec.quantize_weight(v, scale) } else { 0 })
                        .collect()
                })
                .collect();
            let bias = layer.bias.iter().map(|&b| round_half_away(b / acc_lsb)).collect();
            let shift = (l < last).then(|| {
                let target = maxima[l] / spec.input_max() as f64;
                let r = if target > 0.0 { (target / acc_lsb).log2().round() } else { 0.0 };
                r.clamp(0.0, 62.0) as u32
            });
            let q = QuantizedLayer {
                weights,
                mask: layer.mask.clone(),
                bias,
                weight_scale: scale,
                input_lsb,
                acc_lsb,
                shift,
            };
            if let Some(r) = shift {
                input_lsb = acc_lsb * (1u64 << r) as f64;
            }
            q
        })
        .collect();
    QuantizedMlp { spec, layers }
}

/// Quantizes with hidden activation ranges bounded analytically.
pub fn quantize(model: &TrainedModel, precision: u32) -> Result<QuantizedModel> {
    quantize_calibrated(model, precision, None)
}

/// Quantizes, sizing each hidden layer's requantization shift from the
/// largest activation observed on `calibration` rows when provided.
pub fn quantize_calibrated(model: &TrainedModel, precision: u32, calibration: Option<&[Vec<f64>]>) -> Result<QuantizedModel> {
    let spec = FixedPointSpec::new(precision)?;
    Ok(match model {
        TrainedModel::DecisionTree(t) => QuantizedModel::DecisionTree(quantize_tree(t, spec)),
        TrainedModel::LinearSvm(s) => QuantizedModel::LinearSvm(quantize_linear(s, spec)),
        TrainedModel::Mlp(m) => QuantizedModel::Mlp(quantize_mlp(m, spec, calibration)),
    })
}

// SPDX-License-Identifier: Apache-2.0

use crate::error::{Error, Result};
use crate::signalio::Dataset;
use crate::util::{argmax_f64, rng};
use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

/// Dense layer, `weights[out][in]`. Entries with `mask == false` are pruned
/// and held at exactly zero.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub weights: Vec<Vec<f64>>,
    pub bias: Vec<f64>,
    pub mask: Vec<Vec<bool>>,
}

impl Layer {
    pub fn n_in(&self) -> usize {
        self.weights.first().map_or(0, Vec::len)
    }

    pub fn n_out(&self) -> usize {
        self.weights.len()
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.weights
            .iter()
            .zip(&self.bias)
            .map(|(w, b)| w.iter().zip(x).map(|(a, v)| a * v).sum::<f64>() + b)
            .collect()
    }
}

/// ReLU hidden layers followed by a linear output layer of `n_classes` units.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    pub layers: Vec<Layer>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Gradients {
    pub weights: Vec<Vec<Vec<f64>>>,
    pub bias: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MlpSettings {
    pub epochs: usize,
    pub batch_size: usize,
    pub momentum: f64,
    pub val_frac: f64,
    /// Epochs without validation improvement before stopping.
    pub patience: usize,
    /// Epochs of masked retraining after pruning.
    pub retrain_epochs: usize,
}

impl Default for MlpSettings {
    fn default() -> Self {
        MlpSettings {
            epochs: 100,
            batch_size: 32,
            momentum: 0.9,
            val_frac: 0.1,
            patience: 20,
            retrain_epochs: 50,
        }
    }
}

fn log_softmax_loss(logits: &[f64], class: usize) -> (f64, Vec<f64>) {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|z| (z - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    let loss = sum.ln() + max - logits[class];
    let probs = exps.into_iter().map(|e| e / sum).collect();
    (loss, probs)
}

impl Mlp {
    /// He-normal weights, zero biases, all weights unmasked.
    pub fn init(n_features: usize, hidden: &[usize], n_classes: usize, seed: u64) -> Mlp {
        let mut rng = rng(seed);
        let mut sizes = vec![n_features];
        sizes.extend_from_slice(hidden);
        sizes.push(n_classes);
        let layers = sizes
            .windows(2)
            .map(|w| {
                let normal = Normal::new(0.0, (2.0 / w[0].max(1) as f64).sqrt()).expect("finite std");
                Layer {
                    weights: (0..w[1]).map(|_| (0..w[0]).map(|_| normal.sample(&mut rng)).collect()).collect(),
                    bias: vec![0.0; w[1]],
                    mask: vec![vec![true; w[0]]; w[1]],
                }
            })
            .collect();
        Mlp { layers }
    }

    pub fn n_features(&self) -> usize {
        self.layers.first().map_or(0, Layer::n_in)
    }

    pub fn n_classes(&self) -> usize {
        self.layers.last().map_or(0, Layer::n_out)
    }

    pub fn n_weights(&self) -> usize {
        self.layers.iter().map(|l| l.n_in() * l.n_out()).sum()
    }

    pub fn n_zero_weights(&self) -> usize {
        self.layers
            .iter()
            .flat_map(|l| l.weights.iter().flatten())
            .filter(|&&w| w == 0.0)
            .count()
    }

    pub fn n_masked(&self) -> usize {
        self.layers.iter().flat_map(|l| l.mask.iter().flatten()).filter(|m| !**m).count()
    }

    /// Inputs to every layer followed by the logits: `acts[0] = x`,
    /// `acts[l + 1]` is the output of layer `l`.
    pub fn activations(&self, x: &[f64]) -> Vec<Vec<f64>> {
        let mut acts = vec![x.to_vec()];
        let last = self.layers.len() - 1;
        for (l, layer) in self.layers.iter().enumerate() {
            let mut z = layer.apply(acts.last().unwrap());
            if l < last {
                for v in z.iter_mut() {
                    *v = v.max(0.0);
                }
            }
            acts.push(z);
        }
        acts
    }

    pub fn logits(&self, x: &[f64]) -> Vec<f64> {
        self.activations(x).pop().unwrap()
    }

    pub fn predict_row(&self, x: &[f64]) -> usize {
        argmax_f64(&self.logits(x))
    }

    pub fn zero_gradients(&self) -> Gradients {
        Gradients {
            weights: self.layers.iter().map(|l| vec![vec![0.0; l.n_in()]; l.n_out()]).collect(),
            bias: self.layers.iter().map(|l| vec![0.0; l.n_out()]).collect(),
        }
    }

    /// Mean softmax cross-entropy over the rows and its exact gradient.
    pub fn loss_and_gradients(&self, xs: &[&[f64]], ys: &[usize]) -> (f64, Gradients) {
        let mut g = self.zero_gradients();
        let mut total = 0.0;
        let scale = 1.0 / xs.len() as f64;
        for (&x, &y) in xs.iter().zip(ys) {
            let acts = self.activations(x);
            let (loss, probs) = log_softmax_loss(acts.last().unwrap(), y);
            total += loss;
            let mut delta: Vec<f64> = probs;
            delta[y] -= 1.0;
            for l in (0..self.layers.len()).rev() {
                let input = &acts[l];
                for (o, &d) in delta.iter().enumerate() {
                    let d = d * scale;
                    g.bias[l][o] += d;
                    for (gw, &a) in g.weights[l][o].iter_mut().zip(input) {
                        *gw += d * a;
                    }
                }
                if l > 0 {
                    let layer = &self.layers[l];
                    delta = (0..layer.n_in())
                        .map(|i| {
                            if input[i] > 0.0 {
                                delta.iter().enumerate().map(|(o, &d)| layer.weights[o][i] * d).sum()
                            } else {
                                0.0
                            }
                        })
                        .collect();
                }
            }
        }
        (total * scale, g)
    }

    pub fn loss(&self, xs: &[&[f64]], ys: &[usize]) -> f64 {
        let total: f64 = xs
            .iter()
            .zip(ys)
            .map(|(x, &y)| log_softmax_loss(&self.logits(x), y).0)
            .sum();
        total / xs.len() as f64
    }

    pub(crate) fn enforce_mask(&mut self) {
        for layer in &mut self.layers {
            for (w, m) in layer.weights.iter_mut().zip(&layer.mask) {
                for (v, &keep) in w.iter_mut().zip(m) {
                    if !keep {
                        *v = 0.0;
                    }
                }
            }
        }
    }

    fn eval(&self, ds: &Dataset, idx: &[usize]) -> (f64, f64) {
        let xs: Vec<&[f64]> = idx.iter().map(|&i| ds.x[i].as_slice()).collect();
        let ys: Vec<usize> = idx.iter().map(|&i| ds.y[i]).collect();
        let correct = xs.iter().zip(&ys).filter(|(x, &y)| self.predict_row(x) == y).count();
        (correct as f64 / idx.len() as f64, self.loss(&xs, &ys))
    }

    /// Momentum SGD with early stopping on a held-out validation slice.
    /// Returns the parameters of the best validation epoch (epoch 0 is the
    /// starting point).
    pub(crate) fn fit(&self, ds: &Dataset, lr: f64, epochs: usize, settings: &MlpSettings, rng: &mut ChaCha8Rng) -> Mlp {
        let n = ds.n_samples();
        let mut idx: Vec<usize> = (0..n).collect();
        idx.shuffle(rng);
        let n_val = if n >= 10 { ((n as f64 * settings.val_frac) as usize).max(1) } else { 0 };
        let (val, mut fit_idx) = if n_val > 0 {
            (idx[..n_val].to_vec(), idx[n_val..].to_vec())
        } else {
            (idx.clone(), idx.clone())
        };

        let mut model = self.clone();
        model.enforce_mask();
        let mut best = model.clone();
        let mut best_score = model.eval(ds, &val);
        let mut stale = 0;
        let mut velocity = model.zero_gradients();
        let batch = settings.batch_size.max(1);

        for _ in 0..epochs {
            fit_idx.shuffle(rng);
            for chunk in fit_idx.chunks(batch) {
                let xs: Vec<&[f64]> = chunk.iter().map(|&i| ds.x[i].as_slice()).collect();
                let ys: Vec<usize> = chunk.iter().map(|&i| ds.y[i]).collect();
                let (_, g) = model.loss_and_gradients(&xs, &ys);
                for (l, layer) in model.layers.iter_mut().enumerate() {
                    for o in 0..layer.n_out() {
                        let vb = &mut velocity.bias[l][o];
                        *vb = settings.momentum * *vb - lr * g.bias[l][o];
                        layer.bias[o] += *vb;
                        for i in 0..layer.n_in() {
                            if !layer.mask[o][i] {
                                continue;
                            }
                            let vw = &mut velocity.weights[l][o][i];
                            *vw = settings.momentum * *vw - lr * g.weights[l][o][i];
                            layer.weights[o][i] += *vw;
                        }
                    }
                }
            }
            let score = model.eval(ds, &val);
            if score.0 > best_score.0 || (score.0 == best_score.0 && score.1 < best_score.1) {
                best = model.clone();
                best_score = score;
                stale = 0;
            } else {
                stale += 1;
                if stale >= settings.patience {
                    break;
                }
            }
        }
        best
    }
}

pub fn train_mlp(train: &Dataset, hidden: &[usize], lr: f64, settings: &MlpSettings, seed: u64) -> Result<Mlp> {
    if train.n_samples() == 0 {
        return Err(Error::invalid("cannot train an MLP on an empty dataset"));
    }
    if hidden.contains(&0) {
        return Err(Error::invalid("hidden layer widths must be > 0"));
    }
    let mut rng = rng(seed);
    let init = Mlp::init(train.n_features(), hidden, train.n_classes, seed);
    Ok(init.fit(train, lr, settings.epochs, settings, &mut rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signalio::synth_xor;

    #[test]
    fn gradient_matches_central_differences() {
        let mut m = Mlp::init(3, &[4], 3, 17);
        m.layers[0].bias = vec![0.3, -0.2, 0.5, 0.1];
        let xs_owned = [vec![0.2, 0.7, 0.4], vec![0.9, 0.1, 0.5], vec![0.3, 0.3, 0.8]];
        let xs: Vec<&[f64]> = xs_owned.iter().map(Vec::as_slice).collect();
        let ys = [0, 2, 1];
        let (_, g) = m.loss_and_gradients(&xs, &ys);
        let h = 1e-6;
        let mut worst: f64 = 0.0;
        for l in 0..m.layers.len() {
            for o in 0..m.layers[l].n_out() {
                for i in 0..m.layers[l].n_in() {
                    let mut p = m.clone();
                    p.layers[l].weights[o][i] += h;
                    let mut q = m.clone();
                    q.layers[l].weights[o][i] -= h;
                    let numeric = (p.loss(&xs, &ys) - q.loss(&xs, &ys)) / (2.0 * h);
                    let analytic = g.weights[l][o][i];
                    let rel = (numeric - analytic).abs() / numeric.abs().max(analytic.abs()).max(1e-6);
                    worst = worst.max(rel);
                }
            }
        }
        assert!(worst <= 1e-4, "max relative error {worst}");
    }

    #[test]
    fn learns_xor() {
        let ds = synth_xor(50, 0.15, 3);
        let settings = MlpSettings { epochs: 300, patience: 300, ..Default::default() };
        let m = train_mlp(&ds, &[8], 0.05, &settings, 1).unwrap();
        let correct = ds.x.iter().zip(&ds.y).filter(|(x, &y)| m.predict_row(x) == y).count();
        assert!(correct as f64 / ds.n_samples() as f64 >= 0.95, "{correct}");
    }

    #[test]
    fn zero_epochs_returns_initialization() {
        let ds = synth_xor(10, 0.1, 0);
        let settings = MlpSettings { epochs: 0, ..Default::default() };
        let m = train_mlp(&ds, &[4], 0.01, &settings, 9).unwrap();
        assert_eq!(m, Mlp::init(2, &[4], 2, 9));
    }

    #[test]
    fn empty_hidden_is_linear() {
        let ds = synth_xor(10, 0.1, 0);
        let m = train_mlp(&ds, &[], 0.01, &MlpSettings { epochs: 5, ..Default::default() }, 2).unwrap();
        assert_eq!(m.layers.len(), 1);
        assert_eq!(m.n_weights(), 4);
    }

    #[test]
    fn deterministic() {
        let ds = synth_xor(20, 0.1, 4);
        let s = MlpSettings { epochs: 10, ..Default::default() };
        assert_eq!(train_mlp(&ds, &[4], 0.01, &s, 3).unwrap(), train_mlp(&ds, &[4], 0.01, &s, 3).unwrap());
    }
}

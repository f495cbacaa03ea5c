// SPDX-License-Identifier: Apache-2.0

use crate::error::{Error, Result};
use crate::learners::{Mlp, MlpSettings};
use crate::signalio::Dataset;
use crate::util::rng;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// Rows used to estimate data-dependent saliencies.
const SALIENCY_ROWS: usize = 1024;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PruneCriterion {
    /// Weight magnitude.
    L2,
    /// Diagonal Fisher approximation of the loss curvature, `h * w^2`.
    Hessian,
    /// Weight magnitude times mean absolute input activation.
    ActivationAware,
}

impl PruneCriterion {
    pub fn name(self) -> &'static str {
        match self {
            PruneCriterion::L2 => "l2",
            PruneCriterion::Hessian => "hessian",
            PruneCriterion::ActivationAware => "activation_aware",
        }
    }
}

impl fmt::Display for PruneCriterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PruneCriterion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "l2" | "magnitude" => Ok(PruneCriterion::L2),
            "hessian" => Ok(PruneCriterion::Hessian),
            "activation_aware" | "activation" => Ok(PruneCriterion::ActivationAware),
            _ => Err(Error::invalid(format!("unknown prune criterion {s:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PruneReport {
    pub criterion: PruneCriterion,
    pub sparsity: f64,
    pub total_weights: usize,
    pub removed_per_layer: Vec<usize>,
    pub removed_total: usize,
}

fn sample_rows(train: &Dataset) -> Vec<usize> {
    let n = train.n_samples();
    let step = n.div_ceil(SALIENCY_ROWS).max(1);
    (0..n).step_by(step).collect()
}

/// Per-weight saliency, same shape as the weight tensors.
pub fn saliency(m: &Mlp, train: &Dataset, criterion: PruneCriterion) -> Result<Vec<Vec<Vec<f64>>>> {
    let magnitude = |m: &Mlp| -> Vec<Vec<Vec<f64>>> {
        m.layers.iter().map(|l| l.weights.iter().map(|w| w.iter().map(|v| v.abs()).collect()).collect()).collect()
    };
    if criterion == PruneCriterion::L2 {
        return Ok(magnitude(m));
    }
    if train.n_samples() == 0 {
        return Err(Error::invalid("saliency needs training rows"));
    }
    if train.n_features() != m.n_features() {
        return Err(Error::DimensionMismatch {
            expected: m.n_features(),
            got: train.n_features(),
        });
    }
    let rows = sample_rows(train);
    let mut out = magnitude(m);
    match criterion {
        PruneCriterion::L2 => unreachable!(),
        PruneCriterion::ActivationAware => {
            let mut mean_abs: Vec<Vec<f64>> = m.layers.iter().map(|l| vec![0.0; l.n_in()]).collect();
            for &r in &rows {
                let acts = m.activations(&train.x[r]);
                for (l, a) in mean_abs.iter_mut().enumerate() {
                    for (s, v) in a.iter_mut().zip(&acts[l]) {
                        *s += v.abs();
                    }
                }
            }
            for (l, layer) in out.iter_mut().enumerate() {
                for w in layer.iter_mut() {
                    for (v, s) in w.iter_mut().zip(&mean_abs[l]) {
                        *v *= s / rows.len() as f64;
                    }
                }
            }
        }
        PruneCriterion::Hessian => {
            let mut h = m.zero_gradients().weights;
            for &r in &rows {
                let (_, g) = m.loss_and_gradients(&[train.x[r].as_slice()], &[train.y[r]]);
                for (hl, gl) in h.iter_mut().zip(&g.weights) {
                    for (ho, go) in hl.iter_mut().zip(gl) {
                        for (hv, gv) in ho.iter_mut().zip(go) {
                            *hv += gv * gv;
                        }
                    }
                }
            }
            for (l, layer) in out.iter_mut().enumerate() {
                for (o, w) in layer.iter_mut().enumerate() {
                    for (i, v) in w.iter_mut().enumerate() {
                        *v = h[l][o][i] / rows.len() as f64 * m.layers[l].weights[o][i].powi(2);
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Global mask removing the `floor(sparsity * N)` least salient weights.
/// Already-pruned weights stay pruned and count toward the target; ties
/// go to the lower (layer, row, column) position.
pub fn prune_mask(m: &Mlp, saliency: &[Vec<Vec<f64>>], sparsity: f64) -> Result<Vec<Vec<Vec<bool>>>> {
    if !(0.0..1.0).contains(&sparsity) {
        return Err(Error::invalid(format!("sparsity {sparsity} outside [0, 1)")));
    }
    let mut flat = Vec::with_capacity(m.n_weights());
    for (l, layer) in m.layers.iter().enumerate() {
        for o in 0..layer.n_out() {
            for i in 0..layer.n_in() {
                let s = if layer.mask[o][i] { saliency[l][o][i] } else { f64::NEG_INFINITY };
                flat.push((s, l, o, i));
            }
        }
    }
    let target = ((sparsity * flat.len() as f64) + 1e-9).floor() as usize;
    let already = flat.iter().filter(|e| e.0 == f64::NEG_INFINITY).count();
    let mut mask: Vec<Vec<Vec<bool>>> = m.layers.iter().map(|l| l.mask.clone()).collect();
    if target <= already {
        return Ok(mask);
    }
    // stable sort keeps positional order among equal saliencies
    flat.sort_by(|a, b| a.0.total_cmp(&b.0));
    for &(_, l, o, i) in &flat[..target] {
        mask[l][o][i] = false;
    }
    Ok(mask)
}

/// Prunes to `sparsity` and retrains the surviving weights with the mask
/// held fixed. `sparsity == 0` returns the model unchanged.
pub fn prune_retrain(
    m: &Mlp,
    train: &Dataset,
    criterion: PruneCriterion,
    sparsity: f64,
    lr: f64,
    settings: &MlpSettings,
    seed: u64,
) -> Result<(Mlp, PruneReport)> {
    let sal = saliency(m, train, criterion)?;
    let mask = prune_mask(m, &sal, sparsity)?;
    let before: Vec<usize> = m.layers.iter().map(|l| l.mask.iter().flatten().filter(|k| !**k).count()).collect();
    let mut pruned = m.clone();
    for (layer, mk) in pruned.layers.iter_mut().zip(mask) {
        layer.mask = mk;
    }
    pruned.enforce_mask();
    let removed_per_layer: Vec<usize> = pruned
        .layers
        .iter()
        .zip(&before)
        .map(|(l, b)| l.mask.iter().flatten().filter(|k| !**k).count() - b)
        .collect();
    let removed_total = removed_per_layer.iter().sum();
    let model = if removed_total > 0 && settings.retrain_epochs > 0 {
        let mut r = rng(seed);
        pruned.fit(train, lr, settings.retrain_epochs, settings, &mut r)
    } else {
        pruned
    };
    Ok((
        model,
        PruneReport {
            criterion,
            sparsity,
            total_weights: m.n_weights(),
            removed_per_layer,
            removed_total,
        },
    ))
}

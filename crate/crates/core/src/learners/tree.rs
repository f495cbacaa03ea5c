// SPDX-License-Identifier: Apache-2.0

use crate::error::{Error, Result};
use crate::signalio::Dataset;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Criterion {
    Gini,
    Entropy,
}

impl Criterion {
    fn impurity(self, counts: &[usize], total: usize) -> f64 {
        if total == 0 {
            return 0.0;
        }
        let n = total as f64;
        match self {
            Criterion::Gini => 1.0 - counts.iter().map(|&c| (c as f64 / n).powi(2)).sum::<f64>(),
            Criterion::Entropy => -counts
                .iter()
                .filter(|&&c| c > 0)
                .map(|&c| {
                    let p = c as f64 / n;
                    p * p.log2()
                })
                .sum::<f64>(),
        }
    }
}

/// Left branch is taken when `x[feature] <= threshold`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Node {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        class: usize,
    },
}

/// Binary tree stored as a node arena with the root at index 0.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    pub nodes: Vec<Node>,
    pub criterion: Criterion,
    pub n_features: usize,
    pub n_classes: usize,
}

impl DecisionTree {
    pub fn predict_row(&self, x: &[f64]) -> usize {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                Node::Leaf { class } => return class,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => i = if x[feature] <= threshold { left } else { right },
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], i: usize) -> usize {
            match nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, left).max(walk(nodes, right)),
            }
        }
        walk(&self.nodes, 0)
    }

    pub fn n_splits(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Split { .. })).count()
    }

    /// Features referenced by at least one split, ascending.
    pub fn used_features(&self) -> Vec<usize> {
        let mut f: Vec<usize> = self
            .nodes
            .iter()
            .filter_map(|n| match n {
                Node::Split { feature, .. } => Some(*feature),
                Node::Leaf { .. } => None,
            })
            .collect();
        f.sort_unstable();
        f.dedup();
        f
    }
}

struct Builder<'a> {
    ds: &'a Dataset,
    criterion: Criterion,
    max_depth: usize,
    nodes: Vec<Node>,
}

struct BestSplit {
    gain: f64,
    feature: usize,
    threshold: f64,
}

impl Builder<'_> {
    fn counts(&self, idx: &[usize]) -> Vec<usize> {
        let mut c = vec![0; self.ds.n_classes];
        for &i in idx {
            c[self.ds.y[i]] += 1;
        }
        c
    }

    fn best_split(&self, idx: &[usize], parent: &[usize]) -> Option<BestSplit> {
        let n = idx.len();
        let parent_imp = self.criterion.impurity(parent, n);
        let mut best: Option<BestSplit> = None;
        for f in 0..self.ds.n_features() {
            let mut order: Vec<(f64, usize)> = idx.iter().map(|&i| (self.ds.x[i][f], self.ds.y[i])).collect();
            order.sort_by(|a, b| a.0.total_cmp(&b.0));
            let mut left = vec![0usize; self.ds.n_classes];
            let mut right = parent.to_vec();
            for s in 0..n - 1 {
                let (v, c) = order[s];
                left[c] += 1;
                right[c] -= 1;
                let next = order[s + 1].0;
                if next <= v {
                    continue;
                }
                let nl = s + 1;
                let nr = n - nl;
                let child = (nl as f64 * self.criterion.impurity(&left, nl)
                    + nr as f64 * self.criterion.impurity(&right, nr))
                    / n as f64;
                let gain = parent_imp - child;
                if best.as_ref().is_none_or(|b| gain > b.gain) {
                    best = Some(BestSplit {
                        gain,
                        feature: f,
                        threshold: 0.5 * (v + next),
                    });
                }
            }
        }
        best
    }

    fn grow(&mut self, idx: Vec<usize>, depth: usize) -> usize {
        let counts = self.counts(&idx);
        let majority = (0..counts.len()).fold(0, |b, c| if counts[c] > counts[b] { c } else { b });
        let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
        let slot = self.nodes.len();
        self.nodes.push(Node::Leaf { class: majority });
        if pure || depth >= self.max_depth {
            return slot;
        }
        let Some(split) = self.best_split(&idx, &counts) else {
            return slot;
        };
        let (l, r): (Vec<usize>, Vec<usize>) = idx
            .iter()
            .partition(|&&i| self.ds.x[i][split.feature] <= split.threshold);
        let left = self.grow(l, depth + 1);
        let right = self.grow(r, depth + 1);
        self.nodes[slot] = Node::Split {
            feature: split.feature,
            threshold: split.threshold,
            left,
            right,
        };
        slot
    }
}

/// Greedy CART. Every impure node above `max_depth` is split at the
/// midpoint threshold with the largest impurity decrease; ties keep the
/// lowest feature index and then the lowest threshold. Deterministic, so
/// `_seed` is accepted only for interface symmetry with the other learners.
pub fn train_dt(train: &Dataset, criterion: Criterion, max_depth: usize, _seed: u64) -> Result<DecisionTree> {
    if train.n_samples() == 0 {
        return Err(Error::invalid("cannot train a tree on an empty dataset"));
    }
    let mut b = Builder {
        ds: train,
        criterion,
        max_depth,
        nodes: Vec::new(),
    };
    b.grow((0..train.n_samples()).collect(), 0);
    Ok(DecisionTree {
        nodes: b.nodes,
        criterion,
        n_features: train.n_features(),
        n_classes: train.n_classes,
    })
}

// SPDX-License-Identifier: Apache-2.0

//! Decision trees, one-vs-rest linear SVMs and ReLU MLPs, with
//! cross-validated grid search.

mod grid;
mod metrics;
mod mlp;
mod svm;
mod tree;

pub use grid::{grid_search, stratified_folds, GridResult};
pub use metrics::{accuracy, f1_macro, Scores};
pub use mlp::{train_mlp, Gradients, Layer, Mlp, MlpSettings};
pub use svm::{train_svm, LinearSvm, SvmSettings};
pub use tree::{train_dt, Criterion, DecisionTree, Node};

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Algorithm {
    #[serde(rename = "DT")]
    Dt,
    #[serde(rename = "SVM")]
    Svm,
    #[serde(rename = "MLP")]
    Mlp,
}

impl Algorithm {
    pub const ALL: [Algorithm; 3] = [Algorithm::Dt, Algorithm::Svm, Algorithm::Mlp];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Dt => "DT",
            Algorithm::Svm => "SVM",
            Algorithm::Mlp => "MLP",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "dt" => Ok(Algorithm::Dt),
            "svm" => Ok(Algorithm::Svm),
            "mlp" => Ok(Algorithm::Mlp),
            _ => Err(Error::invalid(format!("unknown algorithm {s:?}"))),
        }
    }
}

/// One hyperparameter assignment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "algo")]
pub enum Hyper {
    #[serde(rename = "DT")]
    Dt { criterion: Criterion, max_depth: usize },
    #[serde(rename = "SVM")]
    Svm { c: f64 },
    #[serde(rename = "MLP")]
    Mlp { hidden: Vec<usize>, lr: f64 },
}

impl Hyper {
    pub fn algorithm(&self) -> Algorithm {
        match self {
            Hyper::Dt { .. } => Algorithm::Dt,
            Hyper::Svm { .. } => Algorithm::Svm,
            Hyper::Mlp { .. } => Algorithm::Mlp,
        }
    }
}

impl fmt::Display for Hyper {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Hyper::Dt { criterion, max_depth } => write!(f, "DT({criterion:?}, depth {max_depth})"),
            Hyper::Svm { c } => write!(f, "SVM(C={c})"),
            Hyper::Mlp { hidden, lr } => write!(f, "MLP({hidden:?}, lr={lr})"),
        }
    }
}

/// Per-algorithm hyperparameter lists.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HyperGrid {
    pub dt_max_depth: Vec<usize>,
    pub dt_criteria: Vec<Criterion>,
    pub svm_c: Vec<f64>,
    pub mlp_hidden: Vec<Vec<usize>>,
    pub mlp_lr: Vec<f64>,
}

impl Default for HyperGrid {
    fn default() -> Self {
        HyperGrid {
            dt_max_depth: vec![2, 3, 4, 6, 8],
            dt_criteria: vec![Criterion::Gini, Criterion::Entropy],
            svm_c: vec![0.1, 1.0, 10.0],
            mlp_hidden: vec![vec![4], vec![8], vec![16], vec![8, 4]],
            mlp_lr: vec![0.01, 0.001],
        }
    }
}

impl HyperGrid {
    /// Grid entries for `algo` in a fixed order; `hyper_id` indexes this list.
    pub fn configs(&self, algo: Algorithm) -> Vec<Hyper> {
        match algo {
            Algorithm::Dt => self
                .dt_max_depth
                .iter()
                .flat_map(|&max_depth| {
                    self.dt_criteria.iter().map(move |&criterion| Hyper::Dt { criterion, max_depth })
                })
                .collect(),
            Algorithm::Svm => self.svm_c.iter().map(|&c| Hyper::Svm { c }).collect(),
            Algorithm::Mlp => self
                .mlp_hidden
                .iter()
                .flat_map(|h| self.mlp_lr.iter().map(move |&lr| Hyper::Mlp { hidden: h.clone(), lr }))
                .collect(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let empty = [
            ("dt_max_depth", self.dt_max_depth.is_empty()),
            ("dt_criteria", self.dt_criteria.is_empty()),
            ("svm_c", self.svm_c.is_empty()),
            ("mlp_hidden", self.mlp_hidden.is_empty()),
            ("mlp_lr", self.mlp_lr.is_empty()),
        ];
        if let Some((name, _)) = empty.iter().find(|(_, e)| *e) {
            return Err(Error::invalid(format!("hyperparameter grid {name} is empty")));
        }
        Ok(())
    }
}

/// Training knobs that are not searched over.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainSettings {
    pub svm: SvmSettings,
    pub mlp: MlpSettings,
}

impl Default for TrainSettings {
    fn default() -> Self {
        TrainSettings {
            svm: SvmSettings::default(),
            mlp: MlpSettings::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum TrainedModel {
    DecisionTree(DecisionTree),
    LinearSvm(LinearSvm),
    Mlp(Mlp),
}

impl TrainedModel {
    pub fn algorithm(&self) -> Algorithm {
        match self {
            TrainedModel::DecisionTree(_) => Algorithm::Dt,
            TrainedModel::LinearSvm(_) => Algorithm::Svm,
            TrainedModel::Mlp(_) => Algorithm::Mlp,
        }
    }

    pub fn n_features(&self) -> usize {
        match self {
            TrainedModel::DecisionTree(m) => m.n_features,
            TrainedModel::LinearSvm(m) => m.n_features(),
            TrainedModel::Mlp(m) => m.n_features(),
        }
    }

    pub fn n_classes(&self) -> usize {
        match self {
            TrainedModel::DecisionTree(m) => m.n_classes,
            TrainedModel::LinearSvm(m) => m.n_classes(),
            TrainedModel::Mlp(m) => m.n_classes(),
        }
    }

    pub fn predict_row(&self, x: &[f64]) -> usize {
        match self {
            TrainedModel::DecisionTree(m) => m.predict_row(x),
            TrainedModel::LinearSvm(m) => m.predict_row(x),
            TrainedModel::Mlp(m) => m.predict_row(x),
        }
    }

    pub fn predict(&self, x: &[Vec<f64>]) -> Result<Vec<usize>> {
        let m = self.n_features();
        if let Some(r) = x.iter().find(|r| r.len() != m) {
            return Err(Error::DimensionMismatch { expected: m, got: r.len() });
        }
        Ok(x.iter().map(|r| self.predict_row(r)).collect())
    }
}

/// Trains `hyper` on `train`.
pub fn train(train_ds: &crate::signalio::Dataset, hyper: &Hyper, settings: &TrainSettings, seed: u64) -> Result<TrainedModel> {
    Ok(match hyper {
        Hyper::Dt { criterion, max_depth } => TrainedModel::DecisionTree(train_dt(train_ds, *criterion, *max_depth, seed)?),
        Hyper::Svm { c } => TrainedModel::LinearSvm(train_svm(train_ds, *c, &settings.svm, seed)?),
        Hyper::Mlp { hidden, lr } => TrainedModel::Mlp(train_mlp(train_ds, hidden, *lr, &settings.mlp, seed)?),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_grid_sizes() {
        let g = HyperGrid::default();
        assert_eq!(g.configs(Algorithm::Dt).len(), 10);
        assert_eq!(g.configs(Algorithm::Svm).len(), 3);
        assert_eq!(g.configs(Algorithm::Mlp).len(), 8);
        assert_eq!(
            g.configs(Algorithm::Dt)[1],
            Hyper::Dt {
                criterion: Criterion::Entropy,
                max_depth: 2
            }
        );
    }

    #[test]
    fn parse_names() {
        assert_eq!("svm".parse::<Algorithm>().unwrap(), Algorithm::Svm);
        assert!("knn".parse::<Algorithm>().is_err());
    }
}

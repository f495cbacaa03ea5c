// SPDX-License-Identifier: Apache-2.0

//! Exhaustive design-space exploration over feature selection, model,
//! sparsity and precision, with accuracy/power Pareto extraction.

mod eval;
mod pareto;
mod report;

pub use eval::{
    compress_model, evaluate, evaluate_compressed, prepare, run, select_for, train_for, Compressed, DseRun,
    ErrorRecord, Prepared,
};
pub use pareto::{dominates, pareto, pareto_bruteforce, pareto_points};
pub use report::{
    composition, config_hash, points_csv, results_csv, summary, write_report, BestEntry, Envelope, Summary, RESULTS_HEADER,
};

use crate::compress::PruneCriterion;
use crate::error::{Error, Result};
use crate::featsel::{FsMethod, SelectionOptions};
use crate::hweval::{CostModel, HwMetrics};
use crate::learners::{Algorithm, Hyper, HyperGrid, TrainSettings};
use crate::util::stable_hash;
use serde::{Deserialize, Serialize};
use std::fmt;

/// Cost axis traded against accuracy on the front.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Objective {
    #[default]
    Power,
    Area,
    Energy,
}

impl Objective {
    pub fn cost(self, m: &HwMetrics) -> f64 {
        match self {
            Objective::Power => m.power_uW,
            Objective::Area => m.area_um2,
            Objective::Energy => m.energy_J,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DseConfig {
    pub fs_methods: Vec<FsMethod>,
    pub k_grid: Vec<usize>,
    pub algorithms: Vec<Algorithm>,
    pub hypers: HyperGrid,
    /// Applied to MLP branches only.
    pub sparsities: Vec<f64>,
    pub precisions: Vec<u32>,
    pub prune_criterion: PruneCriterion,
    pub train_frac: f64,
    /// Random vectors in the per-point bit-exactness check.
    pub spot_check_vectors: usize,
    pub objective: Objective,
    pub selection: SelectionOptions,
    pub training: TrainSettings,
    pub cost: CostModel,
    pub seed: u64,
    pub workers: usize,
}

impl Default for DseConfig {
    fn default() -> Self {
        DseConfig {
            fs_methods: FsMethod::ALL.to_vec(),
            k_grid: (5..=30).step_by(5).collect(),
            algorithms: Algorithm::ALL.to_vec(),
            hypers: HyperGrid::default(),
            sparsities: vec![0.0, 0.2, 0.5, 0.9],
            precisions: vec![4, 6, 8, 10],
            prune_criterion: PruneCriterion::L2,
            train_frac: 0.7,
            spot_check_vectors: 100,
            objective: Objective::Power,
            selection: SelectionOptions::default(),
            training: TrainSettings::default(),
            cost: CostModel::default(),
            seed: 42,
            workers: 1,
        }
    }
}

impl DseConfig {
    pub fn validate(&self) -> Result<()> {
        let empty = [
            ("fs_methods", self.fs_methods.is_empty()),
            ("k_grid", self.k_grid.is_empty()),
            ("algorithms", self.algorithms.is_empty()),
            ("sparsities", self.sparsities.is_empty()),
            ("precisions", self.precisions.is_empty()),
        ];
        if let Some((name, _)) = empty.iter().find(|(_, e)| *e) {
            return Err(Error::invalid(format!("grid {name} is empty")));
        }
        for a in &self.algorithms {
            if self.hypers.configs(*a).is_empty() {
                return Err(Error::invalid(format!("hyperparameter grid for {a} is empty")));
            }
        }
        if self.k_grid.contains(&0) {
            return Err(Error::invalid("k_grid entries must be positive"));
        }
        if let Some(s) = self.sparsities.iter().find(|s| !(0.0..1.0).contains(*s)) {
            return Err(Error::invalid(format!("sparsity {s} outside [0, 1)")));
        }
        for &p in &self.precisions {
            crate::compress::FixedPointSpec::new(p)?;
        }
        if !(self.train_frac > 0.0 && self.train_frac < 1.0) {
            return Err(Error::invalid(format!("train_frac {} outside (0, 1)", self.train_frac)));
        }
        if self.workers == 0 {
            return Err(Error::invalid("workers must be at least 1"));
        }
        if self.selection.bins < 2 {
            return Err(Error::invalid("selection bins must be at least 2"));
        }
        self.cost.validate()
    }

    fn sparsities_for(&self, algo: Algorithm) -> Vec<f64> {
        if algo == Algorithm::Mlp {
            self.sparsities.clone()
        } else {
            vec![0.0]
        }
    }
}

/// One point of the design space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConfigTuple {
    pub fs: FsMethod,
    pub k: usize,
    pub algo: Algorithm,
    pub hyper_id: usize,
    pub sparsity: f64,
    pub precision: u32,
}

impl ConfigTuple {
    /// Identity of the trained model this tuple shares with its siblings.
    pub fn training_key(&self) -> String {
        format!("{}/{}/{}/{}", self.fs, self.k, self.algo, self.hyper_id)
    }

    pub fn key(&self) -> String {
        format!("{}/{}/{}", self.training_key(), self.sparsity, self.precision)
    }
}

impl fmt::Display for ConfigTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.key())
    }
}

/// Seed for one pipeline stage of one configuration, independent of
/// evaluation order.
pub fn derive_seed(seed: u64, stage: &str, key: &str) -> u64 {
    seed ^ stable_hash(&format!("{stage}:{key}"))
}

/// Cartesian product in `fs, k, algo, hyper, sparsity, precision` order.
pub fn enumerate(cfg: &DseConfig) -> Result<Vec<ConfigTuple>> {
    cfg.validate()?;
    let mut out = Vec::new();
    for &fs in &cfg.fs_methods {
        for &k in &cfg.k_grid {
            for &algo in &cfg.algorithms {
                for hyper_id in 0..cfg.hypers.configs(algo).len() {
                    for sparsity in cfg.sparsities_for(algo) {
                        for &precision in &cfg.precisions {
                            out.push(ConfigTuple {
                                fs,
                                k,
                                algo,
                                hyper_id,
                                sparsity,
                                precision,
                            });
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

/// An evaluated design.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DesignPoint {
    pub index: usize,
    pub tuple: ConfigTuple,
    pub hyper: Hyper,
    pub selected_features: Vec<usize>,
    pub accuracy: f64,
    pub f1: f64,
    pub metrics: HwMetrics,
    pub multipliers: usize,
    pub comparators: usize,
    pub verified_vectors: usize,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_grid_counts() {
        let cfg = DseConfig::default();
        let all = enumerate(&cfg).unwrap();
        let dt = all.iter().filter(|t| t.algo == Algorithm::Dt).count();
        let svm = all.iter().filter(|t| t.algo == Algorithm::Svm).count();
        let mlp = all.iter().filter(|t| t.algo == Algorithm::Mlp).count();
        assert_eq!(dt, 720);
        assert_eq!(svm, 216);
        assert_eq!(mlp, 3 * 6 * 8 * 4 * 4);
        assert!(all.len() > 1200);
        assert!(all.iter().filter(|t| t.algo != Algorithm::Mlp).all(|t| t.sparsity == 0.0));
        let mut keys: Vec<String> = all.iter().map(ConfigTuple::key).collect();
        keys.sort();
        keys.dedup();
        assert_eq!(keys.len(), all.len());
    }

    #[test]
    fn empty_grids_rejected() {
        let cfg = DseConfig {
            precisions: vec![],
            ..DseConfig::default()
        };
        assert!(enumerate(&cfg).unwrap_err().to_string().contains("precisions"));
        let cfg = DseConfig {
            workers: 0,
            ..DseConfig::default()
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn seeds_depend_on_key_only() {
        assert_eq!(derive_seed(1, "train", "a"), derive_seed(1, "train", "a"));
        assert_ne!(derive_seed(1, "train", "a"), derive_seed(1, "train", "b"));
        assert_ne!(derive_seed(1, "train", "a"), derive_seed(2, "train", "a"));
    }

    #[test]
    fn config_toml_rejects_unknown_keys() {
        let err = toml::from_str::<DseConfig>("k_grid = [5]\nbogus = 1\n").unwrap_err();
        assert!(err.to_string().contains("bogus"));
        let cfg: DseConfig = toml::from_str("k_grid = [5]\n[hypers]\nsvm_c = [1.0]\n").unwrap();
        assert_eq!(cfg.hypers.svm_c, vec![1.0]);
        assert_eq!(cfg.hypers.dt_max_depth, HyperGrid::default().dt_max_depth);
    }
}

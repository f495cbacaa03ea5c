// SPDX-License-Identifier: Apache-2.0

use super::{accuracy, train, Algorithm, Hyper, HyperGrid, TrainSettings, TrainedModel};
use crate::error::{Error, Result};
use crate::signalio::Dataset;
use crate::util::rng;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

/// Assigns every sample to one of `folds` folds, dealing each class's
/// shuffled members round-robin so every fold sees every class.
pub fn stratified_folds(ds: &Dataset, folds: usize, seed: u64) -> Result<Vec<usize>> {
    if folds < 2 {
        return Err(Error::invalid("need at least 2 folds"));
    }
    let counts = ds.class_counts();
    if let Some((c, &n)) = counts.iter().enumerate().find(|(_, &n)| n > 0 && n < folds) {
        return Err(Error::invalid(format!(
            "class {c} has {n} samples, fewer than {folds} folds"
        )));
    }
    let mut rng = rng(seed);
    let mut assignment = vec![0; ds.n_samples()];
    for c in 0..ds.n_classes {
        let mut members: Vec<usize> = (0..ds.n_samples()).filter(|&i| ds.y[i] == c).collect();
        members.shuffle(&mut rng);
        for (k, &i) in members.iter().enumerate() {
            assignment[i] = k % folds;
        }
    }
    Ok(assignment)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridResult {
    pub best_index: usize,
    pub best: Hyper,
    /// Mean validation accuracy per grid entry, in grid order.
    pub mean_scores: Vec<f64>,
    /// Best configuration retrained on the full training split.
    pub model: TrainedModel,
}

/// K-fold cross-validated grid search. The highest mean fold accuracy wins,
/// earlier grid entries win ties.
pub fn grid_search(
    train_ds: &Dataset,
    algo: Algorithm,
    grid: &HyperGrid,
    folds: usize,
    settings: &TrainSettings,
    seed: u64,
) -> Result<GridResult> {
    let configs = grid.configs(algo);
    if configs.is_empty() {
        return Err(Error::invalid(format!("empty hyperparameter grid for {algo}")));
    }
    let assignment = stratified_folds(train_ds, folds, seed)?;
    let mut mean_scores = Vec::with_capacity(configs.len());
    for hyper in &configs {
        let mut total = 0.0;
        for f in 0..folds {
            let fit: Vec<usize> = (0..train_ds.n_samples()).filter(|&i| assignment[i] != f).collect();
            let hold: Vec<usize> = (0..train_ds.n_samples()).filter(|&i| assignment[i] == f).collect();
            let model = train(&train_ds.subset(&fit), hyper, settings, seed)?;
            let held = train_ds.subset(&hold);
            total += accuracy(&model.predict(&held.x)?, &held.y)?;
        }
        mean_scores.push(total / folds as f64);
    }
    let best_index = (0..mean_scores.len()).fold(0, |b, i| if mean_scores[i] > mean_scores[b] { i } else { b });
    let best = configs[best_index].clone();
    let model = train(train_ds, &best, settings, seed)?;
    Ok(GridResult {
        best_index,
        best,
        mean_scores,
        model,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learners::Criterion;
    use crate::signalio::{synth_dataset, synth_xor, BlobSpec};

    fn dt_grid(depths: Vec<usize>) -> HyperGrid {
        HyperGrid {
            dt_max_depth: depths,
            dt_criteria: vec![Criterion::Gini],
            ..HyperGrid::default()
        }
    }

    #[test]
    fn single_entry_grid() {
        let ds = synth_dataset(&BlobSpec::new(60, 2, 2, 4.0, 2), 0).unwrap();
        let r = grid_search(&ds, Algorithm::Dt, &dt_grid(vec![3]), 5, &TrainSettings::default(), 1).unwrap();
        assert_eq!(r.best_index, 0);
        assert_eq!(r.mean_scores.len(), 1);
    }

    #[test]
    fn identical_entries_pick_first() {
        let ds = synth_dataset(&BlobSpec::new(60, 2, 2, 4.0, 2), 0).unwrap();
        let r = grid_search(&ds, Algorithm::Dt, &dt_grid(vec![2, 2]), 5, &TrainSettings::default(), 1).unwrap();
        assert_eq!(r.mean_scores[0], r.mean_scores[1]);
        assert_eq!(r.best_index, 0);
    }

    #[test]
    fn xor_prefers_deeper_tree() {
        let ds = synth_xor(40, 0.2, 5);
        let r = grid_search(&ds, Algorithm::Dt, &dt_grid(vec![1, 4]), 5, &TrainSettings::default(), 2).unwrap();
        assert_eq!(r.best_index, 1, "{:?}", r.mean_scores);
    }

    #[test]
    fn folds_cover_classes() {
        let ds = synth_dataset(&BlobSpec::new(50, 1, 1, 4.0, 2), 0).unwrap();
        let a = stratified_folds(&ds, 5, 0).unwrap();
        for f in 0..5 {
            let classes: std::collections::BTreeSet<usize> =
                (0..50).filter(|&i| a[i] == f).map(|i| ds.y[i]).collect();
            assert_eq!(classes.len(), 2);
        }
        let tiny = Dataset::new(vec!["a".into()], vec![vec![0.0]; 6], vec![0, 0, 0, 0, 1, 1], 2).unwrap();
        assert!(stratified_folds(&tiny, 5, 0).is_err());
        assert!(stratified_folds(&ds, 1, 0).is_err());
    }
}

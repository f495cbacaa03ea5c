// SPDX-License-Identifier: Apache-2.0

use super::fisher::fisher_scores;
use super::mi::{discretize, entropy, joint_mutual_information, mutual_information, DiscretizedColumn};
use crate::error::{Error, Result};
use crate::signalio::Dataset;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FsMethod {
    #[serde(rename = "DISR")]
    Disr,
    Fisher,
    #[serde(rename = "JMI")]
    Jmi,
}

impl FsMethod {
    pub const ALL: [FsMethod; 3] = [FsMethod::Disr, FsMethod::Fisher, FsMethod::Jmi];

    pub fn name(self) -> &'static str {
        match self {
            FsMethod::Disr => "DISR",
            FsMethod::Fisher => "Fisher",
            FsMethod::Jmi => "JMI",
        }
    }
}

impl fmt::Display for FsMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FsMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "disr" => Ok(FsMethod::Disr),
            "fisher" => Ok(FsMethod::Fisher),
            "jmi" => Ok(FsMethod::Jmi),
            _ => Err(Error::invalid(format!("unknown feature selection method {s:?}"))),
        }
    }
}

/// Which joint entropy divides each DISR term.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DisrNormalization {
    /// H(x_j, x_k, Y)
    #[default]
    JointWithLabels,
    /// H(x_j, x_k)
    FeaturesOnly,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SelectionOptions {
    pub bins: usize,
    pub disr_normalization: DisrNormalization,
}

impl Default for SelectionOptions {
    fn default() -> Self {
        SelectionOptions {
            bins: 10,
            disr_normalization: DisrNormalization::JointWithLabels,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelectionResult {
    pub method: FsMethod,
    pub k: usize,
    /// Selection order for the greedy methods, rank order for Fisher.
    pub selected_indices: Vec<usize>,
    /// Criterion value at the time each feature was picked.
    pub scores: Vec<f64>,
}

impl SelectionResult {
    pub fn truncated(&self, k: usize) -> SelectionResult {
        SelectionResult {
            method: self.method,
            k,
            selected_indices: self.selected_indices[..k].to_vec(),
            scores: self.scores[..k].to_vec(),
        }
    }
}

fn pick_max(scores: &[f64], taken: &[bool]) -> usize {
    let mut best: Option<usize> = None;
    for (i, &s) in scores.iter().enumerate() {
        if taken[i] {
            continue;
        }
        match best {
            Some(b) if s <= scores[b] => {}
            _ => best = Some(i),
        }
    }
    best.expect("at least one candidate remains")
}

fn greedy(ds: &Dataset, method: FsMethod, k: usize, opts: &SelectionOptions) -> Result<SelectionResult> {
    let cols: Vec<DiscretizedColumn> = (0..ds.n_features())
        .map(|j| discretize(&ds.column(j), opts.bins))
        .collect::<Result<_>>()?;
    let y = &ds.y;
    let m = cols.len();
    let mut taken = vec![false; m];

    let relevance: Vec<f64> = cols
        .par_iter()
        .map(|c| mutual_information(&c.bins, y))
        .collect::<Result<_>>()?;
    let first = pick_max(&relevance, &taken);
    taken[first] = true;
    let mut selected = vec![first];
    let mut scores = vec![relevance[first]];

    let mut acc = vec![0.0; m];
    while selected.len() < k {
        let j = *selected.last().unwrap();
        let terms: Vec<Option<f64>> = (0..m)
            .into_par_iter()
            .map(|cand| {
                if taken[cand] {
                    return Ok(None);
                }
                let (a, b) = (&cols[j].bins, &cols[cand].bins);
                let jmi = joint_mutual_information(a, b, y)?;
                let term = match method {
                    FsMethod::Jmi => jmi,
                    FsMethod::Disr => {
                        let h = match opts.disr_normalization {
                            DisrNormalization::JointWithLabels => entropy(&[a, b, y])?,
                            DisrNormalization::FeaturesOnly => entropy(&[a, b])?,
                        };
                        if h > 0.0 {
                            jmi / h
                        } else {
                            0.0
                        }
                    }
                    FsMethod::Fisher => unreachable!("fisher is not greedy"),
                };
                Ok(Some(term))
            })
            .collect::<Result<_>>()?;
        for (a, t) in acc.iter_mut().zip(terms) {
            if let Some(t) = t {
                *a += t;
            }
        }
        let next = pick_max(&acc, &taken);
        taken[next] = true;
        selected.push(next);
        scores.push(acc[next]);
    }
    Ok(SelectionResult {
        method,
        k,
        selected_indices: selected,
        scores,
    })
}

/// Top-k features under `method`. Ties go to the lower feature index.
pub fn select_features(ds: &Dataset, method: FsMethod, k: usize, opts: &SelectionOptions) -> Result<SelectionResult> {
    let m = ds.n_features();
    if k == 0 || k > m {
        return Err(Error::invalid(format!("k = {k} must be in 1..={m}")));
    }
    if ds.n_samples() == 0 {
        return Err(Error::invalid("feature selection on an empty dataset"));
    }
    match method {
        FsMethod::Fisher => {
            let s = fisher_scores(ds)?;
            let mut order: Vec<usize> = (0..m).collect();
            order.sort_by(|&a, &b| s[b].total_cmp(&s[a]).then(a.cmp(&b)));
            order.truncate(k);
            Ok(SelectionResult {
                method,
                k,
                scores: order.iter().map(|&i| s[i]).collect(),
                selected_indices: order,
            })
        }
        FsMethod::Jmi | FsMethod::Disr => greedy(ds, method, k, opts),
    }
}

/// One result per k. Every method here ranks incrementally, so each smaller
/// selection is a prefix of the largest one.
pub fn sweep_k(ds: &Dataset, method: FsMethod, k_grid: &[usize], opts: &SelectionOptions) -> Result<Vec<SelectionResult>> {
    let &k_max = k_grid.iter().max().ok_or_else(|| Error::invalid("empty k grid"))?;
    if let Some(&bad) = k_grid.iter().find(|&&k| k == 0 || k > ds.n_features()) {
        return Err(Error::invalid(format!("k = {bad} must be in 1..={}", ds.n_features())));
    }
    let full = select_features(ds, method, k_max, opts)?;
    Ok(k_grid.iter().map(|&k| full.truncated(k)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signalio::{synth_dataset, BlobSpec};

    fn small() -> Dataset {
        synth_dataset(&BlobSpec::new(300, 2, 5, 3.0, 2), 21).unwrap()
    }

    #[test]
    fn k_equals_m_returns_everything() {
        let ds = small();
        for method in FsMethod::ALL {
            let r = select_features(&ds, method, ds.n_features(), &SelectionOptions::default()).unwrap();
            let mut idx = r.selected_indices.clone();
            idx.sort_unstable();
            assert_eq!(idx, (0..ds.n_features()).collect::<Vec<_>>());
        }
    }

    #[test]
    fn first_greedy_pick_is_max_relevance() {
        let ds = small();
        let opts = SelectionOptions::default();
        let rel: Vec<f64> = (0..ds.n_features())
            .map(|j| mutual_information(&discretize(&ds.column(j), 10).unwrap().bins, &ds.y).unwrap())
            .collect();
        let best = crate::util::argmax_f64(&rel);
        for method in [FsMethod::Jmi, FsMethod::Disr] {
            let r = select_features(&ds, method, 1, &opts).unwrap();
            assert_eq!(r.selected_indices, vec![best]);
            assert_eq!(r.scores[0], rel[best]);
        }
    }

    #[test]
    fn k_out_of_range() {
        let ds = small();
        assert!(select_features(&ds, FsMethod::Jmi, 0, &SelectionOptions::default()).is_err());
        assert!(select_features(&ds, FsMethod::Fisher, 8, &SelectionOptions::default()).is_err());
        assert!(sweep_k(&ds, FsMethod::Fisher, &[], &SelectionOptions::default()).is_err());
    }

    #[test]
    fn sweep_prefix_property() {
        let ds = synth_dataset(&BlobSpec::new(300, 4, 26, 2.0, 2), 8).unwrap();
        let grid: Vec<usize> = (5..=30).step_by(5).collect();
        for method in FsMethod::ALL {
            let rs = sweep_k(&ds, method, &grid, &SelectionOptions::default()).unwrap();
            assert_eq!(rs.len(), 6);
            for w in rs.windows(2) {
                assert_eq!(w[0].selected_indices[..], w[1].selected_indices[..w[0].k]);
            }
            // prefix results equal a direct call
            let direct = select_features(&ds, method, 10, &SelectionOptions::default()).unwrap();
            assert_eq!(rs[1], direct);
        }
    }

    #[test]
    fn fisher_ties_go_to_lower_index() {
        let x = vec![vec![0.0, 0.0, 0.5], vec![1.0, 1.0, 0.5], vec![0.0, 0.0, 0.5], vec![1.0, 1.0, 0.5]];
        let ds = Dataset::new(vec!["a".into(), "b".into(), "c".into()], x, vec![0, 1, 0, 1], 2).unwrap();
        let r = select_features(&ds, FsMethod::Fisher, 3, &SelectionOptions::default()).unwrap();
        assert_eq!(r.selected_indices, vec![0, 1, 2]);
    }

    #[test]
    fn disr_normalization_variants_run() {
        let ds = small();
        let a = select_features(&ds, FsMethod::Disr, 4, &SelectionOptions::default()).unwrap();
        let b = select_features(
            &ds,
            FsMethod::Disr,
            4,
            &SelectionOptions {
                bins: 10,
                disr_normalization: DisrNormalization::FeaturesOnly,
            },
        )
        .unwrap();
        assert_eq!(a.selected_indices[0], b.selected_indices[0]);
        assert!(b.scores[1] >= a.scores[1]);
    }

    #[test]
    fn greedy_is_deterministic_and_json_roundtrips() {
        let ds = small();
        let a = select_features(&ds, FsMethod::Jmi, 5, &SelectionOptions::default()).unwrap();
        let b = select_features(&ds, FsMethod::Jmi, 5, &SelectionOptions::default()).unwrap();
        assert_eq!(a, b);
        let json = serde_json::to_string(&a).unwrap();
        assert!(json.contains("\"method\":\"JMI\""));
        assert_eq!(serde_json::from_str::<SelectionResult>(&json).unwrap(), a);
    }
}

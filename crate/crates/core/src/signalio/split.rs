// SPDX-License-Identifier: Apache-2.0

use super::Dataset;
use crate::error::{Error, Result};
use crate::util::rng;
use rand::seq::SliceRandom;

/// Per-class train counts by largest-remainder apportionment of
/// `round(n * train_frac)`, each clamped so both sides keep a sample.
fn apportion(counts: &[usize], train_frac: f64) -> Vec<usize> {
    let total: usize = counts.iter().sum();
    let target = (total as f64 * train_frac).round() as usize;
    let quotas: Vec<f64> = counts.iter().map(|&n| n as f64 * train_frac).collect();
    let mut alloc: Vec<usize> = quotas.iter().map(|q| q.floor() as usize).collect();
    let mut order: Vec<usize> = (0..counts.len()).collect();
    // largest remainder first, lower class index on ties
    order.sort_by(|&a, &b| {
        let ra = quotas[a] - quotas[a].floor();
        let rb = quotas[b] - quotas[b].floor();
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    let mut remaining = target.saturating_sub(alloc.iter().sum());
    for &c in order.iter().cycle().take(order.len() * 2) {
        if remaining == 0 {
            break;
        }
        if alloc[c] < counts[c] {
            alloc[c] += 1;
            remaining -= 1;
        }
    }
    for (a, &n) in alloc.iter_mut().zip(counts) {
        if n >= 2 {
            *a = (*a).clamp(1, n - 1);
        }
    }
    alloc
}

/// Stratified index partition, each side sorted ascending.
pub fn split_indices(ds: &Dataset, train_frac: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(train_frac > 0.0 && train_frac < 1.0) {
        return Err(Error::invalid(format!("train_frac must be in (0,1), got {train_frac}")));
    }
    let counts = ds.class_counts();
    if let Some((c, _)) = counts.iter().enumerate().find(|(_, &n)| n == 1) {
        return Err(Error::invalid(format!("class {c} has a single sample; cannot stratify")));
    }
    let alloc = apportion(&counts, train_frac);
    let mut rng = rng(seed);
    let mut train = Vec::new();
    let mut test = Vec::new();
    for c in 0..ds.n_classes {
        let mut members: Vec<usize> = (0..ds.n_samples()).filter(|&i| ds.y[i] == c).collect();
        members.shuffle(&mut rng);
        train.extend_from_slice(&members[..alloc[c]]);
        test.extend_from_slice(&members[alloc[c]..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

pub fn stratified_split(ds: &Dataset, train_frac: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    let (train, test) = split_indices(ds, train_frac, seed)?;
    Ok((ds.subset(&train), ds.subset(&test)))
}

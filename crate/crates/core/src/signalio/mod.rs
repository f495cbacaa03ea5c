// SPDX-License-Identifier: Apache-2.0

//! Signal ingestion, windowed feature extraction, normalization and
//! stratified splitting.

mod features;
mod normalize;
mod split;
mod synth;
mod traces;

pub use features::{extract_features, window_count, window_stats, STAT_NAMES};
pub use normalize::{apply_normalizer, fit_normalizer, NormalizationParams};
pub use split::{split_indices, stratified_split};
pub use synth::{synth_dataset, synth_xor, BlobSpec};
pub use traces::{load_labels, load_traces, labels_for_windows, ChannelSpec, Manifest, SignalTrace, WindowLabel};

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::HashSet;

/// Labeled feature matrix, one row per sample.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub feature_names: Vec<String>,
    pub x: Vec<Vec<f64>>,
    pub y: Vec<usize>,
    pub n_classes: usize,
}

impl Dataset {
    pub fn new(
        feature_names: Vec<String>,
        x: Vec<Vec<f64>>,
        y: Vec<usize>,
        n_classes: usize,
    ) -> Result<Self> {
        let ds = Dataset {
            feature_names,
            x,
            y,
            n_classes,
        };
        ds.validate()?;
        Ok(ds)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_classes < 2 {
            return Err(Error::invalid("dataset needs at least 2 classes"));
        }
        if self.x.len() != self.y.len() {
            return Err(Error::DimensionMismatch {
                expected: self.x.len(),
                got: self.y.len(),
            });
        }
        let m = self.feature_names.len();
        if let Some(row) = self.x.iter().find(|r| r.len() != m) {
            return Err(Error::DimensionMismatch {
                expected: m,
                got: row.len(),
            });
        }
        if let Some(&c) = self.y.iter().find(|&&c| c >= self.n_classes) {
            return Err(Error::invalid(format!(
                "label {c} out of range for {} classes",
                self.n_classes
            )));
        }
        let mut seen = HashSet::new();
        for name in &self.feature_names {
            if !seen.insert(name.as_str()) {
                return Err(Error::invalid(format!("duplicate feature name {name}")));
            }
        }
        Ok(())
    }

    pub fn n_samples(&self) -> usize {
        self.x.len()
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.x.iter().map(|r| r[j]).collect()
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.n_classes];
        for &c in &self.y {
            counts[c] += 1;
        }
        counts
    }

    /// Keeps only the listed feature columns, in the listed order.
    pub fn select_columns(&self, indices: &[usize]) -> Result<Dataset> {
        if let Some(&bad) = indices.iter().find(|&&j| j >= self.n_features()) {
            return Err(Error::invalid(format!(
                "feature index {bad} out of range for {} features",
                self.n_features()
            )));
        }
        Ok(Dataset {
            feature_names: indices.iter().map(|&j| self.feature_names[j].clone()).collect(),
            x: self
                .x
                .iter()
                .map(|r| indices.iter().map(|&j| r[j]).collect())
                .collect(),
            y: self.y.clone(),
            n_classes: self.n_classes,
        })
    }

    /// Row subset in the listed order.
    pub fn subset(&self, rows: &[usize]) -> Dataset {
        Dataset {
            feature_names: self.feature_names.clone(),
            x: rows.iter().map(|&i| self.x[i].clone()).collect(),
            y: rows.iter().map(|&i| self.y[i]).collect(),
            n_classes: self.n_classes,
        }
    }

    pub fn majority_class(&self) -> usize {
        let counts = self.class_counts();
        let mut best = 0;
        for (c, &n) in counts.iter().enumerate() {
            if n > counts[best] {
                best = c;
            }
        }
        best
    }
}

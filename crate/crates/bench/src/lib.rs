// SPDX-License-Identifier: Apache-2.0

//! Shared fixtures for the benchmarks.

use flexclass::compress::quantize_calibrated;
use flexclass::learners::{train, Hyper, TrainSettings};
use flexclass::signalio::{synth_dataset, BlobSpec};
use flexclass::{Dataset, QuantizedModel};

pub fn blobs(n_samples: usize, n_features: usize) -> Dataset {
    let spec = BlobSpec::new(n_samples, 3.min(n_features), n_features.saturating_sub(3), 3.0, 2);
    synth_dataset(&spec, 11).expect("fixture dataset")
}

/// A trained and quantized model on `n_features` synthetic columns.
pub fn quantized(hyper: &Hyper, n_features: usize, precision: u32) -> QuantizedModel {
    let ds = blobs(300, n_features);
    let mut settings = TrainSettings::default();
    settings.mlp.epochs = 20;
    let m = train(&ds, hyper, &settings, 5).expect("fixture model");
    quantize_calibrated(&m, precision, Some(&ds.x)).expect("fixture quantization")
}

/// Deterministic pseudo-random (cost, accuracy) pairs.
pub fn cloud(n: usize, seed: u64) -> Vec<(f64, f64)> {
    let mut s = seed.wrapping_mul(0x9e37_79b9_7f4a_7c15) | 1;
    let mut next = move || {
        s ^= s << 13;
        s ^= s >> 7;
        s ^= s << 17;
        (s >> 11) as f64 / (1u64 << 53) as f64
    };
    (0..n).map(|_| (next(), next())).collect()
}

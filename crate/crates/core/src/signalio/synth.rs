// SPDX-License-Identifier: Apache-2.0

use super::Dataset;
use crate::error::{Error, Result};
use crate::util::rng;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

/// Gaussian-blob surrogate for real recordings. Informative features are
/// class-conditional Gaussians whose class means sit `separation * sigma`
/// apart; noise features are uniform on [0,1]. Columns are shuffled so the
/// informative ones are not simply the first few; their names start with
/// `inf` and the noise columns with `noise`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlobSpec {
    pub n_samples: usize,
    pub n_informative: usize,
    pub n_noise: usize,
    /// Distance between neighbouring class means in units of `sigma`.
    pub separation: f64,
    pub n_classes: usize,
    #[serde(default = "default_sigma")]
    pub sigma: f64,
}

fn default_sigma() -> f64 {
    0.05
}

impl BlobSpec {
    pub fn new(n_samples: usize, n_informative: usize, n_noise: usize, separation: f64, n_classes: usize) -> Self {
        BlobSpec {
            n_samples,
            n_informative,
            n_noise,
            separation,
            n_classes,
            sigma: default_sigma(),
        }
    }

    /// The dataset the bundled DSE configuration runs on.
    pub fn bundled() -> Self {
        BlobSpec {
            n_samples: 600,
            n_informative: 6,
            n_noise: 34,
            separation: 1.5,
            n_classes: 2,
            sigma: 0.05,
        }
    }
}

pub fn synth_dataset(spec: &BlobSpec, seed: u64) -> Result<Dataset> {
    if spec.n_informative == 0 {
        return Err(Error::invalid("n_informative must be > 0"));
    }
    if spec.n_classes < 2 {
        return Err(Error::invalid("n_classes must be >= 2"));
    }
    if spec.n_samples < spec.n_classes {
        return Err(Error::invalid("n_samples must be >= n_classes"));
    }
    if !(spec.sigma > 0.0) {
        return Err(Error::invalid("sigma must be > 0"));
    }
    let mut rng = rng(seed);
    let k = spec.n_classes;
    let m = spec.n_informative + spec.n_noise;
    let noise = Normal::new(0.0, spec.sigma).map_err(|e| Error::invalid(e.to_string()))?;

    let mut y: Vec<usize> = (0..spec.n_samples).map(|i| i % k).collect();
    y.shuffle(&mut rng);

    let centre = (k - 1) as f64 / 2.0;
    let x: Vec<Vec<f64>> = y
        .iter()
        .map(|&c| {
            let mut row = Vec::with_capacity(m);
            for f in 0..spec.n_informative {
                let offset = ((c + f) % k) as f64 - centre;
                let mean = 0.5 + offset * spec.separation * spec.sigma;
                row.push((mean + noise.sample(&mut rng)).clamp(0.0, 1.0));
            }
            for _ in 0..spec.n_noise {
                row.push(rng.random::<f64>());
            }
            row
        })
        .collect();

    let mut names: Vec<String> = (0..spec.n_informative)
        .map(|i| format!("inf{i}"))
        .chain((0..spec.n_noise).map(|i| format!("noise{i}")))
        .collect();
    let mut perm: Vec<usize> = (0..m).collect();
    perm.shuffle(&mut rng);
    names = perm.iter().map(|&j| names[j].clone()).collect();
    let x = x.into_iter().map(|r| perm.iter().map(|&j| r[j]).collect()).collect();
    Dataset::new(names, x, y, k)
}

/// Two-feature XOR pattern: `n_per_quadrant` points around each of the four
/// quadrant centres (0.25/0.75), uniformly jittered by up to `jitter`.
/// Label is 1 for the off-diagonal quadrants.
pub fn synth_xor(n_per_quadrant: usize, jitter: f64, seed: u64) -> Dataset {
    let mut rng = rng(seed);
    let mut x = Vec::new();
    let mut y = Vec::new();
    for qa in 0..2 {
        for qb in 0..2 {
            for _ in 0..n_per_quadrant {
                let mut jit = || if jitter > 0.0 { rng.random_range(-jitter..=jitter) } else { 0.0 };
                let a = 0.25 + 0.5 * qa as f64 + jit();
                let b = 0.25 + 0.5 * qb as f64 + jit();
                x.push(vec![a.clamp(0.0, 1.0), b.clamp(0.0, 1.0)]);
                y.push(qa ^ qb);
            }
        }
    }
    Dataset {
        feature_names: vec!["a".into(), "b".into()],
        x,
        y,
        n_classes: 2,
    }
}

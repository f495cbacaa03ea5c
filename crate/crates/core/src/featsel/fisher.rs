// SPDX-License-Identifier: Apache-2.0

use crate::error::{Error, Result};
use crate::signalio::Dataset;

/// Guards the denominator against zero within-class variance.
pub const FISHER_EPS: f64 = 1e-12;

/// `sum_c n_c (mu_cf - mu_f)^2 / (sum_c n_c var_cf + eps)` per feature.
pub fn fisher_scores(ds: &Dataset) -> Result<Vec<f64>> {
    let counts = ds.class_counts();
    if counts.iter().filter(|&&n| n > 0).count() < 2 {
        return Err(Error::invalid("fisher score needs at least two classes present"));
    }
    let n = ds.n_samples() as f64;
    let scores = (0..ds.n_features())
        .map(|f| {
            let mut sum = vec![0.0; ds.n_classes];
            for (row, &c) in ds.x.iter().zip(&ds.y) {
                sum[c] += row[f];
            }
            let mu = sum.iter().sum::<f64>() / n;
            let mu_c: Vec<f64> = sum
                .iter()
                .zip(&counts)
                .map(|(&s, &k)| if k > 0 { s / k as f64 } else { 0.0 })
                .collect();
            let mut within = 0.0;
            for (row, &c) in ds.x.iter().zip(&ds.y) {
                within += (row[f] - mu_c[c]).powi(2);
            }
            let between: f64 = mu_c
                .iter()
                .zip(&counts)
                .map(|(&m, &k)| k as f64 * (m - mu).powi(2))
                .sum();
            // sum_c n_c var_c equals the pooled squared deviation
            between / (within + FISHER_EPS)
        })
        .collect();
    Ok(scores)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signalio::{synth_dataset, BlobSpec};

    fn ds(x: Vec<Vec<f64>>, y: Vec<usize>) -> Dataset {
        let m = x[0].len();
        Dataset::new((0..m).map(|i| format!("f{i}")).collect(), x, y, 2).unwrap()
    }

    #[test]
    fn identical_feature_scores_zero() {
        let d = ds(vec![vec![0.3], vec![0.3], vec![0.3], vec![0.3]], vec![0, 0, 1, 1]);
        assert_eq!(fisher_scores(&d).unwrap(), vec![0.0]);
    }

    #[test]
    fn zero_variance_separation_hits_guard() {
        let d = ds(
            vec![vec![0.0, 0.1], vec![0.0, 0.9], vec![1.0, 0.2], vec![1.0, 0.8]],
            vec![0, 0, 1, 1],
        );
        let s = fisher_scores(&d).unwrap();
        // between = 4 * 0.25 = 1, within = 0
        assert!((s[0] - 1.0 / FISHER_EPS).abs() / (1.0 / FISHER_EPS) < 1e-9);
        assert!(s[0] > s[1]);
    }

    #[test]
    fn informative_beats_noise() {
        let d = synth_dataset(&BlobSpec::new(400, 1, 1, 4.0, 2), 3).unwrap();
        let s = fisher_scores(&d).unwrap();
        let inf = d.feature_names.iter().position(|n| n.starts_with("inf")).unwrap();
        assert!(s[inf] > s[1 - inf]);
    }

    #[test]
    fn affine_invariance() {
        let d = synth_dataset(&BlobSpec::new(200, 2, 2, 2.0, 3), 4).unwrap();
        let mut scaled = d.clone();
        for row in &mut scaled.x {
            for v in row.iter_mut() {
                *v = 0.25 * *v + 0.5;
            }
        }
        let a = fisher_scores(&d).unwrap();
        let b = fisher_scores(&scaled).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() <= 1e-6 * x.abs().max(1e-9), "{x} vs {y}");
        }
    }

    #[test]
    fn single_class_errors() {
        let d = Dataset::new(vec!["f".into()], vec![vec![0.1], vec![0.2]], vec![0, 0], 2).unwrap();
        assert!(fisher_scores(&d).is_err());
    }
}

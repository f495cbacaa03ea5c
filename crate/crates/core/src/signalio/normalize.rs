// SPDX-License-Identifier: Apache-2.0

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Per-feature min/max fitted on the training split.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormalizationParams {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl NormalizationParams {
    pub fn apply_row(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(self.min.iter().zip(&self.max))
            .map(|(&v, (&lo, &hi))| {
                if hi > lo {
                    ((v - lo) / (hi - lo)).clamp(0.0, 1.0)
                } else {
                    0.0
                }
            })
            .collect()
    }
}

pub fn fit_normalizer(train_x: &[Vec<f64>]) -> Result<NormalizationParams> {
    let first = train_x.first().ok_or_else(|| Error::invalid("cannot fit normalizer on empty data"))?;
    let mut min = first.clone();
    let mut max = first.clone();
    for row in &train_x[1..] {
        if row.len() != min.len() {
            return Err(Error::DimensionMismatch {
                expected: min.len(),
                got: row.len(),
            });
        }
        for (j, &v) in row.iter().enumerate() {
            min[j] = min[j].min(v);
            max[j] = max[j].max(v);
        }
    }
    Ok(NormalizationParams { min, max })
}

/// Maps into [0,1] with the fitted bounds, clamping values outside them.
/// Constant features map to 0.
pub fn apply_normalizer(x: &[Vec<f64>], params: &NormalizationParams) -> Result<Vec<Vec<f64>>> {
    x.iter()
        .map(|row| {
            if row.len() != params.min.len() {
                return Err(Error::DimensionMismatch {
                    expected: params.min.len(),
                    got: row.len(),
                });
            }
            Ok(params.apply_row(row))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn col(values: &[f64]) -> Vec<Vec<f64>> {
        values.iter().map(|&v| vec![v]).collect()
    }

    #[test]
    fn examples() {
        let p = fit_normalizer(&col(&[2.0, 4.0, 6.0])).unwrap();
        assert_eq!(apply_normalizer(&col(&[2.0, 4.0, 6.0]), &p).unwrap(), col(&[0.0, 0.5, 1.0]));
        assert_eq!(apply_normalizer(&col(&[8.0]), &p).unwrap(), col(&[1.0]));
        let c = fit_normalizer(&col(&[3.0, 3.0])).unwrap();
        assert_eq!(apply_normalizer(&col(&[3.0, 3.0]), &c).unwrap(), col(&[0.0, 0.0]));
        assert!(fit_normalizer(&[]).is_err());
    }

    proptest! {
        #[test]
        fn normalize_is_idempotent(rows in prop::collection::vec(prop::collection::vec(-1e3f64..1e3, 3), 1..30)) {
            let p = fit_normalizer(&rows).unwrap();
            let once = apply_normalizer(&rows, &p).unwrap();
            prop_assert!(once.iter().flatten().all(|v| (0.0..=1.0).contains(v)));
            let p2 = fit_normalizer(&once).unwrap();
            let twice = apply_normalizer(&once, &p2).unwrap();
            for (a, b) in once.iter().flatten().zip(twice.iter().flatten()) {
                prop_assert!((a - b).abs() < 1e-12);
            }
        }
    }
}

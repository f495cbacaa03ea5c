// SPDX-License-Identifier: Apache-2.0

//! Plug-in entropy and mutual information over discrete columns, in bits.

use crate::error::{Error, Result};

/// Equal-width binning of a [0,1] feature.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiscretizedColumn {
    pub bin_count: usize,
    pub bins: Vec<usize>,
}

impl AsRef<[usize]> for DiscretizedColumn {
    fn as_ref(&self) -> &[usize] {
        &self.bins
    }
}

pub fn discretize(values: &[f64], bin_count: usize) -> Result<DiscretizedColumn> {
    if bin_count < 2 {
        return Err(Error::invalid("bin_count must be >= 2"));
    }
    let bins = values
        .iter()
        .map(|&v| ((v.clamp(0.0, 1.0) * bin_count as f64) as usize).min(bin_count - 1))
        .collect();
    Ok(DiscretizedColumn { bin_count, bins })
}

/// Joint entropy H(c1, ..., cn) of equal-length discrete columns.
pub fn entropy(columns: &[&[usize]]) -> Result<f64> {
    let n = columns.first().map_or(0, |c| c.len());
    if n == 0 {
        return Err(Error::invalid("entropy of empty columns"));
    }
    if let Some(c) = columns.iter().find(|c| c.len() != n) {
        return Err(Error::DimensionMismatch { expected: n, got: c.len() });
    }
    let radix: Vec<u64> = columns
        .iter()
        .map(|c| c.iter().copied().max().unwrap_or(0) as u64 + 1)
        .collect();
    let mut codes: Vec<u64> = (0..n)
        .map(|i| {
            columns
                .iter()
                .zip(&radix)
                .fold(0u64, |acc, (c, &r)| acc * r + c[i] as u64)
        })
        .collect();
    // sorted run-length counting keeps the summation order fixed
    codes.sort_unstable();
    let total = n as f64;
    let mut h = 0.0;
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && codes[end] == codes[start] {
            end += 1;
        }
        let p = (end - start) as f64 / total;
        h -= p * p.log2();
        start = end;
    }
    Ok(h)
}

/// I(a; b) = H(a) + H(b) - H(a, b).
pub fn mutual_information(a: &[usize], b: &[usize]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch { expected: a.len(), got: b.len() });
    }
    let mi = entropy(&[a])? + entropy(&[b])? - entropy(&[a, b])?;
    Ok(mi.max(0.0))
}

/// I((a, b); c) = H(a, b) + H(c) - H(a, b, c).
pub fn joint_mutual_information(a: &[usize], b: &[usize], c: &[usize]) -> Result<f64> {
    if a.len() != b.len() || a.len() != c.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            got: if a.len() != b.len() { b.len() } else { c.len() },
        });
    }
    let mi = entropy(&[a, b])? + entropy(&[c])? - entropy(&[a, b, c])?;
    Ok(mi.max(0.0))
}

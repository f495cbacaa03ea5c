// SPDX-License-Identifier: Apache-2.0

use super::{Dataset, SignalTrace};
use crate::error::{Error, Result};

/// Per channel-window statistics, in emission order.
pub const STAT_NAMES: [&str; 10] = [
    "mean",
    "std",
    "min",
    "max",
    "range",
    "rms",
    "mean_abs_diff",
    "slope",
    "mean_crossings",
    "iqr",
];

fn samples_for(seconds: f64, rate: f64) -> usize {
    (seconds * rate).round() as usize
}

/// Number of complete windows that fit in `trace`.
pub fn window_count(trace: &SignalTrace, window_s: f64, stride_s: f64) -> usize {
    let len = samples_for(window_s, trace.sample_rate_hz);
    let n = trace.samples.len();
    if len == 0 || len > n {
        return 0;
    }
    let mut w = 0;
    while samples_for(w as f64 * stride_s, trace.sample_rate_hz) + len <= n {
        w += 1;
    }
    w
}

fn percentile_sorted(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

/// The ten statistics of one window. `rate` converts sample index to seconds
/// for the slope.
pub fn window_stats(window: &[f64], rate: f64) -> [f64; 10] {
    let n = window.len() as f64;
    let mean = window.iter().sum::<f64>() / n;
    let var = window.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let min = window.iter().copied().fold(f64::INFINITY, f64::min);
    let max = window.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let rms = (window.iter().map(|v| v * v).sum::<f64>() / n).sqrt();
    let mean_abs_diff = if window.len() > 1 {
        window.windows(2).map(|p| (p[1] - p[0]).abs()).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };

    let slope = if window.len() > 1 {
        let t_mean = (n - 1.0) / 2.0 / rate;
        let mut num = 0.0;
        let mut den = 0.0;
        for (i, v) in window.iter().enumerate() {
            let dt = i as f64 / rate - t_mean;
            num += dt * (v - mean);
            den += dt * dt;
        }
        num / den
    } else {
        0.0
    };

    let mut crossings = 0usize;
    let mut last_sign = 0i8;
    for v in window {
        let d = v - mean;
        let s = if d > 0.0 {
            1
        } else if d < 0.0 {
            -1
        } else {
            0
        };
        if s != 0 {
            if last_sign != 0 && s != last_sign {
                crossings += 1;
            }
            last_sign = s;
        }
    }

    let mut sorted = window.to_vec();
    sorted.sort_by(f64::total_cmp);
    let iqr = percentile_sorted(&sorted, 0.75) - percentile_sorted(&sorted, 0.25);

    [
        mean,
        var.sqrt(),
        min,
        max,
        max - min,
        rms,
        mean_abs_diff,
        slope,
        crossings as f64,
        iqr,
    ]
}

/// Windows every trace on a shared time grid and emits one row per complete
/// window with features named `<channel>_<stat>`. The result is not yet
/// normalized.
pub fn extract_features(
    traces: &[SignalTrace],
    labels: &[usize],
    window_s: f64,
    stride_s: f64,
) -> Result<Dataset> {
    if !(window_s > 0.0) || !(stride_s > 0.0) {
        return Err(Error::invalid("window and stride must be > 0"));
    }
    if traces.is_empty() {
        return Err(Error::invalid("no traces"));
    }
    let mut n_windows = usize::MAX;
    for t in traces {
        let count = window_count(t, window_s, stride_s);
        if count == 0 {
            return Err(Error::invalid(format!(
                "window of {window_s} s is longer than trace {} ({} s)",
                t.channel_name,
                t.duration_s()
            )));
        }
        n_windows = n_windows.min(count);
    }
    if labels.len() != n_windows {
        return Err(Error::invalid(format!(
            "label sequence length mismatch: {} labels for {n_windows} windows",
            labels.len()
        )));
    }

    let feature_names = traces
        .iter()
        .flat_map(|t| STAT_NAMES.iter().map(move |s| format!("{}_{s}", t.channel_name)))
        .collect();
    let x = (0..n_windows)
        .map(|w| {
            traces
                .iter()
                .flat_map(|t| {
                    let start = samples_for(w as f64 * stride_s, t.sample_rate_hz);
                    let len = samples_for(window_s, t.sample_rate_hz);
                    window_stats(&t.samples[start..start + len], t.sample_rate_hz)
                })
                .collect()
        })
        .collect();
    let n_classes = labels.iter().copied().max().map_or(2, |m| (m + 1).max(2));
    Dataset::new(feature_names, x, labels.to_vec(), n_classes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn ramp_window() {
        let s = window_stats(&[0.0, 1.0, 2.0, 3.0], 1.0);
        assert_eq!(s[0], 1.5);
        assert_eq!(s[2], 0.0);
        assert_eq!(s[3], 3.0);
        assert_eq!(s[4], 3.0);
        assert_eq!(s[6], 1.0);
        assert!((s[7] - 1.0).abs() < 1e-12);
        assert!((s[9] - 1.5).abs() < 1e-12);
    }

    #[test]
    fn constant_window() {
        let s = window_stats(&[5.0, 5.0, 5.0], 1.0);
        assert_eq!(s[1], 0.0);
        assert_eq!(s[6], 0.0);
        assert_eq!(s[8], 0.0);
        assert_eq!(s[5], 5.0);
    }

    #[test]
    fn hundred_seconds_gives_five_windows() {
        let t = SignalTrace::new("eda", 4.0, vec![0.0; 400]).unwrap();
        assert_eq!(window_count(&t, 60.0, 10.0), 5);
        let ds = extract_features(&[t], &[0, 1, 0, 1, 0], 60.0, 10.0).unwrap();
        assert_eq!(ds.n_samples(), 5);
        assert_eq!(ds.n_features(), 10);
        assert_eq!(ds.feature_names[0], "eda_mean");
        assert_eq!(ds.feature_names[9], "eda_iqr");
    }

    #[test]
    fn errors() {
        let t = SignalTrace::new("eda", 1.0, vec![0.0; 30]).unwrap();
        assert!(extract_features(&[t.clone()], &[0], 60.0, 10.0).is_err());
        assert!(extract_features(&[t], &[0, 1, 0], 30.0, 10.0).is_err());
    }

    #[test]
    fn mixed_rates_share_window_grid() {
        let a = SignalTrace::new("a", 1.0, (0..100).map(f64::from).collect()).unwrap();
        let b = SignalTrace::new("b", 4.0, vec![1.0; 400]).unwrap();
        let ds = extract_features(&[a, b], &[0, 1, 0, 1, 0], 60.0, 10.0).unwrap();
        assert_eq!(ds.n_features(), 20);
        // second window of channel a covers samples 10..70
        assert!((ds.x[1][0] - 39.5).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn translation_consistency(
            w in prop::collection::vec(-100.0f64..100.0, 2..40),
            c in -50.0f64..50.0,
        ) {
            let a = window_stats(&w, 2.0);
            let shifted: Vec<f64> = w.iter().map(|v| v + c).collect();
            let b = window_stats(&shifted, 2.0);
            for i in [0usize, 2, 3] {
                prop_assert!((b[i] - a[i] - c).abs() < 1e-9);
            }
            for i in [1usize, 4, 6] {
                prop_assert!((b[i] - a[i]).abs() < 1e-9);
            }
        }
    }
}

// SPDX-License-Identifier: Apache-2.0

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

/// One sampled channel.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignalTrace {
    pub channel_name: String,
    pub sample_rate_hz: f64,
    pub samples: Vec<f64>,
}

impl SignalTrace {
    pub fn new(channel_name: impl Into<String>, sample_rate_hz: f64, samples: Vec<f64>) -> Result<Self> {
        let channel_name = channel_name.into();
        if !(sample_rate_hz > 0.0 && sample_rate_hz.is_finite()) {
            return Err(Error::invalid(format!(
                "channel {channel_name}: sample rate must be > 0, got {sample_rate_hz}"
            )));
        }
        if samples.is_empty() {
            return Err(Error::invalid(format!("channel {channel_name}: no samples")));
        }
        if let Some(i) = samples.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!(
                "channel {channel_name}: non-finite sample at index {i}"
            )));
        }
        Ok(SignalTrace {
            channel_name,
            sample_rate_hz,
            samples,
        })
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate_hz
    }
}

/// Declares where a channel's samples live.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSpec {
    pub name: String,
    /// CSV path, relative to the manifest directory unless absolute.
    pub file: PathBuf,
    /// Header name of the sample column.
    pub column: String,
    pub sample_rate_hz: f64,
}

/// TOML manifest:
///
/// ```toml
/// labels = "labels.csv"        # optional
///
/// [[channel]]
/// name = "eda"
/// file = "eda.csv"
/// column = "value"
/// sample_rate_hz = 4.0
/// ```
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    #[serde(default)]
    pub labels: Option<PathBuf>,
    #[serde(rename = "channel")]
    pub channels: Vec<ChannelSpec>,
}

impl Manifest {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse(format!("manifest: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

fn open_csv(path: &Path) -> Result<csv::Reader<std::fs::File>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file))
}

fn parse_cell(cell: &str, path: &Path, row: usize) -> Result<f64> {
    cell.parse::<f64>().map_err(|_| {
        Error::Parse(format!(
            "{}: non-numeric cell {cell:?} at data row {row}",
            path.display()
        ))
    })
}

/// Reads one trace per declared channel. `base_dir` anchors relative paths.
pub fn load_traces(base_dir: &Path, manifest: &Manifest) -> Result<Vec<SignalTrace>> {
    manifest
        .channels
        .iter()
        .map(|spec| {
            if !(spec.sample_rate_hz > 0.0) {
                return Err(Error::invalid(format!(
                    "channel {}: declared sample rate must be > 0, got {}",
                    spec.name, spec.sample_rate_hz
                )));
            }
            let path = resolve(base_dir, &spec.file);
            let mut reader = open_csv(&path)?;
            let headers = reader.headers()?.clone();
            let col = headers
                .iter()
                .position(|h| h == spec.column)
                .ok_or_else(|| Error::ChannelNotFound(format!("{} (column {:?} in {})", spec.name, spec.column, path.display())))?;
            let mut samples = Vec::new();
            for (row, record) in reader.records().enumerate() {
                let record = record?;
                let cell = record.get(col).ok_or_else(|| {
                    Error::Parse(format!("{}: short row at data row {row}", path.display()))
                })?;
                samples.push(parse_cell(cell, &path, row)?);
            }
            SignalTrace::new(spec.name.clone(), spec.sample_rate_hz, samples)
        })
        .collect()
}

/// One row of the label file: window start time and class index.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindowLabel {
    pub start_s: f64,
    pub class: usize,
}

/// Reads a label CSV with columns `start_s,class`.
pub fn load_labels(path: &Path) -> Result<Vec<WindowLabel>> {
    let mut reader = open_csv(path)?;
    let mut out = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record?;
        if record.len() < 2 {
            return Err(Error::Parse(format!("{}: short row at data row {row}", path.display())));
        }
        let start_s = parse_cell(&record[0], path, row)?;
        let class = record[1].parse::<usize>().map_err(|_| {
            Error::Parse(format!(
                "{}: class {:?} at data row {row} is not a non-negative integer",
                path.display(),
                &record[1]
            ))
        })?;
        out.push(WindowLabel { start_s, class });
    }
    Ok(out)
}

/// Checks that label rows line up with the window grid and returns the
/// per-window classes.
pub fn labels_for_windows(labels: &[WindowLabel], n_windows: usize, stride_s: f64) -> Result<Vec<usize>> {
    if labels.len() != n_windows {
        return Err(Error::invalid(format!(
            "label sequence length mismatch: {} labels for {n_windows} windows",
            labels.len()
        )));
    }
    for (w, l) in labels.iter().enumerate() {
        let expected = w as f64 * stride_s;
        if (l.start_s - expected).abs() > 1e-6 * expected.abs().max(1.0) {
            return Err(Error::invalid(format!(
                "label row {w} starts at {} s, window starts at {expected} s",
                l.start_s
            )));
        }
    }
    Ok(labels.iter().map(|l| l.class).collect())
}

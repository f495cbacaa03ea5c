// SPDX-License-Identifier: Apache-2.0

use super::{pareto_points, DesignPoint, DseRun, Objective};
use crate::error::{Error, Result};
use crate::learners::{Algorithm, Hyper};
use crate::util::stable_hash;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::Path;

pub const RESULTS_HEADER: [&str; 13] = [
    "fs_method",
    "k",
    "algo",
    "hyper_id",
    "sparsity",
    "precision",
    "accuracy",
    "f1",
    "area_um2",
    "power_uW",
    "latency_s",
    "energy_J",
    "meets_clock",
];

/// Self-describing wrapper for every JSON artifact.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Envelope<T> {
    pub tool: String,
    pub version: String,
    pub config_hash: String,
    pub kind: String,
    pub payload: T,
}

impl<T: Serialize> Envelope<T> {
    pub fn new(kind: &str, config_hash: &str, payload: T) -> Self {
        Envelope {
            tool: "flexclass".into(),
            version: crate::VERSION.into(),
            config_hash: config_hash.into(),
            kind: kind.into(),
            payload,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }
}

impl<T: DeserializeOwned> Envelope<T> {
    pub fn from_json(text: &str, kind: &str) -> Result<Self> {
        let env: Envelope<T> = serde_json::from_str(text)?;
        if env.kind != kind {
            return Err(Error::invalid(format!("expected a {kind} artifact, found {}", env.kind)));
        }
        Ok(env)
    }

    pub fn read(path: &Path, kind: &str) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text, kind).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
    }
}

/// Short content hash of any serializable configuration.
pub fn config_hash<T: Serialize>(cfg: &T) -> String {
    let json = serde_json::to_string(cfg).unwrap_or_default();
    format!("{:016x}", stable_hash(&json))
}

fn tuple_cells(t: &super::ConfigTuple) -> Vec<String> {
    vec![
        t.fs.to_string(),
        t.k.to_string(),
        t.algo.to_string(),
        t.hyper_id.to_string(),
        t.sparsity.to_string(),
        t.precision.to_string(),
    ]
}

fn point_row(p: &DesignPoint) -> Vec<String> {
    let mut row = tuple_cells(&p.tuple);
    let m = &p.metrics;
    row.extend([
        p.accuracy.to_string(),
        p.f1.to_string(),
        m.area_um2.to_string(),
        m.power_uW.to_string(),
        m.latency_s.to_string(),
        m.energy_J.to_string(),
        m.meets_clock.to_string(),
    ]);
    row
}

fn to_csv(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::invalid(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::invalid(e.to_string()))
}

/// One row per enumerated tuple; failed tuples keep empty metric cells.
pub fn results_csv(run: &DseRun) -> Result<String> {
    let mut rows: Vec<(usize, Vec<String>)> = run.points.iter().map(|p| (p.index, point_row(p))).collect();
    rows.extend(run.errors.iter().map(|e| {
        let mut r = tuple_cells(&e.tuple);
        r.extend(std::iter::repeat_n(String::new(), 7));
        (e.index, r)
    }));
    rows.sort_by_key(|r| r.0);
    to_csv(&RESULTS_HEADER, rows.into_iter().map(|r| r.1))
}

pub fn points_csv(points: &[&DesignPoint]) -> Result<String> {
    to_csv(&RESULTS_HEADER, points.iter().map(|p| point_row(p)))
}

fn errors_csv(run: &DseRun) -> Result<String> {
    let mut header = RESULTS_HEADER[..6].to_vec();
    header.push("error");
    to_csv(
        &header,
        run.errors.iter().map(|e| {
            let mut r = tuple_cells(&e.tuple);
            r.push(e.error.clone());
            r
        }),
    )
}

/// Share of `front` per value of `key`, in percent.
pub fn composition(front: &[&DesignPoint], key: impl Fn(&DesignPoint) -> String) -> BTreeMap<String, f64> {
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    for p in front {
        *counts.entry(key(p)).or_insert(0) += 1;
    }
    counts
        .into_iter()
        .map(|(k, c)| (k, 100.0 * c as f64 / front.len() as f64))
        .collect()
}

#[allow(non_snake_case)]
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BestEntry {
    pub tuple: super::ConfigTuple,
    pub hyper: Hyper,
    pub accuracy: f64,
    pub f1: f64,
    pub area_um2: f64,
    pub power_uW: f64,
    pub latency_s: f64,
    pub energy_J: f64,
    pub meets_clock: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub n_tuples: usize,
    pub n_points: usize,
    pub n_errors: usize,
    pub n_front: usize,
    pub objective: Objective,
    /// Front composition in percent, per breakdown.
    pub composition: BTreeMap<String, BTreeMap<String, f64>>,
    /// Fraction of front points at 6 bits or fewer.
    pub low_precision_share: f64,
    pub clock_violations: usize,
    /// Most accurate point per algorithm; lower cost then enumeration
    /// order break ties.
    pub best_per_algorithm: BTreeMap<String, BestEntry>,
}

pub fn summary(run: &DseRun, objective: Objective) -> Summary {
    let front = pareto_points(&run.points, objective);
    let mut comp = BTreeMap::new();
    comp.insert("precision".to_string(), composition(&front, |p| p.tuple.precision.to_string()));
    comp.insert("fs_method".to_string(), composition(&front, |p| p.tuple.fs.to_string()));
    comp.insert("algo".to_string(), composition(&front, |p| p.tuple.algo.to_string()));
    comp.insert("sparsity".to_string(), composition(&front, |p| p.tuple.sparsity.to_string()));
    let low = front.iter().filter(|p| p.tuple.precision <= 6).count();
    let mut best = BTreeMap::new();
    for algo in Algorithm::ALL {
        let pick = run
            .points
            .iter()
            .filter(|p| p.tuple.algo == algo)
            .min_by(|a, b| {
                b.accuracy
                    .total_cmp(&a.accuracy)
                    .then(objective.cost(&a.metrics).total_cmp(&objective.cost(&b.metrics)))
                    .then(a.index.cmp(&b.index))
            });
        if let Some(p) = pick {
            best.insert(
                algo.to_string(),
                BestEntry {
                    tuple: p.tuple.clone(),
                    hyper: p.hyper.clone(),
                    accuracy: p.accuracy,
                    f1: p.f1,
                    area_um2: p.metrics.area_um2,
                    power_uW: p.metrics.power_uW,
                    latency_s: p.metrics.latency_s,
                    energy_J: p.metrics.energy_J,
                    meets_clock: p.metrics.meets_clock,
                },
            );
        }
    }
    Summary {
        n_tuples: run.n_tuples,
        n_points: run.points.len(),
        n_errors: run.errors.len(),
        n_front: front.len(),
        objective,
        composition: comp,
        low_precision_share: if front.is_empty() { 0.0 } else { low as f64 / front.len() as f64 },
        clock_violations: run.points.iter().filter(|p| !p.metrics.meets_clock).count(),
        best_per_algorithm: best,
    }
}

fn write(dir: &Path, name: &str, text: &str) -> Result<()> {
    let path = dir.join(name);
    std::fs::write(&path, text).map_err(|e| Error::io(&path, e))
}

/// Writes `results.csv`, `errors.csv`, `pareto.csv`, `pareto_by_algo.csv`,
/// `points.json` and `summary.json` under `dir`.
pub fn write_report(dir: &Path, run: &DseRun, hash: &str, objective: Objective) -> Result<Summary> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write(dir, "results.csv", &results_csv(run)?)?;
    write(dir, "errors.csv", &errors_csv(run)?)?;
    let front = pareto_points(&run.points, objective);
    write(dir, "pareto.csv", &points_csv(&front)?)?;
    let mut by_algo = Vec::new();
    for algo in Algorithm::ALL {
        let pts: Vec<DesignPoint> = run.points.iter().filter(|p| p.tuple.algo == algo).cloned().collect();
        by_algo.extend(pareto_points(&pts, objective).into_iter().cloned());
    }
    write(dir, "pareto_by_algo.csv", &points_csv(&by_algo.iter().collect::<Vec<_>>())?)?;
    Envelope::new("dse_points", hash, run).write(&dir.join("points.json"))?;
    let s = summary(run, objective);
    Envelope::new("dse_summary", hash, &s).write(&dir.join("summary.json"))?;
    Ok(s)
}

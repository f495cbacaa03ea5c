// SPDX-License-Identifier: Apache-2.0

//! Netlist simulation and the area / power / timing cost model.

use crate::besc::{Cell, Netlist};
use crate::compress::{int_inference, QuantizedModel};
use crate::error::{Error, Result};
use crate::util::rng;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Static power per unit area, per-cell delay and clock period.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CostModel {
    /// µW per µm².
    pub kappa_uw_per_um2: f64,
    pub t_cell_s: f64,
    pub t_clk_s: f64,
}

impl Default for CostModel {
    fn default() -> Self {
        CostModel {
            kappa_uw_per_um2: 5.0e-5,
            t_cell_s: 1e-6,
            t_clk_s: 5e-4,
        }
    }
}

impl CostModel {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("kappa_uw_per_um2", self.kappa_uw_per_um2),
            ("t_cell_s", self.t_cell_s),
            ("t_clk_s", self.t_clk_s),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(format!("cost model {name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

#[allow(non_snake_case)]
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HwMetrics {
    pub area_um2: f64,
    pub power_uW: f64,
    pub depth: usize,
    pub latency_s: f64,
    pub energy_J: f64,
    pub meets_clock: bool,
    pub gate_count: usize,
    pub cell_counts: BTreeMap<Cell, usize>,
}

pub fn cell_counts(n: &Netlist) -> BTreeMap<Cell, usize> {
    let mut m = BTreeMap::new();
    for g in &n.gates {
        *m.entry(g.cell).or_insert(0) += 1;
    }
    m
}

/// Total cell area in µm². Summed in hundredths so library values add
/// exactly.
pub fn area(n: &Netlist) -> f64 {
    let centi: u64 = n.gates.iter().map(|g| (g.cell.area_um2() * 100.0).round() as u64).sum();
    centi as f64 / 100.0
}

pub fn power(n: &Netlist, cm: &CostModel) -> f64 {
    cm.kappa_uw_per_um2 * area(n)
}

/// Longest input-to-output path, counted in cells.
pub fn depth(n: &Netlist) -> Result<usize> {
    let order = n.topo_order()?;
    let mut level = vec![0usize; n.n_nets as usize];
    for &i in &order {
        let g = &n.gates[i];
        level[g.output as usize] = 1 + g.inputs.iter().map(|&x| level[x as usize]).max().unwrap_or(0);
    }
    Ok(n.outputs.iter().map(|&o| level[o as usize]).max().unwrap_or(0))
}

pub fn depth_latency(n: &Netlist, cm: &CostModel) -> Result<(usize, f64, bool)> {
    let d = depth(n)?;
    let latency = d as f64 * cm.t_cell_s;
    Ok((d, latency, latency <= cm.t_clk_s))
}

pub fn metrics(n: &Netlist, cm: &CostModel) -> Result<HwMetrics> {
    cm.validate()?;
    let (depth, latency_s, meets_clock) = depth_latency(n, cm)?;
    let area_um2 = area(n);
    let power_uw = cm.kappa_uw_per_um2 * area_um2;
    Ok(HwMetrics {
        area_um2,
        power_uW: power_uw,
        depth,
        latency_s,
        energy_J: power_uw * 1e-6 * latency_s,
        meets_clock,
        gate_count: n.gates.len(),
        cell_counts: cell_counts(n),
    })
}

/// Bit-parallel evaluator that caches the topological order.
pub struct Simulator<'a> {
    netlist: &'a Netlist,
    order: Vec<usize>,
}

impl<'a> Simulator<'a> {
    pub fn new(netlist: &'a Netlist) -> Result<Self> {
        netlist.validate()?;
        Ok(Simulator {
            order: netlist.topo_order()?,
            netlist,
        })
    }

    /// Raw output bits for one vector of input bits, ports in order, each
    /// port LSB first.
    pub fn run_bits(&self, bits: &[bool]) -> Result<Vec<bool>> {
        let expected: usize = self.netlist.inputs.iter().map(|p| p.bits.len()).sum();
        if bits.len() != expected {
            return Err(Error::DimensionMismatch { expected, got: bits.len() });
        }
        let mut rest = bits;
        let lanes: Vec<Vec<u64>> = self
            .netlist
            .inputs
            .iter()
            .map(|p| {
                let (head, tail) = rest.split_at(p.bits.len());
                rest = tail;
                head.iter().map(|&b| u64::from(b)).collect()
            })
            .collect();
        let out = self.netlist.eval_words(&self.order, &lanes)?;
        Ok(out.iter().map(|w| w & 1 == 1).collect())
    }

    /// Class indices for a batch of input-code vectors.
    pub fn run_batch(&self, vectors: &[Vec<i64>]) -> Result<Vec<usize>> {
        let n = self.netlist;
        let mut out = Vec::with_capacity(vectors.len());
        for chunk in vectors.chunks(64) {
            let mut lanes: Vec<Vec<u64>> = n.inputs.iter().map(|p| vec![0u64; p.bits.len()]).collect();
            for (l, v) in chunk.iter().enumerate() {
                if v.len() != n.n_inputs() {
                    return Err(Error::DimensionMismatch { expected: n.n_inputs(), got: v.len() });
                }
                for (f, &code) in v.iter().enumerate() {
                    let width = lanes[f].len();
                    if !(0..(1i64 << width)).contains(&code) {
                        return Err(Error::invalid(format!("input code {code} does not fit {width} bits")));
                    }
                    for (b, word) in lanes[f].iter_mut().enumerate() {
                        *word |= ((code as u64 >> b) & 1) << l;
                    }
                }
            }
            let words = n.eval_words(&self.order, &lanes)?;
            for l in 0..chunk.len() {
                out.push(words.iter().enumerate().map(|(i, w)| (((w >> l) & 1) as usize) << i).sum());
            }
        }
        Ok(out)
    }
}

pub fn simulate(n: &Netlist, codes: &[i64]) -> Result<usize> {
    Ok(Simulator::new(n)?.run_batch(std::slice::from_ref(&codes.to_vec()))?[0])
}

pub fn simulate_bits(n: &Netlist, bits: &[bool]) -> Result<Vec<bool>> {
    Simulator::new(n)?.run_bits(bits)
}

pub fn simulate_batch(n: &Netlist, vectors: &[Vec<i64>]) -> Result<Vec<usize>> {
    Simulator::new(n)?.run_batch(vectors)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub vectors: usize,
    pub mismatches: usize,
    pub exhaustive: bool,
    /// First few disagreeing vectors.
    pub examples: Vec<Vec<i64>>,
}

/// Every input combination when `p * n_features <= 16`, otherwise
/// `n_random` seeded uniform vectors.
pub fn verification_vectors(n_features: usize, precision: u32, n_random: usize, seed: u64) -> (Vec<Vec<i64>>, bool) {
    let p = precision as usize;
    let top = (1i64 << p) - 1;
    if p * n_features <= 16 {
        let total = 1u64 << (p * n_features);
        let vs = (0..total)
            .map(|c| (0..n_features).map(|f| ((c >> (f * p)) as i64) & top).collect())
            .collect();
        return (vs, true);
    }
    let mut r = rng(seed);
    let vs = (0..n_random).map(|_| (0..n_features).map(|_| r.random_range(0..=top)).collect()).collect();
    (vs, false)
}

/// Compares the netlist against the integer reference on `vectors`.
pub fn verify_vectors(n: &Netlist, qm: &QuantizedModel, vectors: &[Vec<i64>]) -> Result<VerifyReport> {
    let sim = Simulator::new(n)?.run_batch(vectors)?;
    let mut report = VerifyReport {
        vectors: vectors.len(),
        mismatches: 0,
        exhaustive: false,
        examples: Vec::new(),
    };
    for (v, &got) in vectors.iter().zip(&sim) {
        if int_inference(qm, v)? != got {
            report.mismatches += 1;
            if report.examples.len() < 5 {
                report.examples.push(v.clone());
            }
        }
    }
    Ok(report)
}

/// Exhaustive or random bit-exactness check against `int_inference`.
pub fn verify(n: &Netlist, qm: &QuantizedModel, n_random: usize, seed: u64) -> Result<VerifyReport> {
    let (vs, exhaustive) = verification_vectors(qm.n_features(), qm.precision(), n_random, seed);
    let mut r = verify_vectors(n, qm, &vs)?;
    r.exhaustive = exhaustive;
    Ok(r)
}

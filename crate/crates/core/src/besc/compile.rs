// SPDX-License-Identifier: Apache-2.0

use super::builder::{Builder, Bus};
use super::netlist::{NetId, Netlist, CONST0, CONST1};
use crate::compress::{QNode, QuantizedLinear, QuantizedMlp, QuantizedModel, QuantizedTree};
use crate::error::{Error, Result};

fn output_width(n_classes: usize) -> usize {
    (usize::BITS - (n_classes.max(2) - 1).leading_zeros()) as usize
}

fn inputs(b: &mut Builder, n: usize, p: usize) -> Vec<Bus> {
    (0..n).map(|i| b.input(format!("x{i}"), p)).collect()
}

fn finish_index(b: Builder, idx: &Bus, n_classes: usize) -> Netlist {
    let outs: Vec<NetId> = (0..output_width(n_classes)).map(|i| idx.bit(i)).collect();
    b.finish(outs, n_classes)
}

/// `Σ c_i x_i + bias` built from one bespoke multiplier per weight present.
fn weighted_sum(b: &mut Builder, xs: &[Bus], weights: &[i64], present: &[bool], bias: i64) -> (Bus, usize) {
    let mut terms: Vec<Bus> = Vec::with_capacity(weights.len() + 1);
    for ((x, &c), &keep) in xs.iter().zip(weights).zip(present) {
        if keep {
            terms.push(b.const_mult(x, c));
        }
    }
    let products = terms.len();
    terms.push(Bus::constant(bias));
    (b.adder_tree(terms), products)
}

pub fn compile_mlp(qm: &QuantizedMlp) -> Result<Netlist> {
    QuantizedModel::Mlp(qm.clone()).validate()?;
    let p = qm.spec.precision as usize;
    let mut b = Builder::new();
    let mut act = inputs(&mut b, qm.layers[0].n_in(), p);
    for layer in &qm.layers {
        let mut next = Vec::with_capacity(layer.n_out());
        let mut addends = Vec::with_capacity(layer.n_out());
        for o in 0..layer.n_out() {
            let (acc, products) = weighted_sum(&mut b, &act, &layer.weights[o], &layer.mask[o], layer.bias[o]);
            b.stats.multipliers += products;
            addends.push(products + 1);
            next.push(match layer.shift {
                Some(r) => b.relu_recode(&acc, r, p),
                None => acc,
            });
        }
        b.stats.addends_per_neuron.push(addends);
        act = next;
    }
    let idx = b.argmax(&act);
    Ok(finish_index(b, &idx, act.len()))
}

pub fn compile_svm(qm: &QuantizedLinear) -> Result<Netlist> {
    QuantizedModel::LinearSvm(qm.clone()).validate()?;
    let p = qm.spec.precision as usize;
    let d = qm.weights[0].len();
    let k = qm.weights.len();
    let mut b = Builder::new();
    let xs = inputs(&mut b, d, p);
    let all = vec![true; d];
    if k == 2 {
        // class 1 wins iff s1 > s0, i.e. (w0 - w1)·x + (b0 - b1) < 0
        let diff: Vec<i64> = qm.weights[0].iter().zip(&qm.weights[1]).map(|(a, c)| a - c).collect();
        let (s, products) = weighted_sum(&mut b, &xs, &diff, &all, qm.bias[0] - qm.bias[1]);
        b.stats.multipliers += products;
        b.stats.addends_per_neuron.push(vec![products + 1]);
        let bit = if s.hi < 0 {
            CONST1
        } else if s.lo >= 0 {
            CONST0
        } else {
            *s.bits.last().unwrap()
        };
        return Ok(b.finish(vec![bit], 2));
    }
    let mut sums = Vec::with_capacity(k);
    let mut addends = Vec::with_capacity(k);
    for (w, &bias) in qm.weights.iter().zip(&qm.bias) {
        let (s, products) = weighted_sum(&mut b, &xs, w, &all, bias);
        b.stats.multipliers += products;
        addends.push(products + 1);
        sums.push(s);
    }
    b.stats.addends_per_neuron.push(addends);
    let idx = b.argmax(&sums);
    Ok(finish_index(b, &idx, k))
}

fn or_tree(b: &mut Builder, mut nets: Vec<NetId>) -> NetId {
    if nets.is_empty() {
        return CONST0;
    }
    while nets.len() > 1 {
        nets = nets
            .chunks(2)
            .map(|c| if c.len() == 2 { b.or(c[0], c[1]) } else { c[0] })
            .collect();
    }
    nets[0]
}

pub fn compile_dt(qm: &QuantizedTree) -> Result<Netlist> {
    QuantizedModel::DecisionTree(qm.clone()).validate()?;
    let p = qm.spec.precision as usize;
    let mut b = Builder::new();
    let xs = inputs(&mut b, qm.n_features, p);
    // path condition of every node, shared along prefixes
    let mut leaves: Vec<(NetId, usize)> = Vec::new();
    let mut stack = vec![(0usize, CONST1)];
    while let Some((i, cond)) = stack.pop() {
        match qm.nodes[i] {
            QNode::Leaf { class } => leaves.push((cond, class)),
            QNode::Split {
                feature,
                threshold,
                left,
                right,
            } => {
                b.stats.comparators += 1;
                let le = b.const_compare_leq(&xs[feature], threshold);
                let gt = b.inv(le);
                let l = b.and(cond, le);
                let r = b.and(cond, gt);
                stack.push((right, r));
                stack.push((left, l));
            }
        }
    }
    let outs: Vec<NetId> = (0..output_width(qm.n_classes))
        .map(|j| {
            let hits: Vec<NetId> = leaves.iter().filter(|(_, c)| (c >> j) & 1 == 1).map(|&(n, _)| n).collect();
            or_tree(&mut b, hits)
        })
        .collect();
    Ok(b.finish(outs, qm.n_classes))
}

/// Lowers any quantized model to a combinational netlist.
pub fn compile(qm: &QuantizedModel) -> Result<Netlist> {
    let n = match qm {
        QuantizedModel::DecisionTree(t) => compile_dt(t)?,
        QuantizedModel::LinearSvm(l) => compile_svm(l)?,
        QuantizedModel::Mlp(m) => compile_mlp(m)?,
    };
    n.validate()
        .map_err(|e| Error::invalid(format!("compiler produced an invalid netlist: {e}")))?;
    Ok(n)
}

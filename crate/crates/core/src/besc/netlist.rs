// SPDX-License-Identifier: Apache-2.0

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

pub type NetId = u32;
pub const CONST0: NetId = 0;
pub const CONST1: NetId = 1;

/// Technology cells of the flexible-electronics library.
#[allow(clippy::upper_case_acronyms)]
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Cell {
    INVX1,
    AND2,
    NAND2,
    OR2,
    NOR2,
    DFFNRX1,
}

impl Cell {
    pub const ALL: [Cell; 6] = [Cell::INVX1, Cell::AND2, Cell::NAND2, Cell::OR2, Cell::NOR2, Cell::DFFNRX1];

    pub fn name(self) -> &'static str {
        match self {
            Cell::INVX1 => "INVX1",
            Cell::AND2 => "AND2",
            Cell::NAND2 => "NAND2",
            Cell::OR2 => "OR2",
            Cell::NOR2 => "NOR2",
            Cell::DFFNRX1 => "DFFNRX1",
        }
    }

    /// Cell area in µm².
    pub fn area_um2(self) -> f64 {
        match self {
            Cell::INVX1 => 747.82,
            Cell::AND2 => 2121.00,
            Cell::NAND2 => 919.01,
            Cell::OR2 => 2468.85,
            Cell::NOR2 => 1053.62,
            Cell::DFFNRX1 => 16195.00,
        }
    }

    pub fn fan_in(self) -> usize {
        match self {
            Cell::INVX1 => 1,
            _ => 2,
        }
    }

    pub fn is_combinational(self) -> bool {
        self != Cell::DFFNRX1
    }

    /// Bitwise evaluation over 64 lanes. Only defined for combinational cells.
    pub fn eval_word(self, a: u64, b: u64) -> u64 {
        match self {
            Cell::INVX1 => !a,
            Cell::AND2 => a & b,
            Cell::NAND2 => !(a & b),
            Cell::OR2 => a | b,
            Cell::NOR2 => !(a | b),
            Cell::DFFNRX1 => unreachable!("sequential cell in combinational evaluation"),
        }
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Cell {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Cell::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown cell {s:?}")))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Gate {
    pub cell: Cell,
    pub inputs: Vec<NetId>,
    pub output: NetId,
}

/// A `width`-bit unsigned input port, bits LSB first.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputPort {
    pub name: String,
    pub bits: Vec<NetId>,
}

/// Resource counts recorded by the compiler.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompileStats {
    /// One per unpruned weight, including zero-valued survivors.
    pub multipliers: usize,
    /// Adder-tree operand count per neuron (or per class sum), bias included.
    pub addends_per_neuron: Vec<Vec<usize>>,
    pub comparators: usize,
}

/// Combinational gate-level circuit. Nets 0 and 1 are the constants; the
/// output bus carries the predicted class index, LSB first.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Netlist {
    pub n_nets: u32,
    pub inputs: Vec<InputPort>,
    pub outputs: Vec<NetId>,
    pub gates: Vec<Gate>,
    pub n_classes: usize,
    #[serde(default)]
    pub stats: CompileStats,
}

enum Driver {
    None,
    Const,
    Input,
    Gate(usize),
}

impl Netlist {
    pub fn from_json(text: &str) -> Result<Self> {
        let n: Netlist = serde_json::from_str(text)?;
        n.validate()?;
        Ok(n)
    }

    pub fn n_inputs(&self) -> usize {
        self.inputs.len()
    }

    pub fn input_width(&self) -> usize {
        self.inputs.first().map_or(0, |p| p.bits.len())
    }

    fn drivers(&self) -> Result<Vec<Driver>> {
        let n = self.n_nets as usize;
        if n < 2 {
            return Err(Error::invalid("netlist lacks constant nets"));
        }
        let mut drv: Vec<Driver> = (0..n).map(|_| Driver::None).collect();
        drv[0] = Driver::Const;
        drv[1] = Driver::Const;
        let mut claim = |net: NetId, d: Driver| -> Result<()> {
            let slot = drv
                .get_mut(net as usize)
                .ok_or_else(|| Error::invalid(format!("net {net} out of range")))?;
            if !matches!(slot, Driver::None) {
                return Err(Error::invalid(format!("net {net} has multiple drivers")));
            }
            *slot = d;
            Ok(())
        };
        for port in &self.inputs {
            for &b in &port.bits {
                claim(b, Driver::Input)?;
            }
        }
        for (i, g) in self.gates.iter().enumerate() {
            if !g.cell.is_combinational() {
                return Err(Error::invalid(format!("sequential cell {} in combinational netlist", g.cell)));
            }
            if g.inputs.len() != g.cell.fan_in() {
                return Err(Error::invalid(format!("gate {i} ({}) has {} inputs", g.cell, g.inputs.len())));
            }
            claim(g.output, Driver::Gate(i))?;
        }
        Ok(drv)
    }

    /// Gate indices in dependency order. Fails on cycles, undriven nets,
    /// multiple drivers and sequential cells.
    pub fn topo_order(&self) -> Result<Vec<usize>> {
        let drv = self.drivers()?;
        let mut indeg = vec![0usize; self.gates.len()];
        let mut fanout: Vec<Vec<usize>> = vec![Vec::new(); self.gates.len()];
        for (i, g) in self.gates.iter().enumerate() {
            for &inp in &g.inputs {
                match drv.get(inp as usize) {
                    None | Some(Driver::None) => {
                        return Err(Error::invalid(format!("gate {i} reads undriven net {inp}")));
                    }
                    Some(Driver::Gate(j)) => {
                        indeg[i] += 1;
                        fanout[*j].push(i);
                    }
                    _ => {}
                }
            }
        }
        for &o in &self.outputs {
            if matches!(drv.get(o as usize), None | Some(Driver::None)) {
                return Err(Error::invalid(format!("output reads undriven net {o}")));
            }
        }
        // smallest-index-first keeps the order deterministic and
        // leaves already-sorted netlists unchanged
        let mut ready: std::collections::BTreeSet<usize> = (0..self.gates.len()).filter(|&i| indeg[i] == 0).collect();
        let mut order = Vec::with_capacity(self.gates.len());
        while let Some(i) = ready.pop_first() {
            order.push(i);
            for &j in &fanout[i] {
                indeg[j] -= 1;
                if indeg[j] == 0 {
                    ready.insert(j);
                }
            }
        }
        if order.len() != self.gates.len() {
            return Err(Error::invalid("netlist contains a combinational cycle"));
        }
        Ok(order)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_classes < 1 {
            return Err(Error::invalid("netlist must declare its class count"));
        }
        self.topo_order().map(|_| ())
    }

    /// Evaluates 64 input vectors at once. `lanes[f][b]` holds bit `b` of
    /// feature `f` for every lane; returns one word per output bit.
    pub fn eval_words(&self, order: &[usize], lanes: &[Vec<u64>]) -> Result<Vec<u64>> {
        if lanes.len() != self.inputs.len() {
            return Err(Error::DimensionMismatch {
                expected: self.inputs.len(),
                got: lanes.len(),
            });
        }
        let mut v = vec![0u64; self.n_nets as usize];
        v[CONST1 as usize] = !0;
        for (port, words) in self.inputs.iter().zip(lanes) {
            if words.len() != port.bits.len() {
                return Err(Error::DimensionMismatch {
                    expected: port.bits.len(),
                    got: words.len(),
                });
            }
            for (&net, &w) in port.bits.iter().zip(words) {
                v[net as usize] = w;
            }
        }
        for &i in order {
            let g = &self.gates[i];
            let a = v[g.inputs[0] as usize];
            let b = g.inputs.get(1).map_or(0, |&n| v[n as usize]);
            v[g.output as usize] = g.cell.eval_word(a, b);
        }
        Ok(self.outputs.iter().map(|&o| v[o as usize]).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_nand() -> Netlist {
        Netlist {
            n_nets: 5,
            inputs: vec![InputPort {
                name: "x0".into(),
                bits: vec![2, 3],
            }],
            outputs: vec![4],
            gates: vec![Gate {
                cell: Cell::NAND2,
                inputs: vec![2, 3],
                output: 4,
            }],
            n_classes: 2,
            stats: CompileStats::default(),
        }
    }

    #[test]
    fn truth_tables() {
        let a = 0b1100u64;
        let b = 0b1010u64;
        assert_eq!(Cell::NAND2.eval_word(a, b) & 0xf, 0b0111);
        assert_eq!(Cell::NOR2.eval_word(a, b) & 0xf, 0b0001);
        assert_eq!(Cell::AND2.eval_word(a, b) & 0xf, 0b1000);
        assert_eq!(Cell::OR2.eval_word(a, b) & 0xf, 0b1110);
        assert_eq!(Cell::INVX1.eval_word(a, 0) & 0xf, 0b0011);
    }

    #[test]
    fn names_round_trip() {
        for c in Cell::ALL {
            assert_eq!(c.name().parse::<Cell>().unwrap(), c);
        }
        assert!("XOR2".parse::<Cell>().is_err());
    }

    #[test]
    fn rejects_cycles_and_double_drivers() {
        let mut n = one_nand();
        n.validate().unwrap();
        n.gates.push(Gate {
            cell: Cell::INVX1,
            inputs: vec![2],
            output: 4,
        });
        assert!(n.validate().is_err());

        let mut n = one_nand();
        n.n_nets = 6;
        n.gates[0].inputs = vec![2, 5];
        n.gates.push(Gate {
            cell: Cell::INVX1,
            inputs: vec![4],
            output: 5,
        });
        assert!(n.validate().unwrap_err().to_string().contains("cycle"));
    }

    #[test]
    fn rejects_sequential_and_undriven() {
        let mut n = one_nand();
        n.gates[0].cell = Cell::DFFNRX1;
        assert!(n.validate().is_err());
        let mut n = one_nand();
        n.outputs = vec![7];
        assert!(n.validate().is_err());
        let mut n = one_nand();
        n.gates[0].output = 0;
        assert!(n.validate().is_err());
    }

    #[test]
    fn json_round_trip() {
        let n = one_nand();
        let text = serde_json::to_string(&n).unwrap();
        assert_eq!(Netlist::from_json(&text).unwrap(), n);
    }
}

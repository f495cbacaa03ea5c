// SPDX-License-Identifier: Apache-2.0

//! Netlist construction with constant propagation and arithmetic macros.

use super::netlist::{CompileStats, Gate, InputPort, NetId, Netlist, CONST0, CONST1};
use super::netlist::Cell;
use std::collections::HashMap;

fn bitlen(v: i64) -> usize {
    debug_assert!(v >= 0);
    (64 - v.leading_zeros()) as usize
}

/// Minimal two's-complement (when `lo < 0`) or unsigned width covering
/// `[lo, hi]`.
pub fn width_for(lo: i64, hi: i64) -> (usize, bool) {
    debug_assert!(lo <= hi);
    if lo >= 0 {
        (bitlen(hi), false)
    } else {
        (bitlen(-(lo + 1)).max(bitlen(hi.max(0))) + 1, true)
    }
}

/// Bit vector with a known value range. Bits are LSB first; a signed bus is
/// two's complement over its width. Every valid evaluation of the circuit
/// yields a value in `[lo, hi]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bus {
    pub bits: Vec<NetId>,
    pub signed: bool,
    pub lo: i64,
    pub hi: i64,
}

impl Bus {
    pub fn constant(v: i64) -> Bus {
        let (w, signed) = width_for(v, v);
        Bus {
            bits: (0..w).map(|i| if (v >> i) & 1 == 1 { CONST1 } else { CONST0 }).collect(),
            signed,
            lo: v,
            hi: v,
        }
    }

    pub fn width(&self) -> usize {
        self.bits.len()
    }

    /// Bit `i` with sign or zero extension.
    pub fn bit(&self, i: usize) -> NetId {
        match self.bits.get(i) {
            Some(&b) => b,
            None if self.signed => *self.bits.last().unwrap_or(&CONST0),
            None => CONST0,
        }
    }

    pub fn is_const(&self) -> bool {
        self.lo == self.hi
    }

    /// Multiplies by `2^k` through wiring.
    pub fn shl(&self, k: usize) -> Bus {
        let mut bits = vec![CONST0; k];
        bits.extend_from_slice(&self.bits);
        Bus {
            bits,
            signed: self.signed,
            lo: self.lo << k,
            hi: self.hi << k,
        }
    }
}

/// Canonical signed-digit (non-adjacent form) recoding, LSB first.
pub fn csd_digits(c: i64) -> Vec<i8> {
    let mut digits = Vec::new();
    let mut n = c as i128;
    while n != 0 {
        if n & 1 == 1 {
            let d: i8 = if n & 3 == 3 { -1 } else { 1 };
            digits.push(d);
            n -= d as i128;
        } else {
            digits.push(0);
        }
        n >>= 1;
    }
    digits
}

pub struct Builder {
    n_nets: u32,
    inputs: Vec<InputPort>,
    gates: Vec<Gate>,
    /// Inverter pairs, so `inv(inv(x))` folds back to `x`.
    inverse: HashMap<NetId, NetId>,
    pub stats: CompileStats,
}

impl Default for Builder {
    fn default() -> Self {
        Self::new()
    }
}

impl Builder {
    pub fn new() -> Self {
        Builder {
            n_nets: 2,
            inputs: Vec::new(),
            gates: Vec::new(),
            inverse: HashMap::new(),
            stats: CompileStats::default(),
        }
    }

    pub fn gate_count(&self) -> usize {
        self.gates.len()
    }

    fn fresh(&mut self) -> NetId {
        let n = self.n_nets;
        self.n_nets += 1;
        n
    }

    fn emit(&mut self, cell: Cell, inputs: Vec<NetId>) -> NetId {
        let output = self.fresh();
        self.gates.push(Gate { cell, inputs, output });
        output
    }

    /// Unsigned input port of `width` bits.
    pub fn input(&mut self, name: impl Into<String>, width: usize) -> Bus {
        let bits: Vec<NetId> = (0..width).map(|_| self.fresh()).collect();
        self.inputs.push(InputPort {
            name: name.into(),
            bits: bits.clone(),
        });
        Bus {
            bits,
            signed: false,
            lo: 0,
            hi: (1i64 << width) - 1,
        }
    }

    pub fn inv(&mut self, a: NetId) -> NetId {
        match a {
            CONST0 => CONST1,
            CONST1 => CONST0,
            _ => {
                if let Some(&x) = self.inverse.get(&a) {
                    return x;
                }
                let y = self.emit(Cell::INVX1, vec![a]);
                self.inverse.insert(a, y);
                self.inverse.insert(y, a);
                y
            }
        }
    }

    pub fn nand(&mut self, a: NetId, b: NetId) -> NetId {
        match (a, b) {
            (CONST0, _) | (_, CONST0) => CONST1,
            (CONST1, x) | (x, CONST1) => self.inv(x),
            _ if a == b => self.inv(a),
            _ => self.emit(Cell::NAND2, vec![a, b]),
        }
    }

    pub fn and(&mut self, a: NetId, b: NetId) -> NetId {
        match (a, b) {
            (CONST0, _) | (_, CONST0) => CONST0,
            (CONST1, x) | (x, CONST1) => x,
            _ if a == b => a,
            _ => self.emit(Cell::AND2, vec![a, b]),
        }
    }

    pub fn or(&mut self, a: NetId, b: NetId) -> NetId {
        match (a, b) {
            (CONST1, _) | (_, CONST1) => CONST1,
            (CONST0, x) | (x, CONST0) => x,
            _ if a == b => a,
            _ => self.emit(Cell::OR2, vec![a, b]),
        }
    }

    pub fn nor(&mut self, a: NetId, b: NetId) -> NetId {
        match (a, b) {
            (CONST1, _) | (_, CONST1) => CONST0,
            (CONST0, x) | (x, CONST0) => self.inv(x),
            _ if a == b => self.inv(a),
            _ => self.emit(Cell::NOR2, vec![a, b]),
        }
    }

    /// The three NAND2 shared by XOR and half-adder: returns
    /// `(nand(a,b), nand(a,n1), nand(b,n1))`.
    fn xor_core(&mut self, a: NetId, b: NetId) -> (NetId, NetId, NetId) {
        let n1 = self.nand(a, b);
        let n2 = self.nand(a, n1);
        let n3 = self.nand(b, n1);
        (n1, n2, n3)
    }

    /// XOR2 from four NAND2.
    pub fn xor(&mut self, a: NetId, b: NetId) -> NetId {
        match (a, b) {
            (CONST0, x) | (x, CONST0) => x,
            (CONST1, x) | (x, CONST1) => self.inv(x),
            _ if a == b => CONST0,
            _ => {
                let (_, n2, n3) = self.xor_core(a, b);
                self.nand(n2, n3)
            }
        }
    }

    fn xnor(&mut self, a: NetId, b: NetId) -> NetId {
        let (_, n2, n3) = self.xor_core(a, b);
        self.and(n2, n3)
    }

    /// Returns `(sum, carry)`.
    pub fn half_adder(&mut self, a: NetId, b: NetId) -> (NetId, NetId) {
        match (a, b) {
            (CONST0, x) | (x, CONST0) => (x, CONST0),
            (CONST1, x) | (x, CONST1) => (self.inv(x), x),
            _ => {
                let (n1, n2, n3) = self.xor_core(a, b);
                let s = self.nand(n2, n3);
                (s, self.inv(n1))
            }
        }
    }

    /// Full adder, nine NAND2 when all inputs are variable; constant inputs
    /// reduce it to a half adder or simpler.
    pub fn full_adder(&mut self, a: NetId, b: NetId, c: NetId) -> (NetId, NetId) {
        let ones = [a, b, c].iter().filter(|&&n| n == CONST1).count();
        let vars: Vec<NetId> = [a, b, c].into_iter().filter(|&n| n != CONST0 && n != CONST1).collect();
        let k = |v: bool| if v { CONST1 } else { CONST0 };
        match (vars.as_slice(), ones) {
            ([], n) => (k(n & 1 == 1), k(n >= 2)),
            (&[x], 0) => (x, CONST0),
            (&[x], 1) => (self.inv(x), x),
            (&[x], _) => (x, CONST1),
            (&[x, y], 0) => self.half_adder(x, y),
            (&[x, y], _) => {
                let s = self.xnor(x, y);
                (s, self.or(x, y))
            }
            _ => {
                let (n1, n2, n3) = self.xor_core(a, b);
                let s1 = self.nand(n2, n3);
                let n5 = self.nand(s1, c);
                let n6 = self.nand(s1, n5);
                let n7 = self.nand(c, n5);
                let sum = self.nand(n6, n7);
                (sum, self.nand(n1, n5))
            }
        }
    }

    /// `w`-bit ripple sum of two bit sources plus carry-in, carry-out
    /// discarded.
    fn ripple(&mut self, w: usize, a: impl Fn(usize) -> NetId, b: impl Fn(usize) -> NetId, cin: NetId) -> Vec<NetId> {
        let mut carry = cin;
        let mut out = Vec::with_capacity(w);
        for i in 0..w {
            if i + 1 == w {
                let t = self.xor(a(i), b(i));
                out.push(self.xor(t, carry));
            } else {
                let (s, c) = self.full_adder(a(i), b(i), carry);
                out.push(s);
                carry = c;
            }
        }
        out
    }

    fn sized(bits: Vec<NetId>, lo: i64, hi: i64) -> Bus {
        let (_, signed) = width_for(lo, hi);
        Bus { bits, signed, lo, hi }
    }

    /// `a + b` over the given result range.
    pub fn add_ranged(&mut self, a: &Bus, b: &Bus, lo: i64, hi: i64) -> Bus {
        if lo == hi {
            return Bus::constant(lo);
        }
        let (w, _) = width_for(lo, hi);
        let bits = self.ripple(w, |i| a.bit(i), |i| b.bit(i), CONST0);
        Self::sized(bits, lo, hi)
    }

    pub fn add(&mut self, a: &Bus, b: &Bus) -> Bus {
        self.add_ranged(a, b, a.lo + b.lo, a.hi + b.hi)
    }

    /// `a - b` over the given result range, as `a + ~b + 1`.
    pub fn sub_ranged(&mut self, a: &Bus, b: &Bus, lo: i64, hi: i64) -> Bus {
        if lo == hi {
            return Bus::constant(lo);
        }
        let (w, _) = width_for(lo, hi);
        let nb: Vec<NetId> = (0..w).map(|i| self.inv(b.bit(i))).collect();
        let bits = self.ripple(w, |i| a.bit(i), |i| nb[i], CONST1);
        Self::sized(bits, lo, hi)
    }

    pub fn sub(&mut self, a: &Bus, b: &Bus) -> Bus {
        self.sub_ranged(a, b, a.lo - b.hi, a.hi - b.lo)
    }

    /// Bitwise inversion plus increment.
    pub fn neg(&mut self, a: &Bus) -> Bus {
        let (lo, hi) = (-a.hi, -a.lo);
        if lo == hi {
            return Bus::constant(lo);
        }
        let (w, _) = width_for(lo, hi);
        let na: Vec<NetId> = (0..w).map(|i| self.inv(a.bit(i))).collect();
        let mut carry = CONST1;
        let mut bits = Vec::with_capacity(w);
        for (i, &x) in na.iter().enumerate() {
            if i + 1 == w {
                bits.push(self.xor(x, carry));
            } else {
                let (s, c) = self.half_adder(x, carry);
                bits.push(s);
                carry = c;
            }
        }
        Self::sized(bits, lo, hi)
    }

    /// Hardwired multiplication by `c`: one shifted addend per nonzero CSD
    /// digit, accumulated with ripple adders/subtractors.
    pub fn const_mult(&mut self, x: &Bus, c: i64) -> Bus {
        let range = |k: i64| {
            let (p, q) = (k * x.lo, k * x.hi);
            (p.min(q), p.max(q))
        };
        let mut acc: Option<Bus> = None;
        let mut partial = 0i64;
        for (k, &d) in csd_digits(c).iter().enumerate() {
            if d == 0 {
                continue;
            }
            let term = x.shl(k);
            partial += (d as i64) << k;
            let (lo, hi) = range(partial);
            acc = Some(match acc {
                None if d > 0 => term,
                None => self.neg(&term),
                Some(a) if d > 0 => self.add_ranged(&a, &term, lo, hi),
                Some(a) => self.sub_ranged(&a, &term, lo, hi),
            });
        }
        acc.unwrap_or_else(|| Bus::constant(0))
    }

    /// Balanced binary tree of adders.
    pub fn adder_tree(&mut self, mut terms: Vec<Bus>) -> Bus {
        if terms.is_empty() {
            return Bus::constant(0);
        }
        while terms.len() > 1 {
            let mut next = Vec::with_capacity(terms.len().div_ceil(2));
            let mut it = terms.into_iter();
            while let Some(a) = it.next() {
                match it.next() {
                    Some(b) => next.push(self.add(&a, &b)),
                    None => next.push(a),
                }
            }
            terms = next;
        }
        terms.pop().unwrap()
    }

    /// `x >= t` for an unsigned bus, as the carry-out of `x + ~t + 1`.
    pub fn const_compare_geq(&mut self, x: &Bus, t: i64) -> NetId {
        let w = x.width();
        if t <= x.lo {
            return CONST1;
        }
        if t > x.hi {
            return CONST0;
        }
        let mut carry = CONST1;
        for i in 0..w {
            // carry = maj(x_i, ~t_i, carry)
            carry = if (t >> i) & 1 == 0 {
                self.or(x.bit(i), carry)
            } else {
                self.and(x.bit(i), carry)
            };
        }
        carry
    }

    /// `x <= t`, i.e. `!(x >= t + 1)`.
    pub fn const_compare_leq(&mut self, x: &Bus, t: i64) -> NetId {
        let g = self.const_compare_geq(x, t + 1);
        self.inv(g)
    }

    /// `a > b` (signed), from the sign of `b - a`.
    pub fn greater(&mut self, a: &Bus, b: &Bus) -> NetId {
        let (lo, hi) = (b.lo - a.hi, b.hi - a.lo);
        if hi < 0 {
            return CONST1;
        }
        if lo >= 0 {
            return CONST0;
        }
        let d = self.sub_ranged(b, a, lo, hi);
        *d.bits.last().unwrap()
    }

    /// `sel ? a : b`.
    pub fn mux(&mut self, sel: NetId, a: &Bus, b: &Bus) -> Bus {
        match sel {
            CONST1 => return a.clone(),
            CONST0 => return b.clone(),
            _ => {}
        }
        let (lo, hi) = (a.lo.min(b.lo), a.hi.max(b.hi));
        let (w, _) = width_for(lo, hi);
        let nsel = self.inv(sel);
        let bits = (0..w)
            .map(|i| {
                let (ai, bi) = (a.bit(i), b.bit(i));
                if ai == bi {
                    return ai;
                }
                let p = self.nand(sel, ai);
                let q = self.nand(nsel, bi);
                self.nand(p, q)
            })
            .collect();
        Self::sized(bits, lo, hi)
    }

    /// `clamp(max(acc, 0) >> r, 0, 2^p - 1)` as an unsigned bus.
    pub fn relu_recode(&mut self, acc: &Bus, r: u32, p: usize) -> Bus {
        let top = (1i64 << p) - 1;
        let f = |v: i64| (v.max(0) >> r).min(top);
        let (lo, hi) = (f(acc.lo), f(acc.hi));
        if lo == hi {
            return Bus::constant(lo);
        }
        let r = r as usize;
        let sign = if acc.lo < 0 { *acc.bits.last().unwrap() } else { CONST0 };
        let magnitude_bits = acc.width() - usize::from(acc.signed);
        let mut ov = CONST0;
        if (acc.hi.max(0) >> r) > top {
            for i in (r + p)..magnitude_bits {
                ov = self.or(ov, acc.bits[i]);
            }
        }
        let (w, _) = width_for(lo, hi);
        let bits = (0..w)
            .map(|i| {
                let t = if r + i < magnitude_bits { acc.bits[r + i] } else { CONST0 };
                let keep = self.nor(t, ov);
                self.nor(keep, sign)
            })
            .collect();
        Bus {
            bits,
            signed: false,
            lo,
            hi,
        }
    }

    /// Index of the largest value, lowest index on ties, by a balanced
    /// tournament of strict-greater comparisons.
    pub fn argmax(&mut self, values: &[Bus]) -> Bus {
        fn go(b: &mut Builder, values: &[Bus], base: usize) -> (Bus, Bus) {
            if values.len() == 1 {
                return (values[0].clone(), Bus::constant(base as i64));
            }
            let mid = values.len() / 2;
            let (lv, li) = go(b, &values[..mid], base);
            let (rv, ri) = go(b, &values[mid..], base + mid);
            let g = b.greater(&rv, &lv);
            let v = b.mux(g, &rv, &lv);
            let i = b.mux(g, &ri, &li);
            (v, i)
        }
        assert!(!values.is_empty());
        go(self, values, 0).1
    }

    /// Drops gates that do not reach `outputs` and renumbers nets densely.
    pub fn finish(self, outputs: Vec<NetId>, n_classes: usize) -> Netlist {
        let mut live = vec![false; self.n_nets as usize];
        for &o in &outputs {
            live[o as usize] = true;
        }
        let mut keep = vec![false; self.gates.len()];
        for (i, g) in self.gates.iter().enumerate().rev() {
            if live[g.output as usize] {
                keep[i] = true;
                for &inp in &g.inputs {
                    live[inp as usize] = true;
                }
            }
        }
        let mut map: Vec<NetId> = vec![NetId::MAX; self.n_nets as usize];
        map[0] = CONST0;
        map[1] = CONST1;
        let mut next: NetId = 2;
        let mut assign = |n: NetId, map: &mut Vec<NetId>| {
            map[n as usize] = next;
            next += 1;
        };
        for port in &self.inputs {
            for &b in &port.bits {
                assign(b, &mut map);
            }
        }
        for (g, &k) in self.gates.iter().zip(&keep) {
            if k {
                assign(g.output, &mut map);
            }
        }
        let inputs = self
            .inputs
            .iter()
            .map(|p| InputPort {
                name: p.name.clone(),
                bits: p.bits.iter().map(|&b| map[b as usize]).collect(),
            })
            .collect();
        let gates = self
            .gates
            .iter()
            .zip(&keep)
            .filter(|(_, &k)| k)
            .map(|(g, _)| Gate {
                cell: g.cell,
                inputs: g.inputs.iter().map(|&n| map[n as usize]).collect(),
                output: map[g.output as usize],
            })
            .collect();
        Netlist {
            n_nets: next,
            inputs,
            outputs: outputs.iter().map(|&o| map[o as usize]).collect(),
            gates,
            n_classes,
            stats: self.stats,
        }
    }
}

// SPDX-License-Identifier: Apache-2.0

use super::netlist::{NetId, Netlist, CONST0, CONST1};
use std::collections::HashMap;
use std::fmt::Write;

fn identifier(name: &str) -> String {
    let mut s: String = name
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '_' { c } else { '_' })
        .collect();
    if s.is_empty() || s.starts_with(|c: char| c.is_ascii_digit()) {
        s.insert(0, '_');
    }
    s
}

/// Structural Verilog for `n`: one module, ports `x<i>` and `y`, nets
/// `n<id>`, instances `u<k>` in gate order.
pub fn emit_verilog(n: &Netlist, name: &str) -> String {
    let mut names: HashMap<NetId, String> = HashMap::new();
    names.insert(CONST0, "1'b0".into());
    names.insert(CONST1, "1'b1".into());
    for p in &n.inputs {
        for (i, &b) in p.bits.iter().enumerate() {
            names.insert(b, format!("{}[{i}]", identifier(&p.name)));
        }
    }
    for g in &n.gates {
        names.insert(g.output, format!("n{}", g.output));
    }
    let net = |id: NetId| names.get(&id).cloned().unwrap_or_else(|| format!("n{id}"));

    let mut v = String::new();
    let mut ports: Vec<String> = n.inputs.iter().map(|p| identifier(&p.name)).collect();
    ports.push("y".into());
    let _ = writeln!(v, "module {} ({});", identifier(name), ports.join(", "));
    for p in &n.inputs {
        let _ = writeln!(v, "  input [{}:0] {};", p.bits.len().saturating_sub(1), identifier(&p.name));
    }
    let _ = writeln!(v, "  output [{}:0] y;", n.outputs.len().saturating_sub(1));
    for chunk in n.gates.chunks(16) {
        let wires: Vec<String> = chunk.iter().map(|g| format!("n{}", g.output)).collect();
        let _ = writeln!(v, "  wire {};", wires.join(", "));
    }
    for (k, g) in n.gates.iter().enumerate() {
        let pins = ["A", "B"];
        let mut conns: Vec<String> = g.inputs.iter().zip(pins).map(|(&i, pin)| format!(".{pin}({})", net(i))).collect();
        conns.push(format!(".Y({})", net(g.output)));
        let _ = writeln!(v, "  {} u{k} ({});", g.cell, conns.join(", "));
    }
    for (i, &o) in n.outputs.iter().enumerate() {
        let _ = writeln!(v, "  assign y[{i}] = {};", net(o));
    }
    v.push_str("endmodule\n");
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::besc::netlist::{Cell, CompileStats, Gate, InputPort};

    #[test]
    fn single_gate() {
        let n = Netlist {
            n_nets: 5,
            inputs: vec![InputPort { name: "x0".into(), bits: vec![2, 3] }],
            outputs: vec![4],
            gates: vec![Gate { cell: Cell::NAND2, inputs: vec![2, 3], output: 4 }],
            n_classes: 2,
            stats: CompileStats::default(),
        };
        let v = emit_verilog(&n, "clf");
        let inst: Vec<&str> = v.lines().filter(|l| l.contains(" u")).collect();
        assert_eq!(inst, vec!["  NAND2 u0 (.A(x0[0]), .B(x0[1]), .Y(n4));"]);
        assert!(v.starts_with("module clf (x0, y);\n"));
        assert!(v.contains("assign y[0] = n4;"));
        assert_eq!(v, emit_verilog(&n, "clf"));
    }

    #[test]
    fn constant_output() {
        let n = Netlist {
            n_nets: 4,
            inputs: vec![InputPort { name: "x0".into(), bits: vec![2, 3] }],
            outputs: vec![CONST1],
            gates: vec![],
            n_classes: 2,
            stats: CompileStats::default(),
        };
        let v = emit_verilog(&n, "9bad-name");
        assert!(v.starts_with("module _9bad_name ("));
        assert!(v.contains("assign y[0] = 1'b1;"));
        assert!(!v.contains("wire"));
    }
}

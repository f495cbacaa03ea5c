// SPDX-License-Identifier: Apache-2.0

//! Bespoke compiler: lowers a quantized model to a fully parallel,
//! purely combinational netlist with every coefficient hardwired.

mod builder;
mod compile;
mod netlist;
mod verilog;

pub use builder::{csd_digits, width_for, Builder, Bus};
pub use compile::{compile, compile_dt, compile_mlp, compile_svm};
pub use netlist::{Cell, CompileStats, Gate, InputPort, NetId, Netlist, CONST0, CONST1};
pub use verilog::emit_verilog;

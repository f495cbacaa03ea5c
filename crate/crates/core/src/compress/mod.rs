// SPDX-License-Identifier: Apache-2.0

//! Pruning-aware retraining and fixed-point quantization.
//!
//! Fixed-point contract shared with the netlist compiler:
//!
//! * inputs are unsigned, `q_x = round(x * (2^p - 1))`;
//! * weights use one scale per layer, `s_w = max |w|`, and are coded
//!   symmetrically in `±(2^(p-1) - 1)`;
//! * biases are coded at the accumulator LSB, so they add directly;
//! * hidden activations are recoded with `clamp(relu(acc) >> r, 0, 2^p - 1)`.
//!
//! Rounding is half away from zero everywhere.

mod infer;
mod prune;
mod quant;

pub use infer::{int_inference, quantized_accuracy, quantized_predict};
pub use prune::{prune_mask, prune_retrain, saliency, PruneCriterion, PruneReport};
pub use quant::{
    quantize, quantize_calibrated, round_half_away, FixedPointSpec, QNode, QuantizedLayer, QuantizedLinear,
    QuantizedMlp, QuantizedModel, QuantizedTree, STANDARD_PRECISIONS,
};

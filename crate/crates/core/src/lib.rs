// SPDX-License-Identifier: Apache-2.0

//! Training, compression and bespoke gate-level compilation of compact
//! classifiers for flexible-electronics wearables.
//!
//! The pipeline runs in this order:
//!
//! 1. [`signalio`]: ingest traces, extract window statistics, normalize, split.
//! 2. [`featsel`]: rank features with Fisher score, JMI or DISR.
//! 3. [`learners`]: train decision trees, linear SVMs and ReLU MLPs.
//! 4. [`compress`]: pruning-aware retraining and fixed-point quantization.
//! 5. [`besc`]: lower a quantized model to a combinational netlist.
//! 6. [`hweval`]: simulate the netlist and estimate area, power and latency.
//! 7. [`dse`]: sweep the configuration grid and extract Pareto fronts.

pub mod besc;
pub mod compress;
pub mod dse;
pub mod error;
pub mod featsel;
pub mod hweval;
pub mod learners;
pub mod signalio;
mod util;

pub use besc::{Cell, Netlist};
pub use compress::{FixedPointSpec, PruneCriterion, PruneReport, QuantizedModel};
pub use dse::{ConfigTuple, DesignPoint, DseConfig};
pub use error::{Error, Result};
pub use featsel::{FsMethod, SelectionResult};
pub use hweval::{CostModel, HwMetrics};
pub use learners::{Algorithm, DecisionTree, LinearSvm, Mlp, TrainedModel};
pub use signalio::{Dataset, NormalizationParams, SignalTrace};
pub use util::stable_hash;

/// Tool version embedded in emitted artifacts.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

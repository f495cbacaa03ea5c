// SPDX-License-Identifier: Apache-2.0

//! Filter feature selection: Fisher score, JMI and DISR.

mod fisher;
mod mi;
mod select;

pub use fisher::{fisher_scores, FISHER_EPS};
pub use mi::{discretize, entropy, joint_mutual_information, mutual_information, DiscretizedColumn};
pub use select::{select_features, sweep_k, DisrNormalization, FsMethod, SelectionOptions, SelectionResult};

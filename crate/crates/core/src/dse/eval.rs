// SPDX-License-Identifier: Apache-2.0

use super::{derive_seed, enumerate, ConfigTuple, DesignPoint, DseConfig};
use crate::besc::compile;
use crate::compress::{prune_retrain, quantize_calibrated, quantized_accuracy, PruneReport, QuantizedModel};
use crate::error::{Error, Result};
use crate::featsel::{select_features, sweep_k, FsMethod, SelectionResult};
use crate::hweval::{metrics, verify};
use crate::learners::{train, Algorithm, Hyper, TrainedModel};
use crate::signalio::{apply_normalizer, fit_normalizer, stratified_split, Dataset, NormalizationParams};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

/// Normalized train/test split shared by every configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Prepared {
    pub train: Dataset,
    pub test: Dataset,
    pub normalization: NormalizationParams,
}

impl Prepared {
    /// Both splits restricted to `sel`'s features, in selection order.
    pub fn columns(&self, sel: &SelectionResult) -> Result<(Dataset, Dataset)> {
        Ok((
            self.train.select_columns(&sel.selected_indices)?,
            self.test.select_columns(&sel.selected_indices)?,
        ))
    }
}

/// Stratified split, then min-max scaling fitted on the training side.
pub fn prepare(ds: &Dataset, train_frac: f64, seed: u64) -> Result<Prepared> {
    let (mut tr, mut te) = stratified_split(ds, train_frac, derive_seed(seed, "split", ""))?;
    let normalization = fit_normalizer(&tr.x)?;
    tr.x = apply_normalizer(&tr.x, &normalization)?;
    te.x = apply_normalizer(&te.x, &normalization)?;
    Ok(Prepared {
        train: tr,
        test: te,
        normalization,
    })
}

fn check_k(k: usize, available: usize) -> Result<()> {
    if k > available {
        return Err(Error::invalid(format!("k = {k} exceeds the {available} available features")));
    }
    Ok(())
}

pub fn select_for(prep: &Prepared, fs: FsMethod, k: usize, cfg: &DseConfig) -> Result<SelectionResult> {
    check_k(k, prep.train.n_features())?;
    select_features(&prep.train, fs, k, &cfg.selection)
}

fn hyper_for(cfg: &DseConfig, algo: Algorithm, hyper_id: usize) -> Result<Hyper> {
    let configs = cfg.hypers.configs(algo);
    configs
        .get(hyper_id)
        .cloned()
        .ok_or_else(|| Error::invalid(format!("hyper_id {hyper_id} out of range for {algo} ({} entries)", configs.len())))
}

/// Trains the tuple's own hyperparameters on the selected training columns.
pub fn train_for(train_sel: &Dataset, tuple: &ConfigTuple, cfg: &DseConfig) -> Result<(Hyper, TrainedModel)> {
    let hyper = hyper_for(cfg, tuple.algo, tuple.hyper_id)?;
    let seed = derive_seed(cfg.seed, "train", &tuple.training_key());
    let model = train(train_sel, &hyper, &cfg.training, seed)?;
    Ok((hyper, model))
}

fn prune_for(
    model: &TrainedModel,
    hyper: &Hyper,
    train_sel: &Dataset,
    tuple: &ConfigTuple,
    cfg: &DseConfig,
) -> Result<(TrainedModel, Option<PruneReport>)> {
    match (model, hyper) {
        (TrainedModel::Mlp(m), Hyper::Mlp { lr, .. }) if tuple.sparsity > 0.0 => {
            let seed = derive_seed(cfg.seed, "prune", &format!("{}/{}", tuple.training_key(), tuple.sparsity));
            let (pruned, report) =
                prune_retrain(m, train_sel, cfg.prune_criterion, tuple.sparsity, *lr, &cfg.training.mlp, seed)?;
            Ok((TrainedModel::Mlp(pruned), Some(report)))
        }
        (_, _) if tuple.sparsity > 0.0 => Err(Error::invalid("sparsity applies to MLP models only")),
        _ => Ok((model.clone(), None)),
    }
}

/// Pruned (when requested) and quantized model for one tuple.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Compressed {
    pub model: TrainedModel,
    pub prune: Option<PruneReport>,
    pub quantized: QuantizedModel,
}

pub fn compress_model(
    model: &TrainedModel,
    hyper: &Hyper,
    train_sel: &Dataset,
    tuple: &ConfigTuple,
    cfg: &DseConfig,
) -> Result<Compressed> {
    let (model, prune) = prune_for(model, hyper, train_sel, tuple, cfg)?;
    let quantized = quantize_calibrated(&model, tuple.precision, Some(&train_sel.x))?;
    Ok(Compressed { model, prune, quantized })
}

/// Compiles, spot-checks bit-exactness, scores on the test split and
/// measures the netlist.
pub fn evaluate_compressed(
    index: usize,
    tuple: &ConfigTuple,
    hyper: &Hyper,
    selected: &[usize],
    qm: &QuantizedModel,
    test_sel: &Dataset,
    cfg: &DseConfig,
) -> Result<DesignPoint> {
    let netlist = compile(qm)?;
    let check = verify(&netlist, qm, cfg.spot_check_vectors, derive_seed(cfg.seed, "verify", &tuple.key()))?;
    if check.mismatches > 0 {
        return Err(Error::Verification {
            mismatches: check.mismatches,
            vectors: check.vectors,
        });
    }
    let scores = quantized_accuracy(qm, test_sel)?;
    let hw = metrics(&netlist, &cfg.cost)?;
    Ok(DesignPoint {
        index,
        tuple: tuple.clone(),
        hyper: hyper.clone(),
        selected_features: selected.to_vec(),
        accuracy: scores.accuracy,
        f1: scores.f1,
        metrics: hw,
        multipliers: netlist.stats.multipliers,
        comparators: netlist.stats.comparators,
        verified_vectors: check.vectors,
    })
}

/// Full pipeline for a single tuple.
pub fn evaluate(index: usize, tuple: &ConfigTuple, prep: &Prepared, cfg: &DseConfig) -> Result<DesignPoint> {
    let sel = select_for(prep, tuple.fs, tuple.k, cfg)?;
    let (tr, te) = prep.columns(&sel)?;
    let (hyper, model) = train_for(&tr, tuple, cfg)?;
    let c = compress_model(&model, &hyper, &tr, tuple, cfg)?;
    evaluate_compressed(index, tuple, &hyper, &sel.selected_indices, &c.quantized, &te, cfg)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorRecord {
    pub index: usize,
    pub tuple: ConfigTuple,
    pub error: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DseRun {
    pub n_tuples: usize,
    pub points: Vec<DesignPoint>,
    pub errors: Vec<ErrorRecord>,
}

type Outcome = std::result::Result<DesignPoint, ErrorRecord>;

fn fail(group: &[(usize, ConfigTuple)], e: &Error) -> Vec<Outcome> {
    group
        .iter()
        .map(|(i, t)| {
            Err(ErrorRecord {
                index: *i,
                tuple: t.clone(),
                error: e.to_string(),
            })
        })
        .collect()
}

/// All tuples that share one trained model.
fn eval_group(
    group: &[(usize, ConfigTuple)],
    prep: &Prepared,
    selections: &HashMap<(FsMethod, usize), SelectionResult>,
    cfg: &DseConfig,
) -> Vec<Outcome> {
    let head = &group[0].1;
    let sel = match selections.get(&(head.fs, head.k)) {
        Some(s) => s,
        None => {
            let e = check_k(head.k, prep.train.n_features())
                .err()
                .unwrap_or_else(|| Error::invalid("feature selection failed"));
            return fail(group, &e);
        }
    };
    let (tr, te) = match prep.columns(sel) {
        Ok(v) => v,
        Err(e) => return fail(group, &e),
    };
    let (hyper, model) = match train_for(&tr, head, cfg) {
        Ok(v) => v,
        Err(e) => return fail(group, &e),
    };
    let mut out = Vec::with_capacity(group.len());
    let mut pruned: Vec<(f64, Result<(TrainedModel, Option<PruneReport>)>)> = Vec::new();
    for (i, t) in group {
        if !pruned.iter().any(|(s, _)| *s == t.sparsity) {
            pruned.push((t.sparsity, prune_for(&model, &hyper, &tr, t, cfg)));
        }
        let base = &pruned.iter().find(|(s, _)| *s == t.sparsity).unwrap().1;
        let res = base.as_ref().map_err(|e| Error::invalid(e.to_string())).and_then(|(m, _)| {
            let qm = quantize_calibrated(m, t.precision, Some(&tr.x))?;
            evaluate_compressed(*i, t, &hyper, &sel.selected_indices, &qm, &te, cfg)
        });
        out.push(res.map_err(|e| ErrorRecord {
            index: *i,
            tuple: t.clone(),
            error: e.to_string(),
        }));
    }
    out
}

/// Evaluates every enumerated tuple on `cfg.workers` threads. Results are
/// identical for any worker count.
pub fn run(ds: &Dataset, cfg: &DseConfig) -> Result<DseRun> {
    let tuples = enumerate(cfg)?;
    let prep = prepare(ds, cfg.train_frac, cfg.seed)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| Error::invalid(format!("cannot start worker pool: {e}")))?;

    let mut groups: Vec<Vec<(usize, ConfigTuple)>> = Vec::new();
    let mut by_key: HashMap<String, usize> = HashMap::new();
    for (i, t) in tuples.iter().enumerate() {
        let g = *by_key.entry(t.training_key()).or_insert_with(|| {
            groups.push(Vec::new());
            groups.len() - 1
        });
        groups[g].push((i, t.clone()));
    }

    let outcomes: Vec<Outcome> = pool.install(|| -> Result<Vec<Outcome>> {
        let m = prep.train.n_features();
        let ks: Vec<usize> = {
            let mut ks: Vec<usize> = cfg.k_grid.iter().copied().filter(|&k| k <= m).collect();
            ks.sort_unstable();
            ks.dedup();
            ks
        };
        let sweeps: Vec<Result<Vec<SelectionResult>>> = cfg
            .fs_methods
            .par_iter()
            .map(|&fs| if ks.is_empty() { Ok(Vec::new()) } else { sweep_k(&prep.train, fs, &ks, &cfg.selection) })
            .collect();
        let mut selections = HashMap::new();
        for (fs, sweep) in cfg.fs_methods.iter().zip(sweeps) {
            for s in sweep? {
                selections.insert((*fs, s.k), s);
            }
        }
        Ok(groups.par_iter().flat_map_iter(|g| eval_group(g, &prep, &selections, cfg)).collect())
    })?;

    let mut points = Vec::new();
    let mut errors = Vec::new();
    for o in outcomes {
        match o {
            Ok(p) => points.push(p),
            Err(e) => errors.push(e),
        }
    }
    points.sort_by_key(|p| p.index);
    errors.sort_by_key(|e| e.index);
    Ok(DseRun {
        n_tuples: tuples.len(),
        points,
        errors,
    })
}

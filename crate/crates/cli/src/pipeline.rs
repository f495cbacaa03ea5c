// SPDX-License-Identifier: Apache-2.0

use crate::config::{RunConfig, Source};
use crate::Fail;
use flexclass::besc::{compile as build_netlist, emit_verilog};
use flexclass::dse::{
    compress_model, enumerate, evaluate_compressed, prepare, select_for, train_for, write_report, ConfigTuple, DseRun,
    Envelope, Prepared,
};
use flexclass::hweval::verify;
use flexclass::learners::{grid_search, Hyper};
use flexclass::signalio::{extract_features, labels_for_windows, load_labels, load_traces, synth_dataset, window_count, Manifest};
use flexclass::{Algorithm, Dataset, DesignPoint, FsMethod, Netlist, PruneReport, QuantizedModel, SelectionResult, TrainedModel};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

const FEATURES: &str = "features.json";
const SELECTION: &str = "selection.json";
const MODEL: &str = "model.json";
const QUANTIZED: &str = "quantized.json";
const NETLIST: &str = "netlist.json";
const VERILOG: &str = "classifier.v";
const POINT: &str = "point.json";
const POINTS: &str = "points.json";

/// Folds used when `train` has to pick hyperparameters itself.
const CV_FOLDS: usize = 5;

pub struct Ctx {
    pub cfg: RunConfig,
    pub out: PathBuf,
    pub input: PathBuf,
}

#[derive(Serialize, Deserialize)]
struct ModelArtifact {
    fs: FsMethod,
    k: usize,
    algo: Algorithm,
    hyper_id: usize,
    hyper: Hyper,
    model: TrainedModel,
}

#[derive(Serialize, Deserialize)]
struct QuantizedArtifact {
    tuple: ConfigTuple,
    hyper: Hyper,
    prune: Option<PruneReport>,
    quantized: QuantizedModel,
}

impl Ctx {
    fn hash(&self) -> String {
        self.cfg.hash()
    }

    fn read<T: DeserializeOwned>(&self, name: &str, kind: &str) -> Result<T, Fail> {
        let path = self.input.join(name);
        if !path.exists() {
            return Err(Fail::Invalid(format!(
                "missing upstream artifact {}; run the earlier stage first",
                path.display()
            )));
        }
        Ok(Envelope::<T>::read(&path, kind)?.payload)
    }

    fn write<T: Serialize>(&self, name: &str, kind: &str, payload: &T) -> Result<(), Fail> {
        create_dir(&self.out)?;
        let path = self.out.join(name);
        Envelope::new(kind, &self.hash(), payload).write(&path)?;
        println!("wrote {}", path.display());
        Ok(())
    }

    fn columns(&self) -> Result<(Prepared, SelectionResult, Dataset, Dataset), Fail> {
        let prep: Prepared = self.read(FEATURES, "features")?;
        let sel: SelectionResult = self.read(SELECTION, "selection")?;
        let (tr, te) = prep.columns(&sel)?;
        Ok((prep, sel, tr, te))
    }
}

fn create_dir(dir: &Path) -> Result<(), Fail> {
    std::fs::create_dir_all(dir).map_err(|e| Fail::Invalid(format!("{}: {e}", dir.display())))
}

pub fn load_dataset(cfg: &RunConfig) -> Result<Dataset, Fail> {
    let data = &cfg.data;
    match data.source {
        Source::Synthetic => Ok(synth_dataset(&data.synthetic, data.synthetic_seed.unwrap_or(cfg.dse.seed))?),
        Source::Recordings => {
            let rec = data.recordings.as_ref().ok_or_else(|| Fail::Invalid("no [data.recordings] table".into()))?;
            let manifest_path = cfg.base_dir.join(&rec.manifest);
            let manifest = Manifest::load(&manifest_path)?;
            let base = manifest_path.parent().map(Path::to_path_buf).unwrap_or_default();
            let traces = load_traces(&base, &manifest)?;
            let labels_path = manifest
                .labels
                .as_ref()
                .ok_or_else(|| Fail::Invalid(format!("{}: manifest has no labels file", manifest_path.display())))?;
            let labels = load_labels(&base.join(labels_path))?;
            let n_windows = traces.iter().map(|t| window_count(t, rec.window_s, rec.stride_s)).min().unwrap_or(0);
            let classes = labels_for_windows(&labels, n_windows, rec.stride_s)?;
            Ok(extract_features(&traces, &classes, rec.window_s, rec.stride_s)?)
        }
    }
}

pub fn features(ctx: &Ctx) -> Result<(), Fail> {
    let ds = load_dataset(&ctx.cfg)?;
    let prep = prepare(&ds, ctx.cfg.dse.train_frac, ctx.cfg.dse.seed)?;
    println!(
        "{} samples x {} features ({} train / {} test)",
        ds.n_samples(),
        ds.n_features(),
        prep.train.n_samples(),
        prep.test.n_samples()
    );
    ctx.write(FEATURES, "features", &prep)
}

pub fn select(ctx: &Ctx, fs: FsMethod, k: usize) -> Result<(), Fail> {
    let prep: Prepared = ctx.read(FEATURES, "features")?;
    let sel = select_for(&prep, fs, k, &ctx.cfg.dse)?;
    let names: Vec<&str> = sel.selected_indices.iter().map(|&j| prep.train.feature_names[j].as_str()).collect();
    println!("{fs} top {k}: {}", names.join(", "));
    ctx.write(SELECTION, "selection", &sel)
}

pub fn train(ctx: &Ctx, algo: Algorithm, hyper_id: Option<usize>) -> Result<(), Fail> {
    let (_, sel, tr, _) = ctx.columns()?;
    let dse = &ctx.cfg.dse;
    let hyper_id = match hyper_id {
        Some(h) => h,
        None => {
            let seed = flexclass::dse::derive_seed(dse.seed, "cv", algo.name());
            let g = grid_search(&tr, algo, &dse.hypers, CV_FOLDS, &dse.training, seed)?;
            println!("grid search picked entry {} ({:.4} mean fold accuracy)", g.best_index, g.mean_scores[g.best_index]);
            g.best_index
        }
    };
    let tuple = ConfigTuple {
        fs: sel.method,
        k: sel.k,
        algo,
        hyper_id,
        sparsity: 0.0,
        precision: 8,
    };
    let (hyper, model) = train_for(&tr, &tuple, dse)?;
    ctx.write(
        MODEL,
        "model",
        &ModelArtifact {
            fs: sel.method,
            k: sel.k,
            algo,
            hyper_id,
            hyper,
            model,
        },
    )
}

pub fn compress(ctx: &Ctx, sparsity: f64, precision: u32) -> Result<(), Fail> {
    let (_, sel, tr, _) = ctx.columns()?;
    let m: ModelArtifact = ctx.read(MODEL, "model")?;
    if (m.fs, m.k) != (sel.method, sel.k) {
        return Err(Fail::Invalid(format!(
            "model.json was trained on {} k={} but selection.json holds {} k={}",
            m.fs, m.k, sel.method, sel.k
        )));
    }
    let tuple = ConfigTuple {
        fs: m.fs,
        k: m.k,
        algo: m.algo,
        hyper_id: m.hyper_id,
        sparsity,
        precision,
    };
    let c = compress_model(&m.model, &m.hyper, &tr, &tuple, &ctx.cfg.dse)?;
    if let Some(r) = &c.prune {
        println!("pruned {} of {} weights", r.removed_total, r.total_weights);
    }
    ctx.write(
        QUANTIZED,
        "quantized",
        &QuantizedArtifact {
            tuple,
            hyper: m.hyper,
            prune: c.prune,
            quantized: c.quantized,
        },
    )
}

pub fn compile(ctx: &Ctx) -> Result<(), Fail> {
    let (_, sel, _, te) = ctx.columns()?;
    let q: QuantizedArtifact = ctx.read(QUANTIZED, "quantized")?;
    let index = enumerate(&ctx.cfg.dse)?
        .iter()
        .position(|t| *t == q.tuple)
        .ok_or_else(|| Fail::Invalid(format!("tuple {} is not part of the configured grid", q.tuple)))?;
    let netlist = build_netlist(&q.quantized)?;
    ctx.write(NETLIST, "netlist", &netlist)?;
    let header = format!(
        "// generated by flexclass {} (config {}) for {}\n",
        flexclass::VERSION,
        ctx.hash(),
        q.tuple
    );
    let verilog_path = ctx.out.join(VERILOG);
    std::fs::write(&verilog_path, header + &emit_verilog(&netlist, "classifier"))
        .map_err(|e| Fail::Invalid(format!("{}: {e}", verilog_path.display())))?;
    println!("wrote {}", verilog_path.display());
    let point = evaluate_compressed(index, &q.tuple, &q.hyper, &sel.selected_indices, &q.quantized, &te, &ctx.cfg.dse)?;
    println!(
        "accuracy {:.4}, {} gates, {:.2} um2, {:.4} uW",
        point.accuracy, point.metrics.gate_count, point.metrics.area_um2, point.metrics.power_uW
    );
    ctx.write(POINT, "point", &point)
}

pub fn simulate(ctx: &Ctx, vectors: usize) -> Result<(), Fail> {
    let netlist: Netlist = ctx.read(NETLIST, "netlist")?;
    let q: QuantizedArtifact = ctx.read(QUANTIZED, "quantized")?;
    netlist.validate()?;
    let seed = flexclass::dse::derive_seed(ctx.cfg.dse.seed, "simulate", &q.tuple.key());
    let r = verify(&netlist, &q.quantized, vectors, seed)?;
    println!("{} mismatches / {} vectors", r.mismatches, r.vectors);
    if r.mismatches > 0 {
        return Err(Fail::Mismatch(format!(
            "netlist disagrees with the quantized model on {} of {} vectors",
            r.mismatches, r.vectors
        )));
    }
    Ok(())
}

pub fn dse(ctx: &Ctx) -> Result<(), Fail> {
    let ds = load_dataset(&ctx.cfg)?;
    let run = flexclass::dse::run(&ds, &ctx.cfg.dse)?;
    finish_report(ctx, &run)
}

pub fn report(ctx: &Ctx, points: &[PathBuf]) -> Result<(), Fail> {
    let run = if points.is_empty() {
        ctx.read::<DseRun>(POINTS, "dse_points")?
    } else {
        let mut pts = Vec::with_capacity(points.len());
        for p in points {
            pts.push(Envelope::<DesignPoint>::read(p, "point")?.payload);
        }
        pts.sort_by_key(|p| p.index);
        DseRun {
            n_tuples: pts.len(),
            points: pts,
            errors: Vec::new(),
        }
    };
    finish_report(ctx, &run)
}

fn finish_report(ctx: &Ctx, run: &DseRun) -> Result<(), Fail> {
    let s = write_report(&ctx.out, run, &ctx.hash(), ctx.cfg.dse.objective)?;
    println!(
        "{} tuples, {} points, {} errors, {} on the front; report in {}",
        s.n_tuples,
        s.n_points,
        s.n_errors,
        s.n_front,
        ctx.out.display()
    );
    Ok(())
}

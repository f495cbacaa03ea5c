// SPDX-License-Identifier: Apache-2.0

//! Acceptance checks. Runs as a plain binary and prints one PASS/FAIL line
//! per criterion; exits nonzero if any hard criterion fails.

use flexclass::besc::{compile, Builder, Bus, Cell, Gate, InputPort, Netlist};
use flexclass::compress::{prune_retrain, FixedPointSpec, PruneCriterion, QuantizedLayer, QuantizedMlp, QuantizedModel};
use flexclass::dse::{
    self, compress_model, enumerate, pareto, pareto_bruteforce, pareto_points, prepare, select_for, train_for, ConfigTuple,
    DseConfig,
};
use flexclass::featsel::{discretize, mutual_information, select_features, FsMethod, SelectionOptions};
use flexclass::hweval::{self, metrics, simulate_batch, verify, CostModel};
use flexclass::learners::{self, train, Algorithm, Hyper, Mlp, MlpSettings, TrainSettings, TrainedModel};
use flexclass::signalio::{stratified_split, synth_dataset, BlobSpec, Dataset};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::HashMap;
use std::time::{Duration, Instant};

const BIT_EXACT_MIN_MODELS: usize = 50;
const BIT_EXACT_VECTORS: usize = 1000;
const BIT_EXACT_BUDGET: Duration = Duration::from_secs(5 * 60);
const TABLE2_ENERGY_TOL: f64 = 0.05;
const TABLE2_KAPPA_TOL: f64 = 0.25;
const PARETO_SETS: usize = 100;
const PARETO_SET_SIZE: usize = 200;
const MI_INDEPENDENT_MAX_BITS: f64 = 0.05;
const MI_IDENTICAL_TOL_BITS: f64 = 0.02;
const GRADIENT_REL_TOL: f64 = 1e-4;
const LEARNER_MIN_ACCURACY: f64 = 0.95;
const DSE_MIN_CONFIGS: usize = 1200;
const DSE_BUDGET: Duration = Duration::from_secs(30 * 60);
const DSE_WORKERS: usize = 8;
const DSE_LOW_PRECISION_SHARE: f64 = 0.5;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn e2s<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

// ---------------------------------------------------------------------------

fn sample_tuples(cfg: &DseConfig, rng: &mut ChaCha8Rng) -> Vec<ConfigTuple> {
    let all = enumerate(cfg).unwrap();
    let mut picked = Vec::new();
    for _round in 0..3 {
        for algo in Algorithm::ALL {
            let sparsities = if algo == Algorithm::Mlp { cfg.sparsities.clone() } else { vec![0.0] };
            for &s in &sparsities {
                for &p in &cfg.precisions {
                    let pool: Vec<&ConfigTuple> =
                        all.iter().filter(|t| t.algo == algo && t.sparsity == s && t.precision == p).collect();
                    picked.push(pool[rng.random_range(0..pool.len())].clone());
                }
            }
        }
    }
    picked
}

fn bit_exact_oracle() -> Outcome {
    let start = Instant::now();
    let cfg = DseConfig::default();
    let ds = synth_dataset(&BlobSpec::bundled(), 7).map_err(e2s)?;
    let prep = prepare(&ds, cfg.train_frac, cfg.seed).map_err(e2s)?;
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut tuples = sample_tuples(&cfg, &mut rng);
    // small feature counts exercise the exhaustive path (p * k <= 16)
    for (algo, k, p, s) in [(Algorithm::Dt, 4, 4, 0.0), (Algorithm::Svm, 2, 8, 0.0), (Algorithm::Mlp, 3, 4, 0.5), (Algorithm::Mlp, 4, 4, 0.9)] {
        tuples.push(ConfigTuple { fs: FsMethod::Fisher, k, algo, hyper_id: 0, sparsity: s, precision: p });
    }
    let mut trained: HashMap<String, (Hyper, TrainedModel, Dataset)> = HashMap::new();
    let mut models = 0;
    let mut vectors = 0;
    let mut exhaustive = 0;
    let mut mismatches = 0;
    for t in &tuples {
        let entry = match trained.get(&t.training_key()) {
            Some(e) => e.clone(),
            None => {
                let sel = select_for(&prep, t.fs, t.k, &cfg).map_err(e2s)?;
                let (tr, _) = prep.columns(&sel).map_err(e2s)?;
                let (h, m) = train_for(&tr, t, &cfg).map_err(e2s)?;
                trained.insert(t.training_key(), (h.clone(), m.clone(), tr.clone()));
                (h, m, tr)
            }
        };
        let c = compress_model(&entry.1, &entry.0, &entry.2, t, &cfg).map_err(e2s)?;
        let n = compile(&c.quantized).map_err(e2s)?;
        let r = verify(&n, &c.quantized, BIT_EXACT_VECTORS, 99 + models as u64).map_err(e2s)?;
        models += 1;
        vectors += r.vectors;
        exhaustive += usize::from(r.exhaustive);
        mismatches += r.mismatches;
    }
    let elapsed = start.elapsed();
    let detail = format!(
        "{models} models ({exhaustive} exhaustive), {vectors} vectors, {mismatches} mismatches, {:.1}s",
        elapsed.as_secs_f64()
    );
    ensure(models >= BIT_EXACT_MIN_MODELS, format!("too few models: {detail}"))?;
    ensure(mismatches == 0, detail.clone())?;
    ensure(elapsed < BIT_EXACT_BUDGET, format!("over time budget: {detail}"))?;
    Ok(detail)
}

// ---------------------------------------------------------------------------

/// Simulates every input combination of `ins` and hands decoded values to
/// `check`; returns the number of combinations.
fn exhaust(b: Builder, ins: &[Bus], out: &Bus, mut check: impl FnMut(&[i64], i64) -> bool) -> Result<usize, String> {
    let n = b.finish(out.bits.clone(), 2);
    let widths: Vec<usize> = ins.iter().map(Bus::width).collect();
    let total: usize = widths.iter().sum();
    let decode = |raw: i64, w: usize, signed: bool| if signed && w > 0 && (raw >> (w - 1)) & 1 == 1 { raw - (1 << w) } else { raw };
    let combos: Vec<Vec<i64>> = (0..1u64 << total)
        .map(|c| {
            let mut off = 0;
            widths
                .iter()
                .map(|&w| {
                    let v = ((c >> off) & ((1 << w) - 1)) as i64;
                    off += w;
                    v
                })
                .collect()
        })
        .collect();
    let sim = simulate_batch(&n, &combos).map_err(e2s)?;
    for (c, raw) in combos.iter().zip(sim) {
        let vals: Vec<i64> = c.iter().zip(ins).map(|(&v, bus)| decode(v, bus.width(), bus.signed)).collect();
        let got = if out.bits.is_empty() { out.lo } else { decode(raw as i64, out.width(), out.signed) };
        if !check(&vals, got) {
            return Err(format!("inputs {vals:?} gave {got}"));
        }
    }
    Ok(combos.len())
}

fn signed(bus: Bus) -> Bus {
    let w = bus.width() as u32;
    Bus { lo: -(1 << (w - 1)), hi: (1 << (w - 1)) - 1, signed: true, ..bus }
}

fn macro_exhaustiveness() -> Outcome {
    let mut cases = 0;
    let mut parts = Vec::new();

    let mut b = Builder::new();
    let x = b.input("x", 2);
    let y = b.xor(x.bits[0], x.bits[1]);
    let out = Bus { bits: vec![y], signed: false, lo: 0, hi: 1 };
    let n = exhaust(b, &[x], &out, |v, r| r == (v[0] & 1) ^ (v[0] >> 1))?;
    cases += n;
    parts.push(format!("xor {n}"));

    let mut b = Builder::new();
    let x = b.input("x", 3);
    let (s, c) = b.full_adder(x.bits[0], x.bits[1], x.bits[2]);
    let out = Bus { bits: vec![s, c], signed: false, lo: 0, hi: 3 };
    let n = exhaust(b, &[x], &out, |v, r| r == v[0].count_ones() as i64)?;
    cases += n;
    parts.push(format!("full_adder {n}"));

    let mut n_add = 0;
    for (wa, wb) in [(8, 8), (4, 7), (1, 8)] {
        for (sa, sb) in [(false, false), (true, false), (false, true), (true, true)] {
            let mut b = Builder::new();
            let a = b.input("a", wa);
            let c = b.input("b", wb);
            let a = if sa { signed(a) } else { a };
            let c = if sb { signed(c) } else { c };
            let sum = b.add(&a, &c);
            n_add += exhaust(b, &[a.clone(), c.clone()], &sum, |v, r| r == v[0] + v[1])?;
            let mut b = Builder::new();
            let a2 = b.input("a", wa);
            let c2 = b.input("b", wb);
            let a2 = if sa { signed(a2) } else { a2 };
            let c2 = if sb { signed(c2) } else { c2 };
            let diff = b.sub(&a2, &c2);
            n_add += exhaust(b, &[a2, c2], &diff, |v, r| r == v[0] - v[1])?;
        }
    }
    cases += n_add;
    parts.push(format!("ripple add/sub {n_add}"));

    let mut n_cmp = 0;
    for t in 0..256i64 {
        let mut b = Builder::new();
        let x = b.input("x", 8);
        let g = b.const_compare_geq(&x, t);
        let out = Bus { bits: vec![g], signed: false, lo: 0, hi: 1 };
        n_cmp += exhaust(b, &[x], &out, |v, r| r == i64::from(v[0] >= t))?;
    }
    cases += n_cmp;
    parts.push(format!("compare {n_cmp}"));

    let mut n4 = 0;
    for c in -7i64..=7 {
        let mut b = Builder::new();
        let x = b.input("x", 4);
        let y = b.const_mult(&x, c);
        n4 += exhaust(b, &[x], &y, |v, r| r == v[0] * c)?;
    }
    ensure(n4 == 240, format!("const_mult 4-bit covered {n4} cases"))?;
    let mut n8 = 0;
    for c in -127i64..=127 {
        let mut b = Builder::new();
        let x = b.input("x", 8);
        let y = b.const_mult(&x, c);
        n8 += exhaust(b, &[x], &y, |v, r| r == v[0] * c)?;
    }
    cases += n4 + n8;
    parts.push(format!("const_mult {n4}/240 + 8-bit {n8}"));
    Ok(format!("{cases} cases exact ({})", parts.join(", ")))
}

// ---------------------------------------------------------------------------

fn micro_netlist(cells: &[Cell]) -> Netlist {
    let gates: Vec<Gate> = cells
        .iter()
        .enumerate()
        .map(|(i, &cell)| Gate { cell, inputs: vec![2; cell.fan_in()], output: 3 + i as u32 })
        .collect();
    Netlist {
        n_nets: 3 + cells.len() as u32,
        inputs: vec![InputPort { name: "x0".into(), bits: vec![2] }],
        outputs: vec![2 + cells.len() as u32],
        gates,
        n_classes: 2,
        stats: Default::default(),
    }
}

fn table1_fidelity() -> Outcome {
    let table = [
        (Cell::INVX1, 747.82),
        (Cell::AND2, 2121.00),
        (Cell::NAND2, 919.01),
        (Cell::OR2, 2468.85),
        (Cell::NOR2, 1053.62),
        (Cell::DFFNRX1, 16195.00),
    ];
    for (c, a) in table {
        ensure(c.area_um2() == a, format!("{c} area {} != {a}", c.area_um2()))?;
    }
    let cases: Vec<(Vec<Cell>, f64)> = vec![
        (vec![Cell::NAND2, Cell::INVX1], 1666.83),
        (vec![Cell::AND2; 10], 21210.00),
        (vec![], 0.0),
        (vec![Cell::INVX1, Cell::AND2, Cell::NAND2, Cell::OR2, Cell::NOR2], 7310.30),
        (vec![Cell::NAND2; 9], 8271.09),
    ];
    for (cells, want) in &cases {
        let got = hweval::area(&micro_netlist(cells));
        ensure(got == *want, format!("{cells:?}: {got} != {want}"))?;
    }
    Ok(format!("{} cell areas and {} micro-netlists exact (NAND2+INVX1 = 1666.83 um2)", table.len(), cases.len()))
}

// ---------------------------------------------------------------------------

/// Rounds to the number of decimals `reference` is printed with.
fn round_like(v: f64, decimals: i32) -> f64 {
    let f = 10f64.powi(decimals);
    (v * f).round() / f
}

/// Energy through the metrics path: an inverter chain of `depth` cells at a
/// power density that yields `power_uw`.
fn chain_energy(power_uw: f64, depth: usize) -> Result<f64, String> {
    let n = micro_chain(depth);
    let kappa = power_uw / hweval::area(&n);
    let cm = CostModel { kappa_uw_per_um2: kappa, ..CostModel::default() };
    let m = metrics(&n, &cm).map_err(e2s)?;
    ensure((m.power_uW - power_uw).abs() < 1e-9 * power_uw, "power mismatch")?;
    Ok(m.energy_J * 1e6)
}

fn micro_chain(depth: usize) -> Netlist {
    let gates: Vec<Gate> =
        (0..depth).map(|i| Gate { cell: Cell::INVX1, inputs: vec![2 + i as u32], output: 3 + i as u32 }).collect();
    Netlist {
        n_nets: 3 + depth as u32,
        inputs: vec![InputPort { name: "x0".into(), bits: vec![2] }],
        outputs: vec![2 + depth as u32],
        gates,
        n_classes: 2,
        stats: Default::default(),
    }
}

fn table2_consistency() -> Outcome {
    // (name, power mW, latency ms, printed energy uJ, printed decimals, area cm2)
    let rows = [("DT", 0.009, 0.14, 0.001, 3, 0.002), ("SVM", 0.12, 0.7, 0.08, 2, 0.021), ("MLP", 48.0, 6.3, 300.0, 0, 8.8)];
    let mut notes = Vec::new();
    for (name, p_mw, l_ms, e_uj, dec, _) in rows.iter().take(2) {
        let got = chain_energy(p_mw * 1000.0, (l_ms * 1000.0_f64).round() as usize)?;
        let raw_dev = (got - e_uj).abs() / e_uj;
        let shown = round_like(got, *dec);
        let dev = (shown - e_uj).abs() / e_uj;
        ensure(dev <= TABLE2_ENERGY_TOL, format!("{name}: energy {got:.5} uJ shows as {shown} vs {e_uj}"))?;
        notes.push(format!("{name} {got:.5}->{shown} uJ (raw dev {:.0}%)", raw_dev * 100.0));
    }
    let kappa = CostModel::default().kappa_uw_per_um2;
    for (name, p_mw, _, _, _, a_cm2) in rows {
        let ratio = (p_mw * 1000.0) / (a_cm2 * 1e8);
        let dev = (kappa - ratio).abs() / ratio;
        ensure(dev <= TABLE2_KAPPA_TOL, format!("{name}: kappa {ratio:.3e} vs default {kappa:.1e}"))?;
        notes.push(format!("{name} kappa {ratio:.3e} ({:.0}%)", dev * 100.0));
    }
    Ok(notes.join("; "))
}

// ---------------------------------------------------------------------------

fn pareto_correctness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut fronts = 0;
    for set in 0..PARETO_SETS {
        // half the sets on a coarse grid to force ties
        let coarse = set % 2 == 0;
        let pts: Vec<(f64, f64)> = (0..PARETO_SET_SIZE)
            .map(|_| {
                if coarse {
                    (rng.random_range(0..30) as f64 / 30.0, rng.random_range(0..40) as f64)
                } else {
                    (rng.random::<f64>(), rng.random::<f64>() * 100.0)
                }
            })
            .collect();
        let mut fast = pareto(&pts);
        fast.sort_unstable();
        let slow = pareto_bruteforce(&pts);
        ensure(fast == slow, format!("set {set}: {} vs {} front points", fast.len(), slow.len()))?;
        fronts += fast.len();
    }
    Ok(format!("{PARETO_SETS} sets of {PARETO_SET_SIZE} match brute force ({fronts} front points total)"))
}

// ---------------------------------------------------------------------------

fn pruning_contract() -> Outcome {
    let ds = synth_dataset(&BlobSpec::new(400, 4, 6, 2.0, 2), 3).map_err(e2s)?;
    let settings = MlpSettings { epochs: 40, retrain_epochs: 20, ..MlpSettings::default() };
    let base = learners::train_mlp(&ds, &[8], 0.01, &settings, 4).map_err(e2s)?;
    let n = base.n_weights();
    let mut notes = Vec::new();
    for s in [0.2, 0.5, 0.9] {
        for crit in [PruneCriterion::L2, PruneCriterion::Hessian, PruneCriterion::ActivationAware] {
            let (m, rep) = prune_retrain(&base, &ds, crit, s, 0.01, &settings, 1).map_err(e2s)?;
            let target = (s * n as f64).floor() as usize;
            ensure(m.n_zero_weights() == target, format!("{crit} s={s}: {} zeros, want {target}", m.n_zero_weights()))?;
            ensure(rep.removed_total == target, "report count")?;
            for p in [4, 8] {
                let qm = flexclass::compress::quantize_calibrated(&TrainedModel::Mlp(m.clone()), p, Some(&ds.x)).map_err(e2s)?;
                let net = compile(&qm).map_err(e2s)?;
                ensure(
                    net.stats.multipliers == n - target,
                    format!("{crit} s={s} p={p}: {} multipliers, want {}", net.stats.multipliers, n - target),
                )?;
            }
        }
        notes.push(format!("s={s}: {} zeros / {} multipliers", (s * n as f64).floor(), n - (s * n as f64).floor() as usize));
    }
    // a 5-input neuron with two coefficients pruned
    let mut mask = vec![vec![true; 5]; 2];
    mask[0][1] = false;
    mask[0][4] = false;
    let qm = QuantizedModel::Mlp(QuantizedMlp {
        spec: FixedPointSpec::new(4).map_err(e2s)?,
        layers: vec![QuantizedLayer {
            weights: vec![vec![3, 0, -5, 2, 0], vec![1, -1, 1, -1, 1]],
            mask: mask.clone(),
            bias: vec![2, 0],
            weight_scale: 1.0,
            input_lsb: 1.0,
            acc_lsb: 1.0,
            shift: None,
        }],
    });
    let net = compile(&qm).map_err(e2s)?;
    let first = net.stats.addends_per_neuron[0][0] - 1;
    ensure(first == 3, format!("example neuron has {first} multipliers"))?;
    let r = verify(&net, &qm, 1000, 1).map_err(e2s)?;
    ensure(r.mismatches == 0, "example neuron mismatches")?;
    notes.push("5-input neuron with 2 pruned: 3 multipliers".into());
    Ok(format!("N={n}; {}", notes.join("; ")))
}

// ---------------------------------------------------------------------------

fn feature_selection_sanity() -> Outcome {
    let ds = synth_dataset(&BlobSpec::new(2000, 3, 17, 2.0, 2), 11).map_err(e2s)?;
    let informative: Vec<usize> = (0..ds.n_features()).filter(|&j| ds.feature_names[j].starts_with("inf")).collect();
    ensure(informative.len() == 3, "planted feature count")?;
    let mut notes = Vec::new();
    for m in FsMethod::ALL {
        let sel = select_features(&ds, m, 5, &SelectionOptions::default()).map_err(e2s)?;
        let hit = informative.iter().filter(|j| sel.selected_indices.contains(j)).count();
        ensure(hit == 3, format!("{m} top-5 {:?} holds {hit}/3 of {informative:?}", sel.selected_indices))?;
        notes.push(format!("{m} 3/3"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let n = 10_000;
    let a: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
    let b: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
    let (da, db) = (discretize(&a, 10).map_err(e2s)?, discretize(&b, 10).map_err(e2s)?);
    let indep = mutual_information(&da.bins, &db.bins).map_err(e2s)?;
    ensure(indep < MI_INDEPENDENT_MAX_BITS, format!("independent MI {indep:.4} bits"))?;
    let coin: Vec<usize> = (0..n).map(|_| usize::from(rng.random::<bool>())).collect();
    let same = mutual_information(&coin, &coin).map_err(e2s)?;
    ensure((same - 1.0).abs() <= MI_IDENTICAL_TOL_BITS, format!("identical MI {same:.4} bits"))?;
    notes.push(format!("I(indep)={indep:.4} bits, I(X;X)={same:.4} bits"));
    Ok(notes.join(", "))
}

// ---------------------------------------------------------------------------

fn gradient_check() -> Result<f64, String> {
    let ds = synth_dataset(&BlobSpec::new(40, 3, 2, 2.0, 3), 2).map_err(e2s)?;
    let m = Mlp::init(ds.n_features(), &[6, 4], 3, 9);
    let xs: Vec<&[f64]> = ds.x.iter().map(Vec::as_slice).collect();
    let (_, g) = m.loss_and_gradients(&xs, &ds.y);
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    for l in 0..m.layers.len() {
        for o in 0..m.layers[l].n_out() {
            for i in 0..m.layers[l].n_in() {
                let mut p = m.clone();
                p.layers[l].weights[o][i] += h;
                let mut q = m.clone();
                q.layers[l].weights[o][i] -= h;
                let fd = (p.loss(&xs, &ds.y) - q.loss(&xs, &ds.y)) / (2.0 * h);
                let an = g.weights[l][o][i];
                worst = worst.max((fd - an).abs() / fd.abs().max(an.abs()).max(1e-8));
            }
            let mut p = m.clone();
            p.layers[l].bias[o] += h;
            let mut q = m.clone();
            q.layers[l].bias[o] -= h;
            let fd = (p.loss(&xs, &ds.y) - q.loss(&xs, &ds.y)) / (2.0 * h);
            let an = g.bias[l][o];
            worst = worst.max((fd - an).abs() / fd.abs().max(an.abs()).max(1e-8));
        }
    }
    Ok(worst)
}

fn learner_checks() -> Outcome {
    let worst = gradient_check()?;
    ensure(worst <= GRADIENT_REL_TOL, format!("gradient relative error {worst:.2e}"))?;
    let ds = synth_dataset(&BlobSpec::new(600, 4, 4, 4.0, 3), 21).map_err(e2s)?;
    let (tr, te) = stratified_split(&ds, 0.7, 3).map_err(e2s)?;
    let mut notes = vec![format!("grad rel err {worst:.1e}")];
    for h in [
        Hyper::Dt { criterion: learners::Criterion::Gini, max_depth: 6 },
        Hyper::Svm { c: 1.0 },
        Hyper::Mlp { hidden: vec![8], lr: 0.01 },
    ] {
        let m = train(&tr, &h, &TrainSettings::default(), 5).map_err(e2s)?;
        let acc = learners::accuracy(&m.predict(&te.x).map_err(e2s)?, &te.y).map_err(e2s)?;
        ensure(acc >= LEARNER_MIN_ACCURACY, format!("{} test accuracy {acc:.3}", h.algorithm()))?;
        notes.push(format!("{} {:.3}", h.algorithm(), acc));
    }
    Ok(notes.join(", "))
}

// ---------------------------------------------------------------------------

fn end_to_end_dse() -> (Outcome, Option<Outcome>) {
    let run = || -> Result<(dse::DseRun, Duration), String> {
        let cfg = DseConfig { workers: DSE_WORKERS, ..DseConfig::default() };
        let ds = synth_dataset(&BlobSpec::bundled(), cfg.seed).map_err(e2s)?;
        let t = Instant::now();
        let r = dse::run(&ds, &cfg).map_err(e2s)?;
        Ok((r, t.elapsed()))
    };
    let hard = (|| {
        let (first, elapsed) = run()?;
        let (second, _) = run()?;
        let front = pareto_points(&first.points, dse::Objective::Power);
        let detail = format!(
            "{} configs, {} points, {} errors, front {} points, {:.1}s with {DSE_WORKERS} workers",
            first.n_tuples,
            first.points.len(),
            first.errors.len(),
            front.len(),
            elapsed.as_secs_f64()
        );
        ensure(first.n_tuples > DSE_MIN_CONFIGS, format!("grid too small: {detail}"))?;
        ensure(first.points.len() > DSE_MIN_CONFIGS, format!("too few evaluated: {detail}"))?;
        ensure(elapsed < DSE_BUDGET, format!("over budget: {detail}"))?;
        ensure(first == second, format!("repeat run differs: {detail}"))?;
        ensure(!front.is_empty(), "empty front")?;
        let low = front.iter().filter(|p| p.tuple.precision <= 6).count() as f64 / front.len() as f64;
        Ok((detail + ", deterministic", low))
    })();
    match hard {
        Ok((detail, low)) => {
            let soft = if low >= DSE_LOW_PRECISION_SHARE {
                Ok(format!("{:.0}% of front points use <= 6 bits", low * 100.0))
            } else {
                Err(format!("{:.0}% of front points use <= 6 bits", low * 100.0))
            };
            (Ok(detail), Some(soft))
        }
        Err(e) => (Err(e), None),
    }
}

fn main() {
    // `cargo test -- <filter>` passes arguments; only the list query matters
    if std::env::args().any(|a| a == "--list") {
        return;
    }
    let checks: Vec<(&str, fn() -> Outcome)> = vec![
        ("bit-exact compilation oracle", bit_exact_oracle),
        ("macro exhaustiveness", macro_exhaustiveness),
        ("cell-area fidelity", table1_fidelity),
        ("reported energy and power-density consistency", table2_consistency),
        ("pareto correctness", pareto_correctness),
        ("pruning contract", pruning_contract),
        ("feature-selection sanity", feature_selection_sanity),
        ("learner checks", learner_checks),
    ];
    let mut failed = 0;
    for (name, f) in checks {
        let t = Instant::now();
        let res = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        report(name, &res, t.elapsed(), &mut failed);
    }
    let t = Instant::now();
    let (res, soft) = end_to_end_dse();
    report("end-to-end DSE", &res, t.elapsed(), &mut failed);
    match soft {
        Some(Ok(d)) => println!("SOFT-PASS  low-precision share of the front: {d}"),
        Some(Err(d)) => println!("SOFT-FAIL  low-precision share of the front: {d} (report only)"),
        None => println!("SOFT-SKIP  low-precision share of the front: DSE did not complete"),
    }
    println!("acceptance: {} failed", failed);
    if failed > 0 {
        std::process::exit(1);
    }
}

fn report(name: &str, res: &Outcome, took: Duration, failed: &mut usize) {
    match res {
        Ok(d) => println!("PASS  {name}: {d} [{:.1}s]", took.as_secs_f64()),
        Err(d) => {
            *failed += 1;
            println!("FAIL  {name}: {d} [{:.1}s]", took.as_secs_f64());
        }
    }
}


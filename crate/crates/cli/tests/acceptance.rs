//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails. Runs as a plain binary (`harness = false`) so the lines
//! are always printed.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use curvecast_core::curves::{epoch_points, fit_baseline, fit_law, Family};
use curvecast_core::data::{
    write_results, write_seeds, Column, ColumnKind, DatasetInfo, DatasetSummary, MetricKind, ResultsTable,
    ValidationCurve,
};
use curvecast_core::distill::{
    default_groups, group_and_pick, pairwise_significance, rank, rank_mae, select_greedy, select_kmeans,
    select_random, tree_dnn_score, Preference, Quota, RankMatrix, SubsetSelection, DEFAULT_TAU,
};
use curvecast_core::metafeatures::{assemble_input, extract, MetaFeatureVector, INPUT_DIM};
use curvecast_core::predictor::{
    evaluate, gradient_check, predict_curve, train_predictor, PredictorInput, PredictorModel, Split, TrainConfig,
    TrainingCorpus, TrainingRecord,
};
use curvecast_core::rng;
use curvecast_core::synth::{synth_corpus, SynthConfig};
use curvecast_core::TaskType;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Normal};

type Outcome = Result<String, String>;

struct Suite {
    failed: usize,
}

impl Suite {
    fn run(&mut self, id: u32, name: &str, limit: Option<Duration>, f: impl FnOnce() -> Outcome) {
        let start = Instant::now();
        let mut res = f();
        let took = start.elapsed();
        if let (Some(limit), Ok(msg)) = (limit, &res) {
            if took > limit {
                res = Err(format!("{msg}; took {took:.1?}, limit {limit:?}"));
            }
        }
        match res {
            Ok(msg) => println!("[PASS] {id:>2} {name}: {msg} ({took:.1?})"),
            Err(msg) => {
                self.failed += 1;
                println!("[FAIL] {id:>2} {name}: {msg} ({took:.1?})");
            }
        }
    }
}

fn check(ok: bool, msg: String) -> Outcome {
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

// ---------------------------------------------------------------- 1

fn law_recovery() -> Outcome {
    let cfg = SynthConfig {
        n_curves: 100,
        horizon: 200,
        seed: 1,
        ..SynthConfig::default()
    };
    let clean = synth_corpus(&cfg).map_err(|e| e.to_string())?;
    let mut max_err = 0.0f64;
    for c in &clean.curves {
        let fit = fit_law(&epoch_points(&c.values)).map_err(|e| e.to_string())?;
        let (got, want) = (fit.params.to_array(), clean.theta[&c.dataset_id].to_array());
        for j in 0..4 {
            max_err = max_err.max((got[j] - want[j]).abs());
        }
    }
    let noisy = synth_corpus(&SynthConfig { noise_sd: 0.01, ..cfg }).map_err(|e| e.to_string())?;
    let mut mae = 0.0;
    for c in &noisy.curves {
        let fit = fit_law(&epoch_points(&c.values)).map_err(|e| e.to_string())?;
        let truth = noisy.theta[&c.dataset_id];
        mae += (1..=200).map(|t| (fit.params.at(t as f64) - truth.at(t as f64)).abs()).sum::<f64>() / 200.0;
    }
    mae /= noisy.curves.len() as f64;
    check(
        max_err < 1e-6 && mae < 0.02,
        format!("max |θ err| {max_err:.2e} (< 1e-6), noisy extrapolation MAE {mae:.4} (< 0.02)"),
    )
}

// ---------------------------------------------------------------- 2

fn gradient() -> Outcome {
    let mut r = rng::stream(2, "acceptance/gradcheck");
    let (mut worst, mut checked, mut skipped) = (0.0f64, 0, 0);
    for pair in 0..50 {
        let mut model = PredictorModel::init(&mut rng::substream(2, "acceptance/gradcheck/model", pair));
        for b in model.layers.iter_mut().flat_map(|l| l.bias.iter_mut()) {
            *b = r.random_range(-0.5..0.5);
        }
        let x: [f64; INPUT_DIM] = std::array::from_fn(|_| r.random_range(-2.0..2.0));
        let values: Vec<f64> = (0..30).map(|_| r.random_range(0.0..1.0)).collect();
        let g = gradient_check(&model, &x, &values, 5, 1e-5);
        worst = worst.max(g.max_rel_error);
        checked += g.checked;
        skipped += g.skipped;
    }
    check(
        worst < 1e-4 && checked > 0,
        format!("50 pairs, max relative error {worst:.2e} (< 1e-4) over {checked} coordinates, {skipped} skipped at kinks"),
    )
}

// ---------------------------------------------------------------- 3

fn ordering() -> Outcome {
    let c = synth_corpus(&SynthConfig {
        n_curves: 500,
        horizon: 200,
        noise_sd: 0.01,
        seed: 3,
        tasks: vec![TaskType::Binclass],
    })
    .map_err(|e| e.to_string())?;
    let records: Vec<TrainingRecord> = c
        .curves
        .iter()
        .map(|curve| TrainingRecord {
            dataset_id: curve.dataset_id.clone(),
            task: curve.task,
            input: assemble_input(&c.meta[&curve.dataset_id], &curve.values[..5]).unwrap(),
            values: curve.values.clone(),
        })
        .collect();
    let corpus = TrainingCorpus::split_by_dataset(records, 0.8, 3).map_err(|e| e.to_string())?;
    let config = TrainConfig { seed: 3, ..TrainConfig::default() };
    let (model, _) = train_predictor(&corpus, &config).map_err(|e| e.to_string())?;
    let test = corpus.indices(Split::Test);
    let (mut mlp, mut law) = ([0.0; 2], [0.0; 2]);
    for &i in &test {
        let r = &corpus.records[i];
        let truth = ValidationCurve {
            dataset_id: r.dataset_id.clone(),
            task: r.task,
            metric: MetricKind::Accuracy,
            values: r.values.clone(),
        };
        let (_, pred) = predict_curve(&model, &PredictorInput::new(r.input), 200).map_err(|e| e.to_string())?;
        let s = evaluate(&pred, &truth).map_err(|e| e.to_string())?;
        let fit = fit_law(&epoch_points(&r.values[..5])).map_err(|e| e.to_string())?.params;
        let base: Vec<f64> = (1..=200).map(|t| fit.at(t as f64)).collect();
        let b = evaluate(&base, &truth).map_err(|e| e.to_string())?;
        mlp[0] += s.mae;
        mlp[1] += s.ovd;
        law[0] += b.mae;
        law[1] += b.ovd;
    }
    let n = test.len() as f64;
    let (mlp, law) = (mlp.map(|v| v / n), law.map(|v| v / n));
    check(
        test.len() == 100 && mlp[0] < law[0] && mlp[1] < law[1],
        format!(
            "{} held-out curves: MAE {:.4} (MLP) < {:.4} (5-point fit), OVD {:.4} < {:.4}",
            test.len(),
            mlp[0],
            law[0],
            mlp[1],
            law[1]
        ),
    )
}

// ---------------------------------------------------------------- 4

fn nesting() -> Outcome {
    let corpora = [
        ("noiseless", SynthConfig { n_curves: 30, horizon: 60, seed: 4, ..SynthConfig::default() }),
        (
            "noisy",
            SynthConfig {
                n_curves: 30,
                horizon: 60,
                noise_sd: 0.01,
                seed: 5,
                tasks: vec![TaskType::Binclass, TaskType::Regression],
            },
        ),
    ];
    let (mut n, mut worst) = (0, f64::NEG_INFINITY);
    for (name, cfg) in corpora {
        let c = synth_corpus(&cfg).map_err(|e| e.to_string())?;
        for curve in &c.curves {
            for pts in [epoch_points(&curve.values[..5]), epoch_points(&curve.values)] {
                let fit = |f| fit_baseline(f, &pts, 0).map(|f| f.residual_rmse).map_err(|e| e.to_string());
                let (m1, m2, m3) = (fit(Family::M1)?, fit(Family::M2)?, fit(Family::M3)?);
                worst = worst.max(m3 - m2 - 1e-6).max(m2 + 1e-6 - m1 - 2e-6);
                if m3 > m2 + 1e-6 || m2 + 1e-6 > m1 + 2e-6 {
                    return Err(format!("{name} `{}`: M1 {m1:e}, M2 {m2:e}, M3 {m3:e}", curve.dataset_id));
                }
                n += 1;
            }
        }
    }
    Ok(format!("{n} support/full point sets over 2 corpora, worst margin {worst:.2e} (≤ 0)"))
}

// ---------------------------------------------------------------- 5, 6

fn random_matrix(seed: u64, d: usize, l: usize) -> RankMatrix {
    let mut r = rng::stream(seed, "acceptance/matrix");
    let values: Vec<Vec<f64>> = (0..d).map(|_| (0..l).map(|_| r.random::<f64>()).collect()).collect();
    rank(&table(values, vec![true; d]))
}

fn table(values: Vec<Vec<f64>>, hib: Vec<bool>) -> ResultsTable {
    let l = values[0].len();
    ResultsTable::new(
        (0..l).map(|m| format!("m{m}")).collect(),
        (0..values.len()).map(|d| format!("d{d}")).collect(),
        hib,
        values,
    )
    .unwrap()
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..k).collect();
    loop {
        out.push(cur.clone());
        let Some(i) = (0..k).rev().find(|&i| cur[i] < n - k + i) else { return out };
        cur[i] += 1;
        for j in i + 1..k {
            cur[j] = cur[j - 1] + 1;
        }
    }
}

/// Rank MAE recomputed from scratch, without the library's helpers.
fn naive_rank_mae(m: &RankMatrix, subset: &[usize]) -> f64 {
    let l = m.methods.len();
    let d = m.datasets.len();
    (0..l)
        .map(|j| {
            let full = (0..d).map(|i| m.ranks[i][j]).sum::<f64>() / d as f64;
            let sub = subset.iter().map(|&i| m.ranks[i][j]).sum::<f64>() / subset.len() as f64;
            (full - sub).abs()
        })
        .sum::<f64>()
        / l as f64
}

fn reported_matches(m: &RankMatrix, s: &SubsetSelection) -> Result<(), String> {
    let idx = m.indices_of(&s.chosen).map_err(|e| e.to_string())?;
    let reported = s.rank_mae.ok_or("missing rank MAE")?;
    let again = rank_mae(m, &idx).map_err(|e| e.to_string())?;
    if (reported - again).abs() > 1e-12 || (reported - naive_rank_mae(m, &idx)).abs() > 1e-12 {
        return Err(format!("{:?}: reported {reported} vs recomputed {again}", s.strategy));
    }
    Ok(())
}

fn subset_oracle() -> Outcome {
    let subsets = combinations(10, 3);
    let (mut hits, mut max_gap) = (0, 0.0f64);
    for seed in 0..20 {
        let m = random_matrix(seed, 10, 6);
        let best = subsets.iter().map(|s| naive_rank_mae(&m, s)).fold(f64::INFINITY, f64::min);
        let q = Quota::total(10, 3);
        let g = select_greedy(&m, &q).map_err(|e| e.to_string())?;
        let r = select_random(&m, &q, 10_000, seed).map_err(|e| e.to_string())?;
        let k = select_kmeans(&m, &q, seed).map_err(|e| e.to_string())?;
        for s in [&g, &r, &k] {
            reported_matches(&m, s)?;
        }
        let (gm, rm) = (g.rank_mae.unwrap(), r.rank_mae.unwrap());
        if gm < best - 1e-12 || rm < best - 1e-12 {
            return Err(format!("matrix {seed}: a heuristic beat the exhaustive optimum"));
        }
        max_gap = max_gap.max(gm - best);
        if rm <= best + 1e-12 {
            hits += 1;
        }
    }
    check(
        hits >= 19,
        format!("random hits optimum on {hits}/20 (≥ 19); greedy gap to optimum ≤ {max_gap:.4}; all reported MAEs recompute within 1e-12"),
    )
}

fn identity() -> Outcome {
    let mut parts = Vec::new();
    for (seed, d) in [(0, 1), (1, 12), (2, 40)] {
        let m = random_matrix(seed, d, 5);
        let all: Vec<usize> = (0..d).collect();
        let q = Quota::total(d, d);
        let maes = [
            rank_mae(&m, &all).map_err(|e| e.to_string())?,
            select_greedy(&m, &q).map_err(|e| e.to_string())?.rank_mae.unwrap(),
            select_random(&m, &q, 1, seed).map_err(|e| e.to_string())?.rank_mae.unwrap(),
            select_kmeans(&m, &q, seed).map_err(|e| e.to_string())?.rank_mae.unwrap(),
        ];
        if maes.iter().any(|&v| v != 0.0) {
            return Err(format!("D = {d}: {maes:?}"));
        }
        parts.push(d.to_string());
    }
    Ok(format!("rank MAE exactly 0 for the full set (D = {}), greedy/random/kmeans", parts.join(", ")))
}

// ---------------------------------------------------------------- 7

fn tree_dnn() -> Outcome {
    let tree: Vec<String> = ["XGBoost", "CatBoost", "RandomForest"].map(String::from).to_vec();
    let dnn: Vec<String> = ["MLP", "ResNet", "FTT"].map(String::from).to_vec();
    let names: Vec<String> = tree.iter().chain(&dnn).cloned().collect();
    let mk = |values: Vec<Vec<f64>>, hib: Vec<bool>| {
        let d = values.len();
        ResultsTable::new(names.clone(), (0..d).map(|i| format!("d{i}")).collect(), hib, values).unwrap()
    };
    let hand = tree_dnn_score(&mk(vec![vec![0.9, 0.8, 0.7, 0.6, 0.5, 0.4]], vec![true]), &tree, &dnn, DEFAULT_TAU)
        .map_err(|e| e.to_string())?;
    if (hand[0].score - 0.6).abs() > 1e-12 || hand[0].label != Preference::TreeFriendly {
        return Err(format!("hand example gave {:?}", hand[0]));
    }
    let mut r = rng::stream(7, "acceptance/treednn");
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let v: Vec<f64> = (0..6).map(|_| r.random_range(0.0..1.0)).collect();
        let hib = r.random::<bool>();
        let (a, b) = (r.random_range(0.01..100.0), r.random_range(-100.0..100.0));
        let w: Vec<f64> = v.iter().map(|x| a * x + b).collect();
        let s0 = &tree_dnn_score(&mk(vec![v], vec![hib]), &tree, &dnn, DEFAULT_TAU).map_err(|e| e.to_string())?[0];
        let s1 = &tree_dnn_score(&mk(vec![w], vec![hib]), &tree, &dnn, DEFAULT_TAU).map_err(|e| e.to_string())?[0];
        worst = worst.max((s0.score - s1.score).abs());
        if s0.label != s1.label {
            return Err(format!("label changed: {s0:?} vs {s1:?}"));
        }
    }
    check(worst < 1e-9, format!("hand example s = {} (TF); 1000 affine fixtures, max |Δs| {worst:.1e}", hand[0].score))
}

// ---------------------------------------------------------------- 8

fn tiny_benchmark() -> Outcome {
    let mut r = rng::stream(8, "acceptance/sizes");
    let mut info = Vec::new();
    let mut scores = Vec::new();
    for (task, n) in [(TaskType::Binclass, 101), (TaskType::Multiclass, 80), (TaskType::Regression, 119)] {
        for i in 0..n {
            let id = format!("{task}-{i:03}");
            info.push(DatasetInfo {
                id: id.clone(),
                task,
                size: Some(r.random_range(1e3..1e7f64).round()),
                has_categorical: Some(r.random::<bool>()),
            });
            let s = r.random_range(-1.0..1.0);
            scores.push(curvecast_core::distill::TreeDnnScore {
                dataset_id: id,
                score: s,
                label: Preference::of(s, DEFAULT_TAU),
            });
        }
    }
    let sel = group_and_pick(&scores, &info, &default_groups(), false).map_err(|e| e.to_string())?;
    let count = |t: TaskType| sel.picks.iter().filter(|p| p.task == t).count();
    let (b, m, g) = (count(TaskType::Binclass), count(TaskType::Multiclass), count(TaskType::Regression));
    let mut unique = sel.chosen.clone();
    unique.sort();
    unique.dedup();
    check(
        (b, m, g) == (15, 12, 18) && sel.chosen.len() == 45 && unique.len() == 45,
        format!("{b} + {m} + {g} = {} distinct datasets", unique.len()),
    )
}

// ---------------------------------------------------------------- 9

fn metrics() -> Outcome {
    let curve = |task: TaskType, values: Vec<f64>| ValidationCurve {
        dataset_id: "hand".into(),
        task,
        metric: if task.is_classification() { MetricKind::Accuracy } else { MetricKind::NormalizedRmse },
        values,
    };
    let s = evaluate(&[0.6, 0.6, 0.6], &curve(TaskType::Binclass, vec![0.5, 0.6, 0.7])).map_err(|e| e.to_string())?;
    let r = evaluate(&[0.6, 0.45, 0.35], &curve(TaskType::Regression, vec![0.5, 0.4, 0.3])).map_err(|e| e.to_string())?;
    check(
        (s.mae - 0.2 / 3.0).abs() < 1e-9 && (s.ovd - 0.1).abs() < 1e-9 && (r.ovd - 0.05).abs() < 1e-9,
        format!("hand case mae {:.4}, ovd {:.4}; regression OVD {:.4} (min-based, max-based would be 0.1)", s.mae, s.ovd, r.ovd),
    )
}

// ---------------------------------------------------------------- 10

fn seed_table(d: usize, s: usize, seed: u64, second_mean: f64) -> ResultsTable {
    let mut r = rng::stream(seed, "acceptance/ttest");
    let noise = Normal::new(0.0, 0.02).unwrap();
    let seeds: Vec<Vec<Vec<f64>>> = (0..d)
        .map(|_| {
            let base = r.random_range(0.6..0.9);
            vec![
                (0..s).map(|_| base + noise.sample(&mut r)).collect(),
                (0..s).map(|_| base + second_mean + noise.sample(&mut r)).collect(),
            ]
        })
        .collect();
    let values = seeds
        .iter()
        .map(|row| row.iter().map(|c| c.iter().sum::<f64>() / c.len() as f64).collect())
        .collect();
    table(values, vec![true; d]).with_seeds(seeds).unwrap()
}

fn ttest_calibration() -> Outcome {
    let same = pairwise_significance(&seed_table(500, 15, 10, 0.0), "m0", 0.05).map_err(|e| e.to_string())?;
    let apart = pairwise_significance(&seed_table(500, 15, 11, -0.3), "m0", 0.05).map_err(|e| e.to_string())?;
    let tie = same[0].tie;
    check(
        (0.92..=0.98).contains(&tie) && apart[0].win == 1.0,
        format!("identical distributions: tie rate {tie:.3} ∈ [0.92, 0.98]; separated: win rate {}", apart[0].win),
    )
}

// ---------------------------------------------------------------- 11

/// Brute-force meta-features, written directly from the definitions with
/// plain loops.
mod oracle {
    use std::collections::HashMap;

    pub fn mean(v: &[f64]) -> f64 {
        if v.is_empty() {
            return 0.0;
        }
        let mut s = 0.0;
        for x in v {
            s += x;
        }
        s / v.len() as f64
    }

    pub fn sd(v: &[f64]) -> f64 {
        if v.len() < 2 {
            return 0.0;
        }
        let m = mean(v);
        let mut s = 0.0;
        for x in v {
            s += (x - m) * (x - m);
        }
        (s / (v.len() - 1) as f64).sqrt()
    }

    fn quantile(v: &[f64], q: f64) -> f64 {
        let mut s = v.to_vec();
        s.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let h = (s.len() - 1) as f64 * q;
        let lo = h.floor();
        s[lo as usize] + (h - lo) * (s[h.ceil() as usize] - s[lo as usize])
    }

    /// Equal-frequency bin of each value: 10 × (count strictly below) / n.
    pub fn bins(v: &[f64]) -> Vec<i64> {
        let n = v.len();
        v.iter()
            .map(|x| {
                let below = v.iter().filter(|y| *y < x).count();
                ((10 * below / n) as i64).min(9)
            })
            .collect()
    }

    fn entropy<K: std::hash::Hash + Eq>(keys: impl Iterator<Item = K>) -> f64 {
        let mut c: HashMap<K, f64> = HashMap::new();
        let mut n = 0.0;
        for k in keys {
            *c.entry(k).or_default() += 1.0;
            n += 1.0;
        }
        let mut h = 0.0;
        for v in c.values() {
            h -= v / n * (v / n).ln();
        }
        h
    }

    pub struct Attr {
        pub mean: f64,
        pub max: f64,
        pub range: f64,
        pub iqr: f64,
        pub sparsity: f64,
        pub outlier: bool,
        pub ent: f64,
        pub joint: f64,
        pub mi: f64,
        pub conc: f64,
    }

    pub fn attr(v: &[f64], categorical: bool, y: &[i64]) -> Attr {
        let n = v.len() as f64;
        let mut max = f64::MIN;
        let mut min = f64::MAX;
        for &x in v {
            max = max.max(x);
            min = min.min(x);
        }
        let (q1, q3) = (quantile(v, 0.25), quantile(v, 0.75));
        let iqr = q3 - q1;
        let mut distinct: Vec<f64> = Vec::new();
        for &x in v {
            if !distinct.contains(&x) {
                distinct.push(x);
            }
        }
        let outlier = v.iter().any(|&x| x < q1 - 1.5 * iqr || x > q3 + 1.5 * iqr);
        let b: Vec<i64> = if categorical { v.iter().map(|&x| x as i64).collect() } else { bins(v) };
        let ent = entropy(b.iter());
        let hy = entropy(y.iter());
        let joint = entropy(b.iter().zip(y));
        // Goodman-Kruskal tau of y given the binned attribute.
        let mut py2 = 0.0;
        let mut ys: Vec<i64> = y.to_vec();
        ys.sort();
        ys.dedup();
        for c in &ys {
            let p = y.iter().filter(|v| *v == c).count() as f64 / n;
            py2 += p * p;
        }
        let mut xs = b.clone();
        xs.sort();
        xs.dedup();
        let mut s = 0.0;
        for x in &xs {
            let px = b.iter().filter(|v| *v == x).count() as f64 / n;
            for c in &ys {
                let pxy = b.iter().zip(y).filter(|(p, q)| *p == x && *q == c).count() as f64 / n;
                s += pxy * pxy / px;
            }
        }
        let conc = if 1.0 - py2 <= 1e-15 { 0.0 } else { ((s - py2) / (1.0 - py2)).max(0.0) };
        Attr {
            mean: mean(v),
            max,
            range: max - min,
            iqr,
            sparsity: distinct.len() as f64 / n,
            outlier,
            ent,
            joint,
            mi: (ent + hy - joint).max(0.0),
            conc,
        }
    }

    pub fn cov(a: &[f64], b: &[f64]) -> f64 {
        let (ma, mb) = (mean(a), mean(b));
        let mut s = 0.0;
        for i in 0..a.len() {
            s += (a[i] - ma) * (b[i] - mb);
        }
        s / (a.len() - 1) as f64
    }

    /// Distance between the z-scored centres of the most and least frequent
    /// classes (majority ties → lower label, minority ties → higher label).
    pub fn gravity(cols: &[(Vec<f64>, bool)], y: &[i64]) -> f64 {
        let mut labels: Vec<i64> = y.to_vec();
        labels.sort();
        labels.dedup();
        if labels.len() < 2 {
            return 0.0;
        }
        let count = |c: i64| y.iter().filter(|v| **v == c).count();
        let mut major = labels[0];
        for &c in &labels {
            if count(c) > count(major) {
                major = c;
            }
        }
        let mut minor = None;
        for &c in labels.iter().rev() {
            if c == major {
                continue;
            }
            match minor {
                None => minor = Some(c),
                Some(m) if count(c) < count(m) => minor = Some(c),
                _ => {}
            }
        }
        let minor = minor.unwrap();
        let mut d2 = 0.0;
        for (v, categorical) in cols {
            if *categorical {
                continue;
            }
            let m = mean(v);
            let pop_sd = (v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / v.len() as f64).sqrt();
            if pop_sd == 0.0 {
                continue;
            }
            let centre = |c: i64| {
                let z: Vec<f64> = v.iter().zip(y).filter(|(_, l)| **l == c).map(|(x, _)| (x - m) / pop_sd).collect();
                mean(&z)
            };
            d2 += (centre(major) - centre(minor)).powi(2);
        }
        d2.sqrt()
    }
}

struct Fixture {
    name: &'static str,
    task: TaskType,
    cols: Vec<(Vec<f64>, bool)>,
    target: Vec<f64>,
}

fn fixtures() -> Vec<Fixture> {
    let f = |name, task, cols: Vec<(Vec<f64>, bool)>, target: Vec<f64>| Fixture { name, task, cols, target };
    vec![
        f("one-to-four", TaskType::Binclass, vec![(vec![1., 2., 3., 4.], false), (vec![0., 1., 0., 1.], false)], vec![0., 1., 0., 1.]),
        f("balanced-5", TaskType::Binclass, vec![(vec![2.5, -1., 0., 3., 7.], false)], vec![0., 0., 1., 1., 0.]),
        f("multiclass", TaskType::Multiclass, vec![(vec![1., 5., 2., 8., 3.], false), (vec![0., 1., 2., 0., 1.], true)], vec![0., 1., 2., 1., 0.]),
        f("categorical-only", TaskType::Binclass, vec![(vec![0., 1., 1., 2.], true), (vec![0., 0., 1., 1.], true)], vec![1., 0., 1., 0.]),
        f("constant-column", TaskType::Binclass, vec![(vec![4., 4., 4., 4., 4.], false), (vec![1., 2., 3., 4., 5.], false)], vec![0., 0., 1., 1., 1.]),
        f("outlier", TaskType::Binclass, vec![(vec![1., 1.1, 0.9, 1.05, 50.], false), (vec![3., 1., 4., 1., 5.], false)], vec![0., 1., 0., 1., 1.]),
        f("regression", TaskType::Regression, vec![(vec![0.5, 1.5, 2.5, 3.5, 4.5], false), (vec![9., 7., 5., 3., 1.], false)], vec![1.2, 0.4, 3.3, 2.2, 5.0]),
        f("regression-constant", TaskType::Regression, vec![(vec![1., 2., 3.], false)], vec![7., 7., 7.]),
        f("identical-centres", TaskType::Binclass, vec![(vec![1., 2., 1., 2.], false)], vec![0., 0., 1., 1.]),
        f("three-attrs", TaskType::Multiclass, vec![(vec![-2., 0., 2., 4., 6.], false), (vec![1., 1., 2., 3., 5.], false), (vec![10., 0., 10., 0., 5.], false)], vec![2., 2., 0., 1., 1.]),
    ]
}

fn meta_oracle() -> Outcome {
    let mut compared = 0;
    for fx in fixtures() {
        let columns: Vec<Column> = fx
            .cols
            .iter()
            .enumerate()
            .map(|(i, (v, cat))| Column {
                name: format!("x{i}"),
                kind: if *cat { ColumnKind::Categorical } else { ColumnKind::Numerical },
                values: v.clone(),
            })
            .collect();
        let ds = DatasetSummary::new(fx.name, fx.task, columns, fx.target.clone()).map_err(|e| format!("{}: {e}", fx.name))?;
        let got = extract(&ds).map_err(|e| format!("{}: {e}", fx.name))?;

        let n = fx.target.len();
        let y: Vec<i64> = if fx.task.is_classification() {
            fx.target.iter().map(|&v| v as i64).collect()
        } else {
            oracle::bins(&fx.target)
        };
        let attrs: Vec<oracle::Attr> = fx.cols.iter().map(|(v, c)| oracle::attr(v, *c, &y)).collect();
        let agg = |f: &dyn Fn(&oracle::Attr) -> f64| {
            let v: Vec<f64> = attrs.iter().map(f).collect();
            (oracle::mean(&v), oracle::sd(&v))
        };
        let mut covs = Vec::new();
        for i in 0..fx.cols.len() {
            for j in i + 1..fx.cols.len() {
                covs.push(oracle::cov(&fx.cols[i].0, &fx.cols[j].0).abs());
            }
        }
        let (ent_mean, _) = agg(&|a| a.ent);
        let (mi_mean, _) = agg(&|a| a.mi);
        let mut class_counts: BTreeMap<i64, f64> = BTreeMap::new();
        for c in &y {
            *class_counts.entry(*c).or_default() += 1.0;
        }
        let imbalance = class_counts.values().cloned().fold(f64::MAX, f64::min) / class_counts.values().cloned().fold(0.0, f64::max);
        let d = fx.cols.len() as f64;

        let expect: Vec<(&str, f64, f64)> = {
            let pair = |name: &'static str, g: curvecast_core::metafeatures::Aggregate, (m, s): (f64, f64)| {
                [(name, g.mean, m), (name, g.sd, s)]
            };
            let mut e = vec![
                ("nr_inst", got.nr_inst, n as f64),
                ("nr_attr", got.nr_attr, d),
                ("inst_to_attr", got.inst_to_attr, n as f64 / d),
                ("gravity", got.gravity, oracle::gravity(&fx.cols, &y)),
                ("nr_outliers", got.nr_outliers, attrs.iter().filter(|a| a.outlier).count() as f64),
                ("ns_ratio", got.ns_ratio, if mi_mean <= 1e-12 { 0.0 } else { ((ent_mean - mi_mean) / mi_mean).max(0.0) }),
                ("imbalance_ratio", got.imbalance_ratio, imbalance),
            ];
            e.extend(pair("mean", got.mean, agg(&|a| a.mean)));
            e.extend(pair("max", got.max, agg(&|a| a.max)));
            e.extend(pair("range", got.range, agg(&|a| a.range)));
            e.extend(pair("iq_range", got.iq_range, agg(&|a| a.iqr)));
            e.extend(pair("sparsity", got.sparsity, agg(&|a| a.sparsity)));
            e.extend(pair("cov", got.cov, (oracle::mean(&covs), oracle::sd(&covs))));
            e.extend(pair("attr_ent", got.attr_ent, agg(&|a| a.ent)));
            e.extend(pair("joint_ent", got.joint_ent, agg(&|a| a.joint)));
            e.extend(pair("mut_inf", got.mut_inf, agg(&|a| a.mi)));
            e.extend(pair("class_conc", got.class_conc, agg(&|a| a.conc)));
            e
        };
        for (name, g, want) in expect {
            if (g - want).abs() > 1e-9 {
                return Err(format!("{}: {name} = {g}, oracle {want}", fx.name));
            }
            compared += 1;
        }
        let support = [0.11, 0.22, 0.33, 0.44, 0.55];
        let x = assemble_input(&got, &support).map_err(|e| e.to_string())?;
        if x.len() != 24 || x[..5] != support {
            return Err(format!("{}: bad assembled input", fx.name));
        }
        let _: &MetaFeatureVector = &got;
    }
    Ok(format!("10 fixtures, {compared} values within 1e-9; inputs have length 24 with support in slots 0-4"))
}

// ---------------------------------------------------------------- 12

struct Cli {
    bin: PathBuf,
    dir: PathBuf,
}

impl Cli {
    /// Runs `args` (with `{d}` replaced by the work directory) and returns the
    /// output digests recorded in the manifest.
    fn run(&self, args: &[&str], manifest: &Path, workers: &str) -> Result<BTreeMap<String, String>, String> {
        let args: Vec<String> = args.iter().map(|a| a.replace("{d}", &self.dir.display().to_string())).collect();
        let out = Command::new(&self.bin)
            .args(&args)
            .env("CURVECAST_WORKERS", workers)
            .output()
            .map_err(|e| e.to_string())?;
        if !out.status.success() {
            return Err(format!("`{}` failed: {}", args.join(" "), String::from_utf8_lossy(&out.stderr)));
        }
        let m: serde_json::Value =
            serde_json::from_slice(&std::fs::read(manifest).map_err(|e| format!("{}: {e}", manifest.display()))?)
                .map_err(|e| e.to_string())?;
        let outputs: BTreeMap<String, String> = serde_json::from_value(m["outputs"].clone()).map_err(|e| e.to_string())?;
        if outputs.is_empty() {
            return Err(format!("`{}`: manifest lists no outputs", args.join(" ")));
        }
        for (p, digest) in &outputs {
            let bytes = std::fs::read(p).map_err(|e| format!("{p}: {e}"))?;
            if &sha256(&bytes) != digest {
                return Err(format!("{p}: digest does not match manifest"));
            }
        }
        Ok(outputs)
    }
}

fn sha256(bytes: &[u8]) -> String {
    use sha2::{Digest, Sha256};
    hex::encode(Sha256::digest(bytes))
}

fn write_fixtures(dir: &Path) -> Result<(), String> {
    let io = |e: std::io::Error| e.to_string();
    std::fs::write(dir.join("data.csv"), "x,colour,y\n1.5,red,a\n2.0,blue,b\n,red,a\n3.5,green,b\n0.5,blue,a\n").map_err(io)?;
    std::fs::write(dir.join("schema.json"), r#"{"x":"numerical","colour":"categorical","y":"categorical"}"#).map_err(io)?;

    let mut r = rng::stream(12, "acceptance/results");
    let methods = ["XGBoost", "CatBoost", "RandomForest", "MLP", "ResNet", "FTT"];
    let tasks: Vec<TaskType> = (0..45).map(|i| [TaskType::Binclass, TaskType::Multiclass, TaskType::Regression][i % 3]).collect();
    let seeds: Vec<Vec<Vec<f64>>> =
        (0..45).map(|_| (0..6).map(|_| (0..5).map(|_| r.random_range(0.0..1.0)).collect()).collect()).collect();
    let values = seeds.iter().map(|row| row.iter().map(|c: &Vec<f64>| c.iter().sum::<f64>() / c.len() as f64).collect()).collect();
    let t = ResultsTable::new(
        methods.map(String::from).to_vec(),
        (0..45).map(|i| format!("d{i:02}")).collect(),
        tasks.iter().map(|t| t.is_classification()).collect(),
        values,
    )
    .and_then(|t| t.with_seeds(seeds))
    .map_err(|e| e.to_string())?;
    let mut buf = Vec::new();
    write_results(&mut buf, &t).map_err(|e| e.to_string())?;
    std::fs::write(dir.join("results.csv"), buf).map_err(io)?;
    let mut buf = Vec::new();
    write_seeds(&mut buf, &t).map_err(|e| e.to_string())?;
    std::fs::write(dir.join("seeds.csv"), buf).map_err(io)?;
    let mut info = String::from("dataset_id,task,size,has_categorical\n");
    let mut order: Vec<usize> = (0..45).collect();
    order.shuffle(&mut r);
    for (i, t) in tasks.iter().enumerate() {
        info.push_str(&format!("d{i:02},{t},{},{}\n", 1000 + order[i] * 17, i % 2));
    }
    std::fs::write(dir.join("info.csv"), info).map_err(io)
}

fn determinism() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let cli = Cli {
        bin: PathBuf::from(env!("CARGO_BIN_EXE_curvecast")),
        dir: tmp.path().to_path_buf(),
    };
    write_fixtures(tmp.path())?;
    // Each command writes `{d}/<name>`; the manifest sits next to it.
    let commands: Vec<(&str, Vec<&str>)> = vec![
        ("synth", vec!["synth", "--n-curves", "40", "--horizon", "40", "--noise-sd", "0.01", "--seed", "7", "--tasks", "binclass,regression", "--out-dir", "{d}/synth"]),
        ("meta.json", vec!["meta", "{d}/data.csv", "--schema", "{d}/schema.json", "--label", "y", "--out", "{d}/meta.json"]),
        ("fit-ours.json", vec!["fit", "{d}/synth/curves.json", "--family", "ours", "--points", "full", "--horizon", "50", "--out", "{d}/fit-ours.json"]),
        ("fit-m3.json", vec!["fit", "{d}/synth/curves.json", "--family", "m3", "--seed", "3", "--out", "{d}/fit-m3.json"]),
        ("fit-m4.json", vec!["fit", "{d}/synth/curves.json", "--family", "m4", "--seed", "3", "--horizon", "20", "--out", "{d}/fit-m4.json"]),
        ("model.json", vec!["train", "--curves", "{d}/synth/curves.json", "--meta", "{d}/synth/meta.json", "--epochs", "20", "--lr", "0.01", "--seed", "5", "--report", "{d}/report.json", "--out", "{d}/model.json"]),
        ("predict.json", vec!["predict", "--model", "{d}/model.json", "--meta", "{d}/meta.json", "--support", "0.5,0.55,0.6,0.62,0.63", "--horizon", "50", "--out", "{d}/predict.json"]),
        ("eval.csv", vec!["eval", "--model", "{d}/model.json", "--curves", "{d}/synth/curves.json", "--meta", "{d}/synth/meta.json", "--out", "{d}/eval.csv"]),
        ("advise.json", vec!["advise", "--model", "{d}/model.json", "--meta", "{d}/meta.json", "--support", "0.5,0.55,0.6,0.62,0.63", "--best", "0.6", "--task", "binclass", "--out", "{d}/advise.json"]),
        ("greedy.json", vec!["distill", "--results", "{d}/results.csv", "--strategy", "greedy", "--info", "{d}/info.csv", "--out", "{d}/greedy.json"]),
        ("random.json", vec!["distill", "--results", "{d}/results.csv", "--strategy", "random", "--trials", "2000", "--seed", "9", "--out", "{d}/random.json"]),
        ("kmeans.json", vec!["distill", "--results", "{d}/results.csv", "--strategy", "kmeans", "--seed", "9", "--unseen", "MLP,FTT", "--out", "{d}/kmeans.json"]),
        ("treednn.json", vec!["treednn", "--results", "{d}/results.csv", "--tree", "XGBoost,CatBoost,RandomForest", "--dnn", "MLP,ResNet,FTT", "--sizes", "{d}/info.csv", "--groups", "binclass=5,multiclass=5,regression=5", "--balance-categorical", "--out", "{d}/treednn.json"]),
        ("ttest.csv", vec!["ttest", "--results", "{d}/results.csv", "--seeds", "{d}/seeds.csv", "--anchor", "CatBoost", "--out", "{d}/ttest.csv"]),
    ];
    let mut n_outputs = 0;
    for (name, args) in &commands {
        let manifest = tmp.path().join(format!("{name}.manifest.json"));
        let first = cli.run(args, &manifest, "1")?;
        let second = cli.run(args, &manifest, "1")?;
        let third = cli.run(args, &manifest, "3")?;
        if first != second || first != third {
            return Err(format!("`{name}` outputs differ between runs: {first:?} vs {second:?} vs {third:?}"));
        }
        n_outputs += first.len();
    }
    Ok(format!(
        "{} seeded commands × 3 runs (1 and 3 workers), {n_outputs} outputs byte-identical per manifest digests",
        commands.len()
    ))
}

fn main() {
    // `cargo test -- --list` and friends: nothing to enumerate.
    if std::env::args().any(|a| a == "--list") {
        return;
    }
    let mut suite = Suite { failed: 0 };
    let secs = |s| Some(Duration::from_secs(s));
    suite.run(1, "linear-law recovery", secs(5), law_recovery);
    suite.run(2, "gradient check", secs(30), gradient);
    suite.run(3, "MLP vs 5-point fit ordering", secs(300), ordering);
    suite.run(4, "baseline nesting", None, nesting);
    suite.run(5, "subset-selection oracle", secs(60), subset_oracle);
    suite.run(6, "full-subset identity", None, identity);
    suite.run(7, "tree-DNN score fixtures", None, tree_dnn);
    suite.run(8, "tiny-benchmark counts", None, tiny_benchmark);
    suite.run(9, "MAE/OVD correctness", None, metrics);
    suite.run(10, "t-test calibration", None, ttest_calibration);
    suite.run(11, "meta-feature oracle", None, meta_oracle);
    suite.run(12, "determinism", None, determinism);
    println!("{} of 12 criteria passed", 12 - suite.failed);
    if suite.failed > 0 {
        std::process::exit(1);
    }
}

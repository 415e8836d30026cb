//! Picking small dataset subsets whose average method ranks track the full
//! benchmark's.

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::rank::{mae_against, rank_mae, rank_methods, RankMatrix};
use super::treednn::Pick;
use crate::data::ResultsTable;
use crate::{par, rng, Error, Result, TaskType};

/// Default subset fraction.
pub const DEFAULT_ETA: f64 = 0.15;
/// Default number of random draws.
pub const DEFAULT_TRIALS: usize = 10_000;
/// Lloyd iteration cap.
pub const KMEANS_MAX_ITER: usize = 300;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    Greedy,
    Random,
    Kmeans,
    TreeDnn,
}

impl std::str::FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "greedy" => Ok(Strategy::Greedy),
            "random" => Ok(Strategy::Random),
            "kmeans" => Ok(Strategy::Kmeans),
            "tree_dnn" => Ok(Strategy::TreeDnn),
            _ => Err(Error::invalid(format!("unknown strategy `{s}`"))),
        }
    }
}

/// How many datasets to take from which part of the benchmark.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuotaGroup {
    pub label: String,
    pub members: Vec<usize>,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Quota {
    pub groups: Vec<QuotaGroup>,
}

fn eta_count(n: usize, eta: f64) -> Result<usize> {
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(Error::invalid(format!("eta must lie in (0, 1], got {eta}")));
    }
    Ok(((n as f64 * eta).round() as usize).clamp(1, n.max(1)))
}

impl Quota {
    /// `count` datasets from the whole benchmark.
    pub fn total(n_datasets: usize, count: usize) -> Self {
        Quota {
            groups: vec![QuotaGroup {
                label: "all".into(),
                members: (0..n_datasets).collect(),
                count,
            }],
        }
    }

    /// `round(eta * D)` datasets (at least one) from the whole benchmark.
    pub fn from_eta(n_datasets: usize, eta: f64) -> Result<Self> {
        Ok(Quota::total(n_datasets, eta_count(n_datasets, eta)?))
    }

    /// `round(eta * D_task)` datasets (at least one) from each task type
    /// present; `tasks` is aligned with the rank matrix's datasets.
    pub fn per_task(tasks: &[TaskType], eta: f64) -> Result<Self> {
        let mut groups = Vec::new();
        for t in [TaskType::Binclass, TaskType::Multiclass, TaskType::Regression] {
            let members: Vec<usize> = (0..tasks.len()).filter(|&i| tasks[i] == t).collect();
            if members.is_empty() {
                continue;
            }
            let count = eta_count(members.len(), eta)?;
            groups.push(QuotaGroup {
                label: t.as_str().into(),
                members,
                count,
            });
        }
        Ok(Quota { groups })
    }

    pub fn size(&self) -> usize {
        self.groups.iter().map(|g| g.count).sum()
    }

    fn validate(&self, n_datasets: usize) -> Result<()> {
        let mut seen = vec![false; n_datasets];
        for g in &self.groups {
            if g.count == 0 {
                return Err(Error::invalid(format!("quota for `{}` is zero", g.label)));
            }
            if g.count > g.members.len() {
                return Err(Error::invalid(format!(
                    "quota {} for `{}` exceeds the {} datasets available",
                    g.count,
                    g.label,
                    g.members.len()
                )));
            }
            for &m in &g.members {
                if m >= n_datasets || std::mem::replace(&mut seen[m], true) {
                    return Err(Error::invalid(format!("dataset index {m} out of range or in two quota groups")));
                }
            }
        }
        if self.groups.is_empty() {
            return Err(Error::invalid("quota is empty"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubsetSelection {
    pub strategy: Strategy,
    pub chosen: Vec<String>,
    /// Rank MAE of `chosen` against the full benchmark, when ranks are known.
    pub rank_mae: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub trials: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub eta: Option<f64>,
    /// Per-dataset roles, for tree/DNN picks.
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub picks: Vec<Pick>,
}

impl SubsetSelection {
    fn new(strategy: Strategy, full: &RankMatrix, chosen: &[usize]) -> Result<Self> {
        Ok(SubsetSelection {
            strategy,
            chosen: chosen.iter().map(|&i| full.datasets[i].clone()).collect(),
            rank_mae: Some(rank_mae(full, chosen)?),
            trials: None,
            seed: None,
            eta: None,
            picks: Vec::new(),
        })
    }
}

/// Adds, one at a time, the eligible dataset that minimises the rank MAE of
/// the growing subset. Ties go to the earlier dataset. `chosen` is in
/// selection order.
pub fn select_greedy(full: &RankMatrix, quota: &Quota) -> Result<SubsetSelection> {
    quota.validate(full.n_datasets())?;
    let full_avg = full.full_average();
    let l = full.n_methods() as f64;
    let mut group_of = vec![usize::MAX; full.n_datasets()];
    for (g, grp) in quota.groups.iter().enumerate() {
        for &m in &grp.members {
            group_of[m] = g;
        }
    }
    let mut remaining: Vec<usize> = quota.groups.iter().map(|g| g.count).collect();
    let mut taken = vec![false; full.n_datasets()];
    let mut sums = vec![0.0; full.n_methods()];
    let mut chosen = Vec::with_capacity(quota.size());
    for step in 0..quota.size() {
        let n = (step + 1) as f64;
        let (best, _) = par::argmin_range(full.n_datasets(), |d| {
            let g = group_of[d];
            if taken[d] || g == usize::MAX || remaining[g] == 0 {
                return f64::INFINITY;
            }
            full_avg
                .iter()
                .zip(&sums)
                .zip(&full.ranks[d])
                .map(|((a, s), r)| (a - (s + r) / n).abs())
                .sum::<f64>()
                / l
        })
        .expect("non-empty benchmark");
        taken[best] = true;
        remaining[group_of[best]] -= 1;
        for (s, r) in sums.iter_mut().zip(&full.ranks[best]) {
            *s += r;
        }
        chosen.push(best);
    }
    SubsetSelection::new(Strategy::Greedy, full, &chosen)
}

fn draw<R: Rng>(quota: &Quota, r: &mut R) -> Vec<usize> {
    let mut out = Vec::with_capacity(quota.size());
    for g in &quota.groups {
        out.extend(index::sample(r, g.members.len(), g.count).into_iter().map(|i| g.members[i]));
    }
    out
}

/// Best of `trials` uniform draws; trial `i` uses its own sub-stream of
/// `seed`, so the result does not depend on how trials are scheduled.
pub fn select_random(full: &RankMatrix, quota: &Quota, trials: usize, seed: u64) -> Result<SubsetSelection> {
    if trials == 0 {
        return Err(Error::invalid("at least one trial is required"));
    }
    quota.validate(full.n_datasets())?;
    let full_avg = full.full_average();
    let trial = |i: usize| draw(quota, &mut rng::substream(seed, "distill/random", i as u64));
    let (best, _) = par::argmin_range(trials, |i| mae_against(&full_avg, full, &trial(i))).expect("trials >= 1");
    let mut chosen = trial(best);
    chosen.sort_unstable();
    let mut sel = SubsetSelection::new(Strategy::Random, full, &chosen)?;
    sel.trials = Some(trials);
    sel.seed = Some(seed);
    Ok(sel)
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum()
}

/// Lowest index minimising `key`.
fn argmin_by(n: usize, key: impl Fn(usize) -> f64) -> usize {
    let mut best = (0, f64::INFINITY);
    for i in 0..n {
        let k = key(i);
        if k < best.1 {
            best = (i, k);
        }
    }
    best.0
}

/// k-means++ seeding then Lloyd iterations on `points`. An empty cluster is
/// re-seeded at the point farthest from its current center.
pub fn kmeans<R: Rng>(points: &[&[f64]], k: usize, r: &mut R) -> Vec<Vec<f64>> {
    let n = points.len();
    assert!(k >= 1 && k <= n);
    let mut picked = vec![false; n];
    let first = r.random_range(0..n);
    picked[first] = true;
    let mut centers: Vec<Vec<f64>> = vec![points[first].to_vec()];
    let mut d2: Vec<f64> = points.iter().map(|p| sq_dist(p, &centers[0])).collect();
    while centers.len() < k {
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            let mut u = r.random::<f64>() * total;
            let mut choice = None;
            for (i, &w) in d2.iter().enumerate() {
                if w > 0.0 {
                    choice = Some(i);
                    if u < w {
                        break;
                    }
                    u -= w;
                }
            }
            choice.expect("positive total weight")
        } else {
            // All remaining points coincide with a center.
            (0..n).find(|&i| !picked[i]).expect("k <= n")
        };
        picked[next] = true;
        centers.push(points[next].to_vec());
        for (i, p) in points.iter().enumerate() {
            d2[i] = d2[i].min(sq_dist(p, &centers[centers.len() - 1]));
        }
    }

    let dim = points[0].len();
    let mut assign = vec![usize::MAX; n];
    for _ in 0..KMEANS_MAX_ITER {
        let next: Vec<usize> = points.iter().map(|p| argmin_by(k, |c| sq_dist(p, &centers[c]))).collect();
        let changed = next != assign;
        assign = next;
        if !changed {
            break;
        }
        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (p, &c) in points.iter().zip(&assign) {
            counts[c] += 1;
            for (s, v) in sums[c].iter_mut().zip(p.iter()) {
                *s += v;
            }
        }
        for c in 0..k {
            if counts[c] > 0 {
                centers[c] = sums[c].iter().map(|s| s / counts[c] as f64).collect();
            }
        }
        for c in 0..k {
            if counts[c] == 0 {
                let far = argmin_by(n, |i| -sq_dist(points[i], &centers[assign[i]]));
                centers[c] = points[far].to_vec();
                counts[assign[far]] -= 1;
                assign[far] = c;
                counts[c] = 1;
            }
        }
    }
    centers
}

/// One representative per k-means cluster of the rank rows: the unused
/// dataset nearest each center, centers taken in order.
pub fn select_kmeans(full: &RankMatrix, quota: &Quota, seed: u64) -> Result<SubsetSelection> {
    quota.validate(full.n_datasets())?;
    let mut chosen = Vec::with_capacity(quota.size());
    for (g, grp) in quota.groups.iter().enumerate() {
        let points: Vec<&[f64]> = grp.members.iter().map(|&m| full.ranks[m].as_slice()).collect();
        let centers = kmeans(&points, grp.count, &mut rng::substream(seed, "distill/kmeans", g as u64));
        let mut used = vec![false; points.len()];
        for c in &centers {
            let i = argmin_by(points.len(), |i| if used[i] { f64::INFINITY } else { sq_dist(points[i], c) });
            used[i] = true;
            chosen.push(grp.members[i]);
        }
    }
    chosen.sort_unstable();
    let mut sel = SubsetSelection::new(Strategy::Kmeans, full, &chosen)?;
    sel.seed = Some(seed);
    Ok(sel)
}

/// Outcome of selecting on one group of methods and scoring on another.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitEvaluation {
    pub seen: Vec<String>,
    pub unseen: Vec<String>,
    pub seen_mae: f64,
    pub unseen_mae: f64,
    pub selection: SubsetSelection,
}

/// Runs `select` on ranks among the `seen` methods, then scores the chosen
/// datasets by rank MAE among the `unseen` methods (re-ranked among
/// themselves).
pub fn evaluate_method_split<F>(results: &ResultsTable, seen: &[String], unseen: &[String], select: F) -> Result<SplitEvaluation>
where
    F: FnOnce(&RankMatrix) -> Result<SubsetSelection>,
{
    let lookup = |names: &[String]| -> Result<Vec<usize>> {
        if names.is_empty() {
            return Err(Error::invalid("method group is empty"));
        }
        names
            .iter()
            .map(|n| results.method_index(n).ok_or_else(|| Error::invalid(format!("unknown method `{n}`"))))
            .collect()
    };
    let (s, u) = (lookup(seen)?, lookup(unseen)?);
    if s.iter().any(|m| u.contains(m)) {
        return Err(Error::invalid("seen and unseen method groups overlap"));
    }
    let seen_ranks = rank_methods(results, &s);
    let unseen_ranks = rank_methods(results, &u);
    let selection = select(&seen_ranks)?;
    let idx = seen_ranks.indices_of(&selection.chosen)?;
    Ok(SplitEvaluation {
        seen: seen.to_vec(),
        unseen: unseen.to_vec(),
        seen_mae: rank_mae(&seen_ranks, &idx)?,
        unseen_mae: rank_mae(&unseen_ranks, &idx)?,
        selection,
    })
}

//! `distill`, `treednn` and `ttest`: benchmark-level analyses.

use std::collections::BTreeMap;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::Args;
use curvecast_core::data::{load_dataset_info, load_results, DatasetInfo, ResultsTable};
use curvecast_core::distill::{
    default_groups, evaluate_method_split, group_and_pick, pairwise_significance, rank, select_greedy, select_kmeans,
    select_random, tree_dnn_score, Quota, RankMatrix, Strategy, SubsetSelection, TreeDnnScore, DEFAULT_ALPHA,
    DEFAULT_ETA, DEFAULT_TAU, DEFAULT_TRIALS,
};
use curvecast_core::TaskType;
use serde::Serialize;

use super::Ctx;
use crate::io::{csv_bytes, real};
use crate::manifest::Run;
use crate::OutArgs;

#[derive(Args, Debug)]
pub struct DistillArgs {
    /// Results CSV: `dataset_id, higher_is_better, <method>...`.
    #[arg(long)]
    pub results: PathBuf,
    /// greedy, random or kmeans.
    #[arg(long, default_value = "greedy")]
    pub strategy: Strategy,
    /// Fraction of datasets to keep.
    #[arg(long, default_value_t = DEFAULT_ETA)]
    pub eta: f64,
    /// Random subsets drawn by the random strategy.
    #[arg(long, default_value_t = DEFAULT_TRIALS)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Dataset info CSV (`dataset_id, task, ...`); when given, the quota is
    /// applied per task type.
    #[arg(long)]
    pub info: Option<PathBuf>,
    /// Methods held out of selection; the subset is then also scored on them.
    #[arg(long, value_delimiter = ',')]
    pub unseen: Vec<String>,
    #[command(flatten)]
    pub out: OutArgs,
}

fn tasks_for(results: &ResultsTable, info: &[DatasetInfo]) -> Result<Vec<TaskType>> {
    let by_id: BTreeMap<&str, TaskType> = info.iter().map(|d| (d.id.as_str(), d.task)).collect();
    results
        .datasets
        .iter()
        .map(|id| by_id.get(id.as_str()).copied().with_context(|| format!("no task type for dataset `{id}`")))
        .collect()
}

fn select(full: &RankMatrix, quota: &Quota, args: &DistillArgs) -> curvecast_core::Result<SubsetSelection> {
    let mut s = match args.strategy {
        Strategy::Greedy => select_greedy(full, quota)?,
        Strategy::Random => select_random(full, quota, args.trials, args.seed)?,
        Strategy::Kmeans => select_kmeans(full, quota, args.seed)?,
        Strategy::TreeDnn => {
            return Err(curvecast_core::Error::invalid("use the `treednn` command for tree/DNN picks"));
        }
    };
    s.eta = Some(args.eta);
    Ok(s)
}

pub fn distill(ctx: &Ctx, args: DistillArgs) -> Result<()> {
    let mut run = Run::new("distill");
    run.seed(args.seed);
    run.input(&args.results)?;
    let results = load_results(&args.results, None)?;
    let quota_for = |tasks: Option<&[TaskType]>| -> curvecast_core::Result<Quota> {
        match tasks {
            Some(t) => Quota::per_task(t, args.eta),
            None => Quota::from_eta(results.n_datasets(), args.eta),
        }
    };
    let tasks = match &args.info {
        Some(p) => {
            run.input(p)?;
            Some(tasks_for(&results, &load_dataset_info(p)?)?)
        }
        None => None,
    };
    let quota = quota_for(tasks.as_deref())?;
    let out = args.out.out.clone();
    if args.unseen.is_empty() {
        let selection = select(&rank(&results), &quota, &args)?;
        run.emit_json(out.as_deref(), &selection)?;
    } else {
        let seen: Vec<String> = results.methods.iter().filter(|m| !args.unseen.contains(m)).cloned().collect();
        let ev = evaluate_method_split(&results, &seen, &args.unseen, |r| select(r, &quota, &args))?;
        run.emit_json(out.as_deref(), &ev)?;
    }
    run.finish(ctx.manifest_path(out.as_deref()), ctx.workers)
}

fn parse_group(s: &str) -> Result<(TaskType, usize), String> {
    let (task, n) = s.split_once('=').ok_or_else(|| format!("expected task=count, got `{s}`"))?;
    let task: TaskType = task.parse().map_err(|e: curvecast_core::Error| e.to_string())?;
    let n = n.trim().parse().map_err(|_| format!("bad group count in `{s}`"))?;
    Ok((task, n))
}

#[derive(Args, Debug)]
pub struct TreeDnnArgs {
    #[arg(long)]
    pub results: PathBuf,
    /// Tree-based methods.
    #[arg(long, value_delimiter = ',', required = true)]
    pub tree: Vec<String>,
    /// DNN-based methods.
    #[arg(long, value_delimiter = ',', required = true)]
    pub dnn: Vec<String>,
    /// Scores within ±tau are labelled Tie.
    #[arg(long, default_value_t = DEFAULT_TAU)]
    pub tau: f64,
    /// Dataset info CSV with sizes; enables grouped picking.
    #[arg(long)]
    pub sizes: Option<PathBuf>,
    /// Groups per task type (default binclass=5,multiclass=4,regression=6).
    #[arg(long, value_delimiter = ',', value_parser = parse_group)]
    pub groups: Vec<(TaskType, usize)>,
    /// Prefer runner-up picks that keep categorical and numerical datasets
    /// balanced.
    #[arg(long)]
    pub balance_categorical: bool,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Serialize)]
struct TreeDnnOutput {
    tau: f64,
    scores: Vec<TreeDnnScore>,
    #[serde(skip_serializing_if = "Option::is_none")]
    selection: Option<SubsetSelection>,
}

pub fn treednn(ctx: &Ctx, args: TreeDnnArgs) -> Result<()> {
    let mut run = Run::new("treednn");
    run.input(&args.results)?;
    let results = load_results(&args.results, None)?;
    let scores = tree_dnn_score(&results, &args.tree, &args.dnn, args.tau)?;
    let selection = match &args.sizes {
        Some(p) => {
            run.input(p)?;
            let info = load_dataset_info(p)?;
            let groups = if args.groups.is_empty() {
                default_groups()
            } else {
                args.groups.iter().copied().collect()
            };
            Some(group_and_pick(&scores, &info, &groups, args.balance_categorical)?)
        }
        None if !args.groups.is_empty() || args.balance_categorical => {
            bail!("--groups and --balance-categorical need --sizes")
        }
        None => None,
    };
    let out = TreeDnnOutput {
        tau: args.tau,
        scores,
        selection,
    };
    run.emit_json(args.out.out.as_deref(), &out)?;
    run.finish(ctx.manifest_path(args.out.out.as_deref()), ctx.workers)
}

#[derive(Args, Debug)]
pub struct TtestArgs {
    #[arg(long)]
    pub results: PathBuf,
    /// Seed-level CSV: `dataset_id, method, seed, value`.
    #[arg(long)]
    pub seeds: PathBuf,
    #[arg(long)]
    pub anchor: String,
    #[arg(long, default_value_t = DEFAULT_ALPHA)]
    pub alpha: f64,
    #[command(flatten)]
    pub out: OutArgs,
}

pub fn ttest(ctx: &Ctx, args: TtestArgs) -> Result<()> {
    let mut run = Run::new("ttest");
    run.input(&args.results)?;
    run.input(&args.seeds)?;
    let results = load_results(&args.results, Some(&args.seeds))?;
    let rates = pairwise_significance(&results, &args.anchor, args.alpha)?;
    let rows = rates.iter().map(|r| {
        vec![
            args.anchor.clone(),
            r.opponent.clone(),
            real(r.win),
            real(r.tie),
            real(r.lose),
            r.n_datasets.to_string(),
        ]
    });
    let bytes = csv_bytes(&["anchor", "opponent", "win", "tie", "lose", "n_datasets"], rows)?;
    run.emit(args.out.out.as_deref(), &bytes)?;
    run.finish(ctx.manifest_path(args.out.out.as_deref()), ctx.workers)
}

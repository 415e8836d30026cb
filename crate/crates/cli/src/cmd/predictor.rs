//! `train`, `predict`, `eval` and `advise`.

use std::collections::BTreeMap;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use curvecast_core::curves::{epoch_points, fit_law, CurveParams};
use curvecast_core::data::{load_curves, MetricKind, ValidationCurve};
use curvecast_core::metafeatures::{assemble_input, MetaFeatureVector, SUPPORT_LEN};
use curvecast_core::predictor::{
    advise_early_stop, evaluate, fit_theta_targets, predict_curve, select_meta_features, train_predictor, Advice,
    CurveScore, FeatureImportanceReport, PredictorInput, PredictorModel, Split, TrainConfig, TrainReport,
    TrainingCorpus, TrainingRecord, DEFAULT_STOP_MARGIN, MIN_SELECTION_RECORDS,
};
use curvecast_core::{par, TaskType};
use serde::Serialize;

use super::Ctx;
use crate::io::{csv_bytes, read_json, read_meta_map, real};
use crate::manifest::Run;
use crate::OutArgs;

#[derive(Args, Debug)]
pub struct TrainArgs {
    /// Curve corpus JSON.
    #[arg(long)]
    pub curves: PathBuf,
    /// Meta-features: a JSON map of dataset ID to vector, or a directory of
    /// `<id>.json` vectors.
    #[arg(long)]
    pub meta: PathBuf,
    /// Support size; the input layout fixes it at 5.
    #[arg(long, default_value_t = SUPPORT_LEN)]
    pub k: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1e-3)]
    pub lr: f64,
    #[arg(long, default_value_t = 500)]
    pub epochs: usize,
    #[arg(long, default_value_t = 32)]
    pub batch: usize,
    #[arg(long, default_value_t = 0.9)]
    pub momentum: f64,
    /// Fraction of dataset IDs used for training; the rest is held out.
    #[arg(long, default_value_t = 0.8)]
    pub train_fraction: f64,
    /// Divisor applied to normalized-RMSE curves before use.
    #[arg(long, default_value_t = 1.0)]
    pub rmse_scale: f64,
    /// Training report JSON (losses, feature importances, held-out scores).
    #[arg(long)]
    pub report: Option<PathBuf>,
    #[command(flatten)]
    pub out: OutArgs,
}

/// Curves paired with their meta-features, with RMSE curves rescaled.
fn join_meta(
    curves: Vec<ValidationCurve>,
    meta: &BTreeMap<String, MetaFeatureVector>,
    k: usize,
    rmse_scale: f64,
) -> Result<Vec<TrainingRecord>> {
    if k != SUPPORT_LEN {
        bail!("the predictor input layout fixes the support size at {SUPPORT_LEN}, got --k {k}");
    }
    if !(rmse_scale > 0.0 && rmse_scale.is_finite()) {
        bail!("--rmse-scale must be positive");
    }
    curves
        .into_iter()
        .map(|mut c| {
            if c.metric == MetricKind::NormalizedRmse {
                c.values.iter_mut().for_each(|v| *v /= rmse_scale);
            }
            let m = meta
                .get(&c.dataset_id)
                .with_context(|| format!("no meta-features for dataset `{}`", c.dataset_id))?;
            Ok(TrainingRecord {
                input: assemble_input(m, &c.values[..k])?,
                dataset_id: c.dataset_id,
                task: c.task,
                values: c.values,
            })
        })
        .collect()
}

fn as_curve(r: &TrainingRecord) -> ValidationCurve {
    ValidationCurve {
        dataset_id: r.dataset_id.clone(),
        task: r.task,
        metric: if r.task.is_classification() { MetricKind::Accuracy } else { MetricKind::NormalizedRmse },
        values: r.values.clone(),
    }
}

#[derive(Debug, Serialize)]
struct MeanScores {
    n_curves: usize,
    mlp: CurveScore,
    support_fit: CurveScore,
}

#[derive(Debug, Serialize)]
struct TrainOutput<'a> {
    config: &'a TrainConfig,
    n_train: usize,
    n_test: usize,
    losses: &'a TrainReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    importance: Option<FeatureImportanceReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    held_out: Option<MeanScores>,
}

/// MLP prediction and 5-point law fit for every record, scored over the
/// default horizon.
fn score_records(model: &PredictorModel, records: &[&TrainingRecord], k: usize) -> Result<Vec<(CurveScore, CurveScore)>> {
    let scores = par::try_map(records, |r| -> curvecast_core::Result<_> {
        let truth = as_curve(r);
        let (_, pred) = predict_curve(model, &PredictorInput::new(r.input), HORIZON)?;
        let fit = fit_law(&epoch_points(&r.values[..k]))?;
        let base: Vec<f64> = (1..=HORIZON).map(|t| fit.params.at(f64::from(t))).collect();
        Ok((evaluate(&pred, &truth)?, evaluate(&base, &truth)?))
    })?;
    Ok(scores)
}

const HORIZON: u32 = curvecast_core::predictor::DEFAULT_HORIZON;

fn mean(scores: impl Iterator<Item = CurveScore>) -> CurveScore {
    let (mut n, mut mae, mut ovd) = (0usize, 0.0, 0.0);
    for s in scores {
        n += 1;
        mae += s.mae;
        ovd += s.ovd;
    }
    let n = n.max(1) as f64;
    CurveScore { mae: mae / n, ovd: ovd / n }
}

pub fn train(ctx: &Ctx, args: TrainArgs) -> Result<()> {
    let mut run = Run::new("train");
    run.seed(args.seed);
    run.input(&args.curves)?;
    run.input(&args.meta)?;
    let curves = load_curves(&args.curves, args.k)?;
    let meta = read_meta_map(&args.meta)?;
    let records = join_meta(curves, &meta, args.k, args.rmse_scale)?;
    let corpus = TrainingCorpus::split_by_dataset(records, args.train_fraction, args.seed)?;
    let config = TrainConfig {
        lr: args.lr,
        epochs: args.epochs,
        seed: args.seed,
        batch: args.batch,
        momentum: args.momentum,
        support_len: args.k,
    };
    let (model, losses) = train_predictor(&corpus, &config)?;
    run.emit_json(args.out.out.as_deref(), &model)?;

    if let Some(report) = &args.report {
        let pick = |s: Split| -> Vec<&TrainingRecord> { corpus.indices(s).into_iter().map(|i| &corpus.records[i]).collect() };
        let (train, test) = (pick(Split::Train), pick(Split::Test));
        // Step one of the pipeline: full-curve targets, then tree importances.
        let importance = if train.len() >= MIN_SELECTION_RECORDS {
            let curves: Vec<ValidationCurve> = train.iter().map(|r| as_curve(r)).collect();
            let targets: Vec<CurveParams> = fit_theta_targets(&curves)?.into_iter().map(|f| f.params).collect();
            let inputs: Vec<_> = train.iter().map(|r| r.input).collect();
            Some(select_meta_features(&inputs, &targets)?)
        } else {
            None
        };
        let held_out = if test.is_empty() {
            None
        } else {
            let s = score_records(&model, &test, args.k)?;
            Some(MeanScores {
                n_curves: s.len(),
                mlp: mean(s.iter().map(|p| p.0)),
                support_fit: mean(s.iter().map(|p| p.1)),
            })
        };
        let out = TrainOutput {
            config: &config,
            n_train: train.len(),
            n_test: test.len(),
            losses: &losses,
            importance,
            held_out,
        };
        run.emit_json(Some(report), &out)?;
    }
    run.finish(ctx.manifest_path(args.out.out.as_deref()), ctx.workers)
}

#[derive(Args, Debug)]
pub struct QueryArgs {
    /// Trained model JSON.
    #[arg(long)]
    pub model: PathBuf,
    /// Meta-feature vector JSON of the dataset.
    #[arg(long)]
    pub meta: PathBuf,
    /// The first five observed values.
    #[arg(long, value_delimiter = ',', num_args = 1.., required = true)]
    pub support: Vec<f64>,
    #[arg(long, default_value_t = HORIZON)]
    pub horizon: u32,
}

fn load_query(run: &mut Run, q: &QueryArgs) -> Result<(PredictorModel, PredictorInput)> {
    run.input(&q.model)?;
    run.input(&q.meta)?;
    let model: PredictorModel = read_json(&q.model)?;
    model.validate().map_err(|e| anyhow::anyhow!(e)).with_context(|| format!("{}", q.model.display()))?;
    let mfv: MetaFeatureVector = read_json(&q.meta)?;
    let input = PredictorInput::new(assemble_input(&mfv, &q.support)?);
    Ok((model, input))
}

#[derive(Args, Debug)]
pub struct PredictArgs {
    #[command(flatten)]
    pub query: QueryArgs,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Serialize)]
struct Prediction {
    theta: CurveParams,
    values: Vec<f64>,
}

pub fn predict(ctx: &Ctx, args: PredictArgs) -> Result<()> {
    let mut run = Run::new("predict");
    let (model, input) = load_query(&mut run, &args.query)?;
    let (theta, values) = predict_curve(&model, &input, args.query.horizon)?;
    run.emit_json(args.out.out.as_deref(), &Prediction { theta, values })?;
    run.finish(ctx.manifest_path(args.out.out.as_deref()), ctx.workers)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EvalMethod {
    /// The trained predictor.
    Mlp,
    /// The law fitted to the support points alone.
    SupportFit,
}

#[derive(Args, Debug)]
pub struct EvalArgs {
    /// Trained model JSON (required for `--method mlp`).
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long)]
    pub curves: PathBuf,
    /// Meta-features, as for `train` (required for `--method mlp`).
    #[arg(long)]
    pub meta: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = EvalMethod::Mlp)]
    pub method: EvalMethod,
    #[arg(long, default_value_t = SUPPORT_LEN)]
    pub k: usize,
    #[arg(long, default_value_t = HORIZON)]
    pub horizon: u32,
    #[arg(long, default_value_t = 1.0)]
    pub rmse_scale: f64,
    #[command(flatten)]
    pub out: OutArgs,
}

pub fn eval(ctx: &Ctx, args: EvalArgs) -> Result<()> {
    let mut run = Run::new("eval");
    run.input(&args.curves)?;
    let curves = load_curves(&args.curves, args.k)?;
    let scores: Vec<(String, TaskType, CurveScore)> = match args.method {
        EvalMethod::Mlp => {
            let (Some(model_path), Some(meta_path)) = (&args.model, &args.meta) else {
                bail!("--method mlp needs --model and --meta");
            };
            run.input(model_path)?;
            run.input(meta_path)?;
            let model: PredictorModel = read_json(model_path)?;
            model.validate()?;
            let meta = read_meta_map(meta_path)?;
            let records = join_meta(curves, &meta, args.k, args.rmse_scale)?;
            let horizon = args.horizon;
            par::try_map(&records, |r| -> curvecast_core::Result<_> {
                let (_, pred) = predict_curve(&model, &PredictorInput::new(r.input), horizon)?;
                Ok((r.dataset_id.clone(), r.task, evaluate(&pred, &as_curve(r))?))
            })?
        }
        EvalMethod::SupportFit => {
            let (k, horizon, scale) = (args.k, args.horizon, args.rmse_scale);
            par::try_map(&curves, |c| -> curvecast_core::Result<_> {
                let mut c = c.clone();
                if c.metric == MetricKind::NormalizedRmse {
                    c.values.iter_mut().for_each(|v| *v /= scale);
                }
                let fit = fit_law(&epoch_points(&c.values[..k.min(c.len())]))?;
                let pred: Vec<f64> = (1..=horizon).map(|t| fit.params.at(f64::from(t))).collect();
                Ok((c.dataset_id.clone(), c.task, evaluate(&pred, &c)?))
            })?
        }
    };
    let avg = mean(scores.iter().map(|s| s.2));
    let rows = scores
        .iter()
        .map(|(id, task, s)| vec![id.clone(), task.to_string(), real(s.mae), real(s.ovd)])
        .chain(std::iter::once(vec!["mean".into(), String::new(), real(avg.mae), real(avg.ovd)]));
    let bytes = csv_bytes(&["dataset_id", "task", "mae", "ovd"], rows)?;
    run.emit(args.out.out.as_deref(), &bytes)?;
    run.finish(ctx.manifest_path(args.out.out.as_deref()), ctx.workers)
}

#[derive(Args, Debug)]
pub struct AdviseArgs {
    #[command(flatten)]
    pub query: QueryArgs,
    /// Best metric value observed so far.
    #[arg(long)]
    pub best: f64,
    #[arg(long)]
    pub task: TaskType,
    /// Minimum predicted improvement worth continuing for.
    #[arg(long, default_value_t = DEFAULT_STOP_MARGIN)]
    pub margin: f64,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Serialize)]
struct AdviseOutput {
    advice: Advice,
    best_so_far: f64,
    predicted_optimum: f64,
    horizon: u32,
    margin: f64,
}

pub fn advise(ctx: &Ctx, args: AdviseArgs) -> Result<()> {
    let mut run = Run::new("advise");
    let (model, input) = load_query(&mut run, &args.query)?;
    let horizon = args.query.horizon;
    let advice = advise_early_stop(&model, &input, args.best, horizon, args.task, args.margin)?;
    let (_, values) = predict_curve(&model, &input, horizon)?;
    let predicted_optimum = if args.task.is_classification() {
        values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    } else {
        values.iter().copied().fold(f64::INFINITY, f64::min)
    };
    let out = AdviseOutput {
        advice,
        best_so_far: args.best,
        predicted_optimum,
        horizon,
        margin: args.margin,
    };
    run.emit_json(args.out.out.as_deref(), &out)?;
    run.finish(ctx.manifest_path(args.out.out.as_deref()), ctx.workers)
}


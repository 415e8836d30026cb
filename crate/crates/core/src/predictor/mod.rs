//! Meta-learned curve prediction: a network maps (first epochs,
//! meta-features) to the four law parameters and is trained through the law
//! itself on the remainder of each curve.
//!
//! The pipeline is
//! 1. [`fit_theta_targets`]: full-curve law fits, one per training curve;
//! 2. [`select_meta_features`]: one regression tree per parameter, reporting
//!    which input dimensions carry signal;
//! 3. [`train_predictor`]: SGD on the query-epoch absolute error.

pub mod cart;
pub mod mlp;

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::curves::{epoch_points, fit_law, CurveParams, LawFit};
use crate::data::ValidationCurve;
use crate::metafeatures::{INPUT_DIM, META_SLICE_NAMES, SUPPORT_LEN};
use crate::{par, rng, Error, Result, TaskType};

pub use cart::{RegressionTree, TreeParams};
pub use mlp::{query_loss, Normalization, OutputScaling, PredictorInput, PredictorModel, LAYER_SIZES};

/// Default horizon for predictions and the optimal-value comparison.
pub const DEFAULT_HORIZON: u32 = 200;
/// Importance above which a dimension counts as selected.
pub const IMPORTANCE_THRESHOLD: f64 = 0.005;
/// Default improvement margin for early-stopping advice.
pub const DEFAULT_STOP_MARGIN: f64 = 1e-4;

/// Names of the 24 predictor input dimensions, in order.
pub fn input_names() -> Vec<String> {
    (1..=SUPPORT_LEN)
        .map(|t| format!("support.{t}"))
        .chain(META_SLICE_NAMES.iter().map(|s| s.to_string()))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingRecord {
    pub dataset_id: String,
    pub task: TaskType,
    pub input: [f64; INPUT_DIM],
    /// The whole observed curve, epochs `1..=T`.
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingCorpus {
    pub records: Vec<TrainingRecord>,
    pub split: Vec<Split>,
}

impl TrainingCorpus {
    /// Assigns `train_fraction` of the distinct dataset IDs (rounded, at
    /// least one) to the training split; every record of an ID shares its
    /// split.
    pub fn split_by_dataset(records: Vec<TrainingRecord>, train_fraction: f64, seed: u64) -> Result<Self> {
        if !(0.0..=1.0).contains(&train_fraction) {
            return Err(Error::invalid("train fraction must lie in [0, 1]"));
        }
        let ids: BTreeSet<&str> = records.iter().map(|r| r.dataset_id.as_str()).collect();
        let mut ids: Vec<&str> = ids.into_iter().collect();
        ids.shuffle(&mut rng::stream(seed, "predictor/split"));
        let n_train = ((ids.len() as f64 * train_fraction).round() as usize).clamp(ids.len().min(1), ids.len());
        let train: BTreeSet<&str> = ids[..n_train].iter().copied().collect();
        let split = records
            .iter()
            .map(|r| if train.contains(r.dataset_id.as_str()) { Split::Train } else { Split::Test })
            .collect();
        Ok(TrainingCorpus { records, split })
    }

    /// Every record in the training split.
    pub fn all_train(records: Vec<TrainingRecord>) -> Self {
        let split = vec![Split::Train; records.len()];
        TrainingCorpus { records, split }
    }

    pub fn indices(&self, which: Split) -> Vec<usize> {
        (0..self.records.len()).filter(|&i| self.split[i] == which).collect()
    }

    pub fn validate(&self, k: usize) -> Result<()> {
        if self.split.len() != self.records.len() {
            return Err(Error::invalid("split assignment does not cover every record"));
        }
        let mut seen = std::collections::BTreeMap::new();
        for (r, s) in self.records.iter().zip(&self.split) {
            if *seen.entry(r.dataset_id.as_str()).or_insert(*s) != *s {
                return Err(Error::invalid(format!("dataset `{}` appears in both splits", r.dataset_id)));
            }
            if r.values.len() <= k {
                return Err(Error::invalid(format!(
                    "curve `{}` has {} epochs; need more than {k}",
                    r.dataset_id,
                    r.values.len()
                )));
            }
            if r.input.iter().any(|v| !v.is_finite()) {
                return Err(Error::invalid(format!("input of `{}` is not finite", r.dataset_id)));
            }
        }
        Ok(())
    }
}

/// Full-curve law fit of every curve, in input order.
pub fn fit_theta_targets(curves: &[ValidationCurve]) -> Result<Vec<LawFit>> {
    par::try_map(curves, |c| {
        if c.len() < 4 {
            return Err(Error::invalid(format!(
                "curve `{}` has {} epochs; fitting needs at least 4",
                c.dataset_id,
                c.len()
            )));
        }
        fit_law(&epoch_points(&c.values)).map_err(|e| Error::invalid(format!("curve `{}`: {e}", c.dataset_id)))
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureImportanceReport {
    pub names: Vec<String>,
    /// Mean over the four parameter trees of each tree's normalized
    /// importance.
    pub importance: Vec<f64>,
    pub selected: Vec<bool>,
    /// Normalized importance per tree, in parameter order A, B, C, D.
    pub per_parameter: Vec<Vec<f64>>,
}

/// Minimum number of records for [`select_meta_features`].
pub const MIN_SELECTION_RECORDS: usize = 20;

/// Fits one regression tree per law parameter and reports impurity-based
/// input importances. Trees that never split contribute nothing to the
/// average, so identical inputs yield all-zero importances.
pub fn select_meta_features(inputs: &[[f64; INPUT_DIM]], targets: &[CurveParams]) -> Result<FeatureImportanceReport> {
    if inputs.len() != targets.len() {
        return Err(Error::invalid("inputs and targets differ in length"));
    }
    if inputs.len() < MIN_SELECTION_RECORDS {
        return Err(Error::invalid(format!(
            "feature selection needs at least {MIN_SELECTION_RECORDS} records, got {}",
            inputs.len()
        )));
    }
    let x: Vec<Vec<f64>> = inputs.iter().map(|r| r.to_vec()).collect();
    let per_parameter: Vec<Vec<f64>> = par::map_range(4, |j| {
        let y: Vec<f64> = targets.iter().map(|t| t.to_array()[j]).collect();
        RegressionTree::fit(&x, &y, TreeParams::default()).importances()
    });
    let contributing: Vec<&Vec<f64>> = per_parameter.iter().filter(|v| v.iter().any(|&g| g > 0.0)).collect();
    let importance: Vec<f64> = (0..INPUT_DIM)
        .map(|d| {
            if contributing.is_empty() {
                0.0
            } else {
                contributing.iter().map(|v| v[d]).sum::<f64>() / contributing.len() as f64
            }
        })
        .collect();
    Ok(FeatureImportanceReport {
        names: input_names(),
        selected: importance.iter().map(|&v| v > IMPORTANCE_THRESHOLD).collect(),
        importance,
        per_parameter,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub lr: f64,
    pub epochs: usize,
    pub seed: u64,
    pub batch: usize,
    pub momentum: f64,
    /// Number of leading epochs fed to the network; the loss runs over the
    /// rest.
    pub support_len: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            lr: 1e-3,
            epochs: 500,
            seed: 0,
            batch: 32,
            momentum: 0.9,
            support_len: SUPPORT_LEN,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    /// Mean training loss of the freshly initialized model.
    pub initial_loss: f64,
    /// Per-record mean of the minibatch losses seen during each epoch.
    pub epoch_losses: Vec<f64>,
}

/// Trains a fresh network on the training split of `corpus`.
///
/// Input normalization is frozen from the training inputs and the output
/// scaling from full-curve law fits of the training curves.
/// Per-record gradients run in parallel but are summed in record order, so
/// the result is identical for any thread count.
pub fn train_predictor(corpus: &TrainingCorpus, config: &TrainConfig) -> Result<(PredictorModel, TrainReport)> {
    if !(config.lr > 0.0 && config.lr.is_finite()) || config.batch == 0 || !(0.0..1.0).contains(&config.momentum) {
        return Err(Error::invalid("learning rate must be positive, batch at least 1 and momentum in [0, 1)"));
    }
    corpus.validate(config.support_len)?;
    let train = corpus.indices(Split::Train);
    if train.is_empty() {
        return Err(Error::invalid("training split is empty"));
    }
    let records: Vec<&TrainingRecord> = train.iter().map(|&i| &corpus.records[i]).collect();
    let k = config.support_len;

    let mut model = PredictorModel::init(&mut rng::stream(config.seed, "predictor/init"));
    let inputs: Vec<[f64; INPUT_DIM]> = records.iter().map(|r| r.input).collect();
    model.normalization = Normalization::fit(&inputs);
    let fits = par::try_map(&records, |r| fit_law(&epoch_points(&r.values)))?;
    let targets: Vec<CurveParams> = fits.iter().map(|f| f.params).collect();
    model.output = OutputScaling::fit(&targets);

    let mean_loss = |m: &PredictorModel| -> f64 {
        let l = par::map(&records, |r| m.loss(&r.input, &r.values, k));
        l.iter().sum::<f64>() / l.len() as f64
    };
    let initial_loss = mean_loss(&model);
    if !initial_loss.is_finite() {
        return Err(Error::NonFiniteLoss {
            loss: initial_loss,
            epoch: 0,
            batch: 0,
            lr: config.lr,
        });
    }

    let mut order: Vec<usize> = (0..records.len()).collect();
    let mut shuffle_rng = rng::stream(config.seed, "predictor/shuffle");
    let mut velocity = vec![0.0; model.n_params()];
    let mut epoch_losses = Vec::with_capacity(config.epochs);
    for epoch in 0..config.epochs {
        order.shuffle(&mut shuffle_rng);
        let mut loss_sum = 0.0;
        for (b, chunk) in order.chunks(config.batch).enumerate() {
            let per_record = par::map(chunk, |&i| model.loss_and_gradient(&records[i].input, &records[i].values, k));
            let scale = 1.0 / chunk.len() as f64;
            let mut grad = vec![0.0; velocity.len()];
            let mut loss = 0.0;
            for (l, g) in &per_record {
                loss += l;
                for (acc, v) in grad.iter_mut().zip(g) {
                    *acc += v;
                }
            }
            loss *= scale;
            if !loss.is_finite() || grad.iter().any(|g| !g.is_finite()) {
                return Err(Error::NonFiniteLoss {
                    loss,
                    epoch: epoch + 1,
                    batch: b,
                    lr: config.lr,
                });
            }
            for (v, g) in velocity.iter_mut().zip(&grad) {
                *v = config.momentum * *v - config.lr * scale * g;
            }
            model.add_scaled(&velocity, 1.0);
            loss_sum += loss * chunk.len() as f64;
        }
        epoch_losses.push(loss_sum / records.len() as f64);
    }
    Ok((model, TrainReport { initial_loss, epoch_losses }))
}

/// Law parameters from the network and the curve they imply at
/// `t = 1..=horizon`.
pub fn predict_curve(model: &PredictorModel, input: &PredictorInput, horizon: u32) -> Result<(CurveParams, Vec<f64>)> {
    if horizon == 0 {
        return Err(Error::invalid("horizon must be at least 1"));
    }
    let theta = model.predict_params(input)?;
    let values = (1..=horizon).map(|t| theta.at(f64::from(t))).collect();
    Ok((theta, values))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveScore {
    pub mae: f64,
    pub ovd: f64,
}

/// Mean absolute error over the epochs both curves cover, and the gap between
/// their optima (max for classification, min for regression). The predicted
/// optimum only looks at the first 200 epochs.
pub fn evaluate(predicted: &[f64], truth: &ValidationCurve) -> Result<CurveScore> {
    let n = predicted.len().min(truth.len());
    if n == 0 {
        return Err(Error::invalid(format!("curve `{}`: prediction and truth do not overlap", truth.dataset_id)));
    }
    let mae = predicted.iter().zip(&truth.values).map(|(p, y)| (p - y).abs()).sum::<f64>() / n as f64;
    let pred = &predicted[..predicted.len().min(DEFAULT_HORIZON as usize)];
    let ovd = if truth.task.is_classification() {
        (fold_max(pred) - fold_max(&truth.values)).abs()
    } else {
        (fold_min(pred) - fold_min(&truth.values)).abs()
    };
    Ok(CurveScore { mae, ovd })
}

fn fold_max(v: &[f64]) -> f64 {
    v.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

fn fold_min(v: &[f64]) -> f64 {
    v.iter().copied().fold(f64::INFINITY, f64::min)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Advice {
    Continue,
    Stop,
}

/// Continue only when the predicted optimum over `t = 1..=horizon` beats
/// `best_so_far` by at least `margin` in the metric's direction.
pub fn advise_early_stop(
    model: &PredictorModel,
    input: &PredictorInput,
    best_so_far: f64,
    horizon: u32,
    task: TaskType,
    margin: f64,
) -> Result<Advice> {
    if !best_so_far.is_finite() || !(margin >= 0.0) {
        return Err(Error::invalid("best_so_far must be finite and margin non-negative"));
    }
    let (_, values) = predict_curve(model, input, horizon)?;
    let gain = if task.is_classification() {
        fold_max(&values) - best_so_far
    } else {
        best_so_far - fold_min(&values)
    };
    Ok(if gain >= margin { Advice::Continue } else { Advice::Stop })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GradientCheck {
    pub max_rel_error: f64,
    pub checked: usize,
    /// Coordinates whose ±h perturbation crossed a ReLU or residual-sign
    /// kink, where a central difference is meaningless.
    pub skipped: usize,
}

/// Compares [`PredictorModel::loss_and_gradient`] with central differences of
/// step `h` on every parameter. Relative error is
/// `|g - fd| / max(|g|, |fd|, 1e-6)`: below 1e-6 the difference quotient at
/// `h = 1e-5` carries ~1e-11 of cancellation noise, so tiny gradients are
/// judged on absolute error instead.
pub fn gradient_check(model: &PredictorModel, raw: &[f64], values: &[f64], k: usize, h: f64) -> GradientCheck {
    let (_, grad) = model.loss_and_gradient(raw, values, k);
    let pattern = model.kink_pattern(raw, values, k);
    let mut m = model.clone();
    let mut out = GradientCheck {
        max_rel_error: 0.0,
        checked: 0,
        skipped: 0,
    };
    for (i, &g) in grad.iter().enumerate() {
        let p0 = *m.param_mut(i);
        *m.param_mut(i) = p0 + h;
        let (lp, kp) = (m.loss(raw, values, k), m.kink_pattern(raw, values, k));
        *m.param_mut(i) = p0 - h;
        let (lm, km) = (m.loss(raw, values, k), m.kink_pattern(raw, values, k));
        *m.param_mut(i) = p0;
        if kp != pattern || km != pattern {
            out.skipped += 1;
            continue;
        }
        let fd = (lp - lm) / (2.0 * h);
        let rel = (g - fd).abs() / g.abs().max(fd.abs()).max(1e-6);
        out.max_rel_error = out.max_rel_error.max(rel);
        out.checked += 1;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::MetricKind;

    fn curve(task: TaskType, values: Vec<f64>) -> ValidationCurve {
        let metric = if task.is_classification() { MetricKind::Accuracy } else { MetricKind::NormalizedRmse };
        ValidationCurve {
            dataset_id: "d".into(),
            task,
            metric,
            values,
        }
    }

    #[test]
    fn evaluate_examples() {
        let t = curve(TaskType::Binclass, vec![0.5, 0.6, 0.7]);
        let s = evaluate(&[0.6, 0.6, 0.6], &t).unwrap();
        assert!((s.mae - 0.2 / 3.0).abs() < 1e-12 && (s.ovd - 0.1).abs() < 1e-12);
        assert_eq!(evaluate(&t.values, &t).unwrap(), CurveScore { mae: 0.0, ovd: 0.0 });
        let shifted: Vec<f64> = t.values.iter().map(|v| v + 0.1).collect();
        let s = evaluate(&shifted, &t).unwrap();
        assert!((s.mae - 0.1).abs() < 1e-12 && (s.ovd - 0.1).abs() < 1e-12);
        assert!(evaluate(&[], &t).is_err());
    }

    #[test]
    fn regression_ovd_uses_minimum() {
        let t = curve(TaskType::Regression, vec![0.9, 0.5, 0.6]);
        let s = evaluate(&[0.8, 0.7, 0.4], &t).unwrap();
        assert!((s.ovd - 0.1).abs() < 1e-12);
    }

    fn constant_model(c: f64) -> PredictorModel {
        let mut m = PredictorModel::init(&mut rng::stream(0, "t"));
        for l in &mut m.layers {
            l.weights.iter_mut().for_each(|w| *w = 0.0);
        }
        m.layers.last_mut().unwrap().bias = vec![0.0, 0.0, c, 0.0];
        m
    }

    #[test]
    fn early_stop_rule() {
        let m = constant_model(0.75);
        let x = PredictorInput::new([0.0; INPUT_DIM]);
        let advise = |best, task| advise_early_stop(&m, &x, best, 50, task, 0.25).unwrap();
        assert_eq!(advise(0.8, TaskType::Binclass), Advice::Stop);
        assert_eq!(advise(0.25, TaskType::Binclass), Advice::Continue);
        // Exactly the margin still counts as an improvement.
        assert_eq!(advise(0.5, TaskType::Binclass), Advice::Continue);
        assert_eq!(advise(1.0, TaskType::Regression), Advice::Continue);
        assert_eq!(advise(0.9, TaskType::Regression), Advice::Stop);
    }

    #[test]
    fn horizon_one_prediction() {
        let m = constant_model(0.6);
        let (_, v) = predict_curve(&m, &PredictorInput::new([0.0; INPUT_DIM]), 1).unwrap();
        assert_eq!(v, vec![0.6]);
    }

    #[test]
    fn theta_targets_reject_short_curves() {
        let c = curve(TaskType::Binclass, vec![0.5, 0.6, 0.7]);
        let err = fit_theta_targets(&[c]).unwrap_err().to_string();
        assert!(err.contains("`d`"), "{err}");
        let c = curve(TaskType::Binclass, vec![0.7; 10]);
        let p = fit_theta_targets(&[c]).unwrap()[0].params;
        assert!((p.c - 0.7).abs() < 1e-9 && p.a.abs() < 1e-9 && p.b.abs() < 1e-9 && p.d.abs() < 1e-9);
    }

    #[test]
    fn selection_requires_twenty_records() {
        let x = vec![[0.0; INPUT_DIM]; 19];
        let t = vec![CurveParams::new(0.0, 0.0, 0.5, 0.0); 19];
        assert!(select_meta_features(&x, &t).is_err());
        let x = vec![[1.0; INPUT_DIM]; 25];
        let t: Vec<CurveParams> = (0..25).map(|i| CurveParams::new(0.0, 0.0, i as f64, 0.0)).collect();
        let r = select_meta_features(&x, &t).unwrap();
        assert!(r.importance.iter().all(|&v| v == 0.0) && r.selected.iter().all(|s| !s));
    }

    #[test]
    fn split_keeps_ids_together() {
        let recs: Vec<TrainingRecord> = (0..50)
            .map(|i| TrainingRecord {
                dataset_id: format!("d{}", i % 10),
                task: TaskType::Binclass,
                input: [0.0; INPUT_DIM],
                values: vec![0.5; 8],
            })
            .collect();
        let c = TrainingCorpus::split_by_dataset(recs, 0.8, 3).unwrap();
        c.validate(5).unwrap();
        assert_eq!(c.indices(Split::Train).len(), 40);
    }
}

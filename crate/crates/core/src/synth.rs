//! Synthetic curve corpora with a planted meta-feature → parameter map.
//!
//! Each dataset draws four latent scores `u ∈ [0, 1]^4`. Four meta-features
//! expose them directly:
//!
//! | slot               | value      |
//! |--------------------|------------|
//! | `class_conc.mean`  | `u0`       |
//! | `mean.mean`        | `u1`       |
//! | `sparsity.mean`    | `u2`       |
//! | `cov.mean`         | `2 u3 - 1` |
//!
//! and every other meta-feature is drawn independently as nuisance. The law
//! parameters are the fixed linear map
//!
//! ```text
//! A = A_lo + (A_hi - A_lo) (0.7 u0 + 0.3 u1)
//! B = B_lo + (B_hi - B_lo) (0.5 u1 + 0.5 u2)
//! C = C_lo + (C_hi - C_lo) (0.6 u2 + 0.4 u3)
//! D = D_lo + (D_hi - D_lo) (0.8 u3 + 0.2 u0)
//! ```
//!
//! with the ranges in [`THETA_RANGES`]. Regression curves use `1 - a(t)`,
//! which is again the law (with parameters `(-A, -B, 1 - C, -D)`), so the
//! emitted θ always reproduces the emitted curve exactly when there is no
//! noise. With noise, values are clamped to `[0, 1]`.

use std::collections::BTreeMap;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::curves::CurveParams;
use crate::data::{MetricKind, ValidationCurve};
use crate::metafeatures::{Aggregate, MetaFeatureVector, LAYOUT_VERSION};
use crate::{rng, Error, Result, TaskType};

/// `(lo, hi)` for A, B, C, D.
pub const THETA_RANGES: [(f64, f64); 4] = [(0.005, 0.03), (-0.004, 0.001), (0.5, 0.75), (-0.35, -0.05)];

/// Mixing weights of the latent scores, one row per parameter.
pub const PLANTED_WEIGHTS: [[f64; 4]; 4] = [
    [0.7, 0.3, 0.0, 0.0],
    [0.0, 0.5, 0.5, 0.0],
    [0.0, 0.0, 0.6, 0.4],
    [0.2, 0.0, 0.0, 0.8],
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub n_curves: usize,
    pub horizon: usize,
    pub noise_sd: f64,
    pub seed: u64,
    /// Task of curve `i` is `tasks[i % tasks.len()]`.
    pub tasks: Vec<TaskType>,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            n_curves: 100,
            horizon: 200,
            noise_sd: 0.0,
            seed: 0,
            tasks: vec![TaskType::Binclass],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthCorpus {
    pub curves: Vec<ValidationCurve>,
    pub meta: BTreeMap<String, MetaFeatureVector>,
    /// Parameters that generate each curve (after the regression flip).
    pub theta: BTreeMap<String, CurveParams>,
}

/// Law parameters for latent scores `u`, before any task-dependent flip.
pub fn planted_theta(u: [f64; 4]) -> CurveParams {
    let mut out = [0.0; 4];
    for j in 0..4 {
        let mix: f64 = PLANTED_WEIGHTS[j].iter().zip(&u).map(|(w, v)| w * v).sum();
        let (lo, hi) = THETA_RANGES[j];
        // Clamp away rounding at the ends of the range.
        out[j] = (lo + (hi - lo) * mix).clamp(lo, hi);
    }
    CurveParams::from_array(out)
}

pub fn synth_corpus(config: &SynthConfig) -> Result<SynthCorpus> {
    if config.n_curves == 0 {
        return Err(Error::invalid("n_curves must be at least 1"));
    }
    if config.horizon == 0 {
        return Err(Error::invalid("horizon must be at least 1"));
    }
    if !(config.noise_sd >= 0.0 && config.noise_sd.is_finite()) {
        return Err(Error::invalid("noise_sd must be a finite non-negative number"));
    }
    if config.tasks.is_empty() {
        return Err(Error::invalid("at least one task type is required"));
    }
    let noise = Normal::new(0.0, config.noise_sd).map_err(|e| Error::invalid(e.to_string()))?;
    let width = (config.n_curves - 1).to_string().len().max(4);

    let mut out = SynthCorpus {
        curves: Vec::with_capacity(config.n_curves),
        meta: BTreeMap::new(),
        theta: BTreeMap::new(),
    };
    for i in 0..config.n_curves {
        let id = format!("synth-{i:0width$}");
        let task = config.tasks[i % config.tasks.len()];
        let mut r = rng::substream(config.seed, "synth/dataset", i as u64);
        let u: [f64; 4] = std::array::from_fn(|_| r.random::<f64>());
        let meta = nuisance_meta(&mut r, task, u);

        let base = planted_theta(u);
        let (theta, metric) = if task.is_classification() {
            (base, MetricKind::Accuracy)
        } else {
            (CurveParams::new(-base.a, -base.b, 1.0 - base.c, -base.d), MetricKind::NormalizedRmse)
        };
        let mut noise_rng = rng::substream(config.seed, "synth/noise", i as u64);
        let values = (1..=config.horizon)
            .map(|t| {
                let v = theta.at(t as f64);
                if config.noise_sd > 0.0 {
                    (v + noise.sample(&mut noise_rng)).clamp(0.0, 1.0)
                } else {
                    v
                }
            })
            .collect();
        out.curves.push(ValidationCurve {
            dataset_id: id.clone(),
            task,
            metric,
            values,
        });
        out.meta.insert(id.clone(), meta);
        out.theta.insert(id, theta);
    }
    Ok(out)
}

fn agg<R: Rng>(r: &mut R, mean: f64, sd_hi: f64) -> Aggregate {
    Aggregate {
        mean,
        sd: r.random_range(0.0..sd_hi),
    }
}

/// A plausible meta-feature vector carrying the latent scores in four slots.
fn nuisance_meta<R: Rng>(r: &mut R, task: TaskType, u: [f64; 4]) -> MetaFeatureVector {
    let nr_inst = r.random_range(100u32..100_000) as f64;
    let nr_attr = r.random_range(2u32..200) as f64;
    let classification = task.is_classification();
    let attr_ent = r.random_range(0.5..3.0);
    let class_ent = if classification { r.random_range(0.3..2.0) } else { 0.0 };
    let mut_inf = if classification { r.random_range(0.0..0.5f64).min(class_ent) } else { 0.0 };
    MetaFeatureVector {
        layout_version: LAYOUT_VERSION,
        nr_inst,
        nr_attr,
        inst_to_attr: nr_inst / nr_attr,
        mean: agg(r, u[1], 2.0),
        max: {
            let m = r.random_range(1.0..50.0);
            agg(r, m, 20.0)
        },
        range: {
            let m = r.random_range(1.0..60.0);
            agg(r, m, 20.0)
        },
        iq_range: {
            let m = r.random_range(0.1..5.0);
            agg(r, m, 2.0)
        },
        sparsity: agg(r, u[2], 0.3),
        cov: agg(r, 2.0 * u[3] - 1.0, 0.5),
        attr_ent: agg(r, attr_ent, 0.5),
        joint_ent: agg(r, attr_ent + class_ent - mut_inf, 0.5),
        mut_inf: agg(r, mut_inf, 0.2),
        class_conc: agg(r, u[0], 0.2),
        gravity: if classification { r.random_range(0.0..10.0) } else { 0.0 },
        nr_outliers: r.random_range(0u32..(nr_attr as u32 + 1)) as f64,
        ns_ratio: if classification { r.random_range(0.0..20.0) } else { 0.0 },
        imbalance_ratio: if classification { r.random_range(0.05..=1.0) } else { 1.0 },
    }
}

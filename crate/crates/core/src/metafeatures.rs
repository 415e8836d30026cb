//! Dataset meta-features and the fixed predictor input layout.
//!
//! Per-attribute statistics (`mean`, `max`, `range`, `iq_range`, `sparsity`,
//! the entropies, `class_conc`) are computed over every feature column,
//! categorical columns contributing their ordinal codes, and summarised by the
//! mean and sample standard deviation across attributes. Definitions:
//!
//! * quantiles interpolate linearly between order statistics (`q * (n - 1)`);
//! * entropies are Shannon entropies in nats. Numerical values are cut into
//!   10 equal-frequency bins by rank, so any strictly increasing transform of
//!   a column leaves its bins unchanged; categorical codes are their own bins;
//! * the class side of `class_conc`, `joint_ent`, `mut_inf`, `gravity` and
//!   `imbalance_ratio` is the label for classification and the label's
//!   10-bin equal-frequency discretization for regression;
//! * `class_conc` is the Goodman-Kruskal concentration of the class given the
//!   binned attribute;
//! * `sparsity` is the number of distinct values over `n_instances`;
//! * `cov` is the absolute sample covariance of each distinct attribute pair;
//! * `gravity` is the Euclidean distance between the majority and minority
//!   class centres over z-scored numerical attributes;
//! * `nr_outliers` counts attributes with a value outside the 1.5 IQR fences;
//! * `ns_ratio` is `(attr_ent.mean - mut_inf.mean) / mut_inf.mean`, or 0 when
//!   `mut_inf.mean` is (numerically) zero.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::data::{ColumnKind, DatasetSummary};
use crate::{Error, Result};

/// Version tag of the predictor input layout below. Bump on any change.
pub const LAYOUT_VERSION: u32 = 1;
/// Meta-feature scalars in the predictor input.
pub const META_SLICE_LEN: usize = 19;
/// Epochs of observed support in the predictor input.
pub const SUPPORT_LEN: usize = 5;
/// Predictor input width.
pub const INPUT_DIM: usize = SUPPORT_LEN + META_SLICE_LEN;

/// Bins used for equal-frequency discretization.
pub const N_BINS: usize = 10;

const MI_EPS: f64 = 1e-12;

/// Names of the 19 meta-feature input slots, in layout order.
pub const META_SLICE_NAMES: [&str; META_SLICE_LEN] = [
    "class_conc.mean",
    "log10(inst_to_attr)",
    "mean.mean",
    "mean.sd",
    "range.mean",
    "range.sd",
    "iq_range.mean",
    "iq_range.sd",
    "nr_attr",
    "sparsity.mean",
    "gravity",
    "joint_ent.mean",
    "attr_ent.mean",
    "cov.mean",
    "max.mean",
    "max.sd",
    "mut_inf.mean",
    "log10(nr_inst)",
    "ns_ratio",
];

/// Mean and sample standard deviation of a per-attribute meta-feature.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Aggregate {
    pub mean: f64,
    pub sd: f64,
}

impl Aggregate {
    pub fn of(values: &[f64]) -> Self {
        Aggregate {
            mean: mean(values),
            sd: sample_sd(values),
        }
    }
}

/// Meta-features of one dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetaFeatureVector {
    pub layout_version: u32,
    pub nr_inst: f64,
    pub nr_attr: f64,
    pub inst_to_attr: f64,
    pub mean: Aggregate,
    pub max: Aggregate,
    pub range: Aggregate,
    pub iq_range: Aggregate,
    pub sparsity: Aggregate,
    pub cov: Aggregate,
    pub attr_ent: Aggregate,
    pub joint_ent: Aggregate,
    pub mut_inf: Aggregate,
    pub class_conc: Aggregate,
    pub gravity: f64,
    pub nr_outliers: f64,
    pub ns_ratio: f64,
    pub imbalance_ratio: f64,
}

impl MetaFeatureVector {
    /// The 19 meta-feature slots of the predictor input, in layout order.
    pub fn predictor_slice(&self) -> [f64; META_SLICE_LEN] {
        [
            self.class_conc.mean,
            self.inst_to_attr.log10(),
            self.mean.mean,
            self.mean.sd,
            self.range.mean,
            self.range.sd,
            self.iq_range.mean,
            self.iq_range.sd,
            self.nr_attr,
            self.sparsity.mean,
            self.gravity,
            self.joint_ent.mean,
            self.attr_ent.mean,
            self.cov.mean,
            self.max.mean,
            self.max.sd,
            self.mut_inf.mean,
            self.nr_inst.log10(),
            self.ns_ratio,
        ]
    }

    pub fn validate(&self) -> Result<()> {
        if self.layout_version != LAYOUT_VERSION {
            return Err(Error::invalid(format!(
                "meta-feature layout version {} (expected {LAYOUT_VERSION})",
                self.layout_version
            )));
        }
        let aggs = [
            self.mean,
            self.max,
            self.range,
            self.iq_range,
            self.sparsity,
            self.cov,
            self.attr_ent,
            self.joint_ent,
            self.mut_inf,
            self.class_conc,
        ];
        let scalars = [
            self.nr_inst,
            self.nr_attr,
            self.inst_to_attr,
            self.gravity,
            self.nr_outliers,
            self.ns_ratio,
            self.imbalance_ratio,
        ];
        if aggs.iter().flat_map(|a| [a.mean, a.sd]).chain(scalars).any(|v| !v.is_finite()) {
            return Err(Error::invalid("meta-feature vector has non-finite entries"));
        }
        if self.attr_ent.mean < 0.0 || self.joint_ent.mean < 0.0 || self.mut_inf.mean < 0.0 {
            return Err(Error::invalid("negative entropy"));
        }
        if !(self.imbalance_ratio > 0.0 && self.imbalance_ratio <= 1.0) {
            return Err(Error::invalid("imbalance_ratio outside (0, 1]"));
        }
        if self.inst_to_attr <= 0.0 || self.nr_inst < 1.0 || self.nr_attr < 1.0 {
            return Err(Error::invalid("instance/attribute counts must be positive"));
        }
        for c in [self.nr_inst, self.nr_attr, self.nr_outliers] {
            if c.fract() != 0.0 || c < 0.0 {
                return Err(Error::invalid("count meta-features must be non-negative integers"));
            }
        }
        Ok(())
    }
}

/// Predictor input: `support` verbatim, then the meta-feature slice.
pub fn assemble_input(mfv: &MetaFeatureVector, support: &[f64]) -> Result<[f64; INPUT_DIM]> {
    if support.len() != SUPPORT_LEN {
        return Err(Error::invalid(format!(
            "support must hold {SUPPORT_LEN} values, got {}",
            support.len()
        )));
    }
    mfv.validate()?;
    let mut out = [0.0; INPUT_DIM];
    out[..SUPPORT_LEN].copy_from_slice(support);
    out[SUPPORT_LEN..].copy_from_slice(&mfv.predictor_slice());
    Ok(out)
}

/// Computes every meta-feature of `summary`.
pub fn extract(summary: &DatasetSummary) -> Result<MetaFeatureVector> {
    summary.validate()?;
    let n = summary.n_instances;
    let d = summary.n_features;

    let classes: Vec<u32> = if summary.task.is_classification() {
        summary.target.iter().map(|&v| v as u32).collect()
    } else {
        equal_frequency_bins(&summary.target)
    };
    let class_counts = counts(&classes);
    let class_ent = entropy(class_counts.values().copied(), n);

    let mut means = Vec::with_capacity(d);
    let mut maxs = Vec::with_capacity(d);
    let mut ranges = Vec::with_capacity(d);
    let mut iqrs = Vec::with_capacity(d);
    let mut sparsity = Vec::with_capacity(d);
    let mut attr_ent = Vec::with_capacity(d);
    let mut joint_ent = Vec::with_capacity(d);
    let mut mut_inf = Vec::with_capacity(d);
    let mut class_conc = Vec::with_capacity(d);
    let mut nr_outliers = 0usize;

    for col in &summary.columns {
        let mut sorted = col.values.clone();
        sorted.sort_by(f64::total_cmp);
        let lo = sorted[0];
        let hi = sorted[n - 1];
        let q1 = quantile_sorted(&sorted, 0.25);
        let q3 = quantile_sorted(&sorted, 0.75);
        let iqr = q3 - q1;
        means.push(mean(&col.values));
        maxs.push(hi);
        ranges.push(hi - lo);
        iqrs.push(iqr);
        let distinct = 1 + sorted.windows(2).filter(|w| w[0] != w[1]).count();
        sparsity.push(distinct as f64 / n as f64);
        if lo < q1 - 1.5 * iqr || hi > q3 + 1.5 * iqr {
            nr_outliers += 1;
        }

        let bins = match col.kind {
            ColumnKind::Numerical => equal_frequency_bins(&col.values),
            ColumnKind::Categorical => col.values.iter().map(|&v| v as u32).collect(),
        };
        let h_attr = entropy(counts(&bins).values().copied(), n);
        let joint = joint_counts(&bins, &classes);
        let h_joint = entropy(joint.values().copied(), n);
        attr_ent.push(h_attr);
        joint_ent.push(h_joint);
        mut_inf.push((h_attr + class_ent - h_joint).max(0.0));
        class_conc.push(concentration(&bins, &joint, &class_counts, n));
    }

    let mut covs = Vec::with_capacity(d * d.saturating_sub(1) / 2);
    for i in 0..d {
        for j in (i + 1)..d {
            covs.push(sample_cov(&summary.columns[i].values, &summary.columns[j].values).abs());
        }
    }

    let attr_ent = Aggregate::of(&attr_ent);
    let mut_inf = Aggregate::of(&mut_inf);
    let ns_ratio = if mut_inf.mean <= MI_EPS {
        0.0
    } else {
        ((attr_ent.mean - mut_inf.mean) / mut_inf.mean).max(0.0)
    };

    let max_count = class_counts.values().copied().max().unwrap_or(1);
    let min_count = class_counts.values().copied().min().unwrap_or(1);

    let mfv = MetaFeatureVector {
        layout_version: LAYOUT_VERSION,
        nr_inst: n as f64,
        nr_attr: d as f64,
        inst_to_attr: n as f64 / d as f64,
        mean: Aggregate::of(&means),
        max: Aggregate::of(&maxs),
        range: Aggregate::of(&ranges),
        iq_range: Aggregate::of(&iqrs),
        sparsity: Aggregate::of(&sparsity),
        cov: Aggregate::of(&covs),
        attr_ent,
        joint_ent: Aggregate::of(&joint_ent),
        mut_inf,
        class_conc: Aggregate::of(&class_conc),
        gravity: gravity(summary, &classes, &class_counts),
        nr_outliers: nr_outliers as f64,
        ns_ratio,
        imbalance_ratio: min_count as f64 / max_count as f64,
    };
    mfv.validate()?;
    Ok(mfv)
}

/// [`extract`] over many datasets, in parallel when enabled.
pub fn extract_all(summaries: &[DatasetSummary]) -> Result<Vec<MetaFeatureVector>> {
    crate::par::try_map(summaries, extract)
}

fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        0.0
    } else {
        values.iter().sum::<f64>() / values.len() as f64
    }
}

fn sample_sd(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let m = mean(values);
    let ss: f64 = values.iter().map(|v| (v - m) * (v - m)).sum();
    (ss / (values.len() - 1) as f64).sqrt()
}

fn sample_cov(x: &[f64], y: &[f64]) -> f64 {
    if x.len() < 2 {
        return 0.0;
    }
    let mx = mean(x);
    let my = mean(y);
    let s: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    s / (x.len() - 1) as f64
}

/// Linear-interpolation quantile of an ascending slice.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Bin index in `0..N_BINS` by rank: `floor(N_BINS * #(values < v) / n)`.
/// Tied values share a bin.
pub fn equal_frequency_bins(values: &[f64]) -> Vec<u32> {
    let n = values.len();
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    values
        .iter()
        .map(|v| {
            let below = sorted.partition_point(|s| s < v);
            ((N_BINS * below) / n).min(N_BINS - 1) as u32
        })
        .collect()
}

fn counts(labels: &[u32]) -> BTreeMap<u32, usize> {
    let mut m = BTreeMap::new();
    for &l in labels {
        *m.entry(l).or_insert(0) += 1;
    }
    m
}

fn joint_counts(a: &[u32], b: &[u32]) -> BTreeMap<(u32, u32), usize> {
    let mut m = BTreeMap::new();
    for (&x, &y) in a.iter().zip(b) {
        *m.entry((x, y)).or_insert(0) += 1;
    }
    m
}

fn entropy(counts: impl Iterator<Item = usize>, n: usize) -> f64 {
    let n = n as f64;
    let h: f64 = counts
        .filter(|&c| c > 0)
        .map(|c| {
            let p = c as f64 / n;
            -p * p.ln()
        })
        .sum();
    h.max(0.0)
}

fn concentration(
    attr: &[u32],
    joint: &BTreeMap<(u32, u32), usize>,
    class_counts: &BTreeMap<u32, usize>,
    n: usize,
) -> f64 {
    let nf = n as f64;
    let sum_py2: f64 = class_counts.values().map(|&c| (c as f64 / nf).powi(2)).sum();
    let denom = 1.0 - sum_py2;
    if denom <= 1e-15 {
        return 0.0;
    }
    let attr_counts = counts(attr);
    let s: f64 = joint
        .iter()
        .map(|(&(x, _), &c)| {
            let pxy = c as f64 / nf;
            let px = attr_counts[&x] as f64 / nf;
            pxy * pxy / px
        })
        .sum();
    ((s - sum_py2) / denom).max(0.0)
}

fn gravity(summary: &DatasetSummary, classes: &[u32], class_counts: &BTreeMap<u32, usize>) -> f64 {
    if class_counts.len() < 2 {
        return 0.0;
    }
    // Majority: largest count, lowest label on ties. Minority: smallest count
    // among the rest, highest label on ties.
    let mut by_count: Vec<(u32, usize)> = class_counts.iter().map(|(&k, &v)| (k, v)).collect();
    by_count.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    let majority = by_count[0].0;
    let minority = by_count[1..]
        .iter()
        .min_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(&a.0)))
        .map(|p| p.0)
        .expect("at least two classes");

    let mut dist2 = 0.0;
    for col in summary.columns.iter().filter(|c| c.kind == ColumnKind::Numerical) {
        let m = mean(&col.values);
        let var = col.values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / col.values.len() as f64;
        let sd = var.sqrt();
        if sd == 0.0 {
            continue;
        }
        let centre = |label: u32| {
            let (s, c) = col
                .values
                .iter()
                .zip(classes)
                .filter(|(_, &y)| y == label)
                .fold((0.0, 0usize), |(s, c), (v, _)| (s + (v - m) / sd, c + 1));
            s / c as f64
        };
        let diff = centre(majority) - centre(minority);
        dist2 += diff * diff;
    }
    dist2.sqrt()
}
